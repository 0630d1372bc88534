#pragma once

#include <functional>
#include <vector>

namespace gg {

// Uniform samples at t_n = n T / (values.size() - 1).
struct TimeSeries {
    std::vector<double> values;
    double T = 1.0;
};

// Cosine coefficients of the even extension (unnormalized DCT-I) and back.
std::vector<double> cosine_forward(const std::vector<double>& x);
std::vector<double> cosine_inverse(const std::vector<double>& y);

// Angular frequency of cosine mode k: pi k / T.
double cosine_frequency(int k, double T);

// Applies m(omega) to every cosine mode of the even extension.
TimeSeries apply_multiplier(const TimeSeries& ts, const std::function<double(double)>& m);

// (-d^2/dt^2)^gamma, multiplier |omega|^{2 gamma}.
TimeSeries frac_neg_laplacian(const TimeSeries& ts, double gamma);

// (1 - d^2/dt^2)^s, multiplier (1 + omega^2)^s.
TimeSeries bessel_potential(const TimeSeries& ts, double s);

// Norm with multiplier (1 + omega^2)^{s/2}; s = 0 is the trapezoid L2 norm.
double sobolev_norm(const TimeSeries& ts, double s);

// Trapezoid inner product on (0, T).
double time_inner(const TimeSeries& f, const TimeSeries& g);

}  // namespace gg
