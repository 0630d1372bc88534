#include "gg/timefrac.hpp"

#include "gg/model.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace gg {

namespace {

std::mutex plan_mutex;

// One DCT-I plan per length, created with FFTW_ESTIMATE and executed through
// the new-array interface.
fftw_plan redft00_plan(int n)
{
    static std::map<int, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    double* in = fftw_alloc_real(n);
    double* out = fftw_alloc_real(n);
    fftw_plan plan = fftw_plan_r2r_1d(n, in, out, FFTW_REDFT00, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(n, plan);
    return plan;
}

void check_series(const TimeSeries& ts)
{
    if (ts.values.size() < 2)
        throw Error("ShapeMismatch", "time series needs at least two samples");
    if (!(ts.T > 0.0)) throw Error("PreconditionViolation", "horizon must be positive");
}

}  // namespace

std::vector<double> cosine_forward(const std::vector<double>& x)
{
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x), out(n);
    fftw_execute_r2r(redft00_plan(n), in.data(), out.data());
    return out;
}

std::vector<double> cosine_inverse(const std::vector<double>& y)
{
    auto x = cosine_forward(y);
    const double s = 1.0 / (2.0 * (static_cast<double>(y.size()) - 1.0));
    for (double& v : x) v *= s;
    return x;
}

double cosine_frequency(int k, double T) { return M_PI * k / T; }

TimeSeries apply_multiplier(const TimeSeries& ts, const std::function<double(double)>& m)
{
    check_series(ts);
    auto y = cosine_forward(ts.values);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] *= m(cosine_frequency(static_cast<int>(k), ts.T));
    return {cosine_inverse(y), ts.T};
}

TimeSeries frac_neg_laplacian(const TimeSeries& ts, double gamma)
{
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw Error("PreconditionViolation", "gamma must lie in [0,1], got " + std::to_string(gamma));
    check_series(ts);
    if (gamma == 0.0) return ts;
    return apply_multiplier(ts, [gamma](double w) { return std::pow(std::abs(w), 2.0 * gamma); });
}

TimeSeries bessel_potential(const TimeSeries& ts, double s)
{
    check_series(ts);
    if (s == 0.0) return ts;
    return apply_multiplier(ts, [s](double w) { return std::pow(1.0 + w * w, s); });
}

double sobolev_norm(const TimeSeries& ts, double s)
{
    if (!(s >= -1.0 && s <= 1.0))
        throw Error("PreconditionViolation", "s must lie in [-1,1], got " + std::to_string(s));
    check_series(ts);
    const auto y = cosine_forward(ts.values);
    const int N = static_cast<int>(y.size()) - 1;
    const double dt = ts.T / N;
    double acc = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double w = cosine_frequency(k, ts.T);
        const double mk = std::pow(1.0 + w * w, s);
        acc += (k == 0 || k == N ? 1.0 : 2.0) * mk * y[k] * y[k];
    }
    return std::sqrt(dt / (4.0 * N) * acc);
}

double time_inner(const TimeSeries& f, const TimeSeries& g)
{
    check_series(f);
    if (f.values.size() != g.values.size())
        throw Error("ShapeMismatch", "time series lengths differ");
    const int N = static_cast<int>(f.values.size()) - 1;
    const double dt = f.T / N;
    double s = 0.0;
    for (int n = 0; n <= N; ++n) s += (n == 0 || n == N ? 0.5 : 1.0) * f.values[n] * g.values[n];
    return s * dt;
}

}  // namespace gg
