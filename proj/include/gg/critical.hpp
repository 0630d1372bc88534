#pragma once

#include "gg/model.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace gg {

enum class Family { F1, F2 };

struct GeneratorTuple {
    Family family = Family::F1;
    // {k} for F1, {k, l, m, n, s} for F2
    std::vector<int> indices;
};

std::string to_string(const GeneratorTuple& gen);
bool operator==(const GeneratorTuple& x, const GeneratorTuple& y);

// Printed is the 15-term form as published. Derived is sum(q_j^2)/6 with the
// integer root offsets q_j of verify_tuple; it differs from Printed only in
// the ls coefficient (4 instead of 3).
enum class AlphaForm { Printed, Derived };

long long alpha_quadratic(int k, int l, int m, int n, int s, AlphaForm form = AlphaForm::Printed);

using Residuals = std::array<std::complex<double>, 6>;

struct CriticalLength {
    double value = 0.0;
    std::vector<GeneratorTuple> gens;
    double xi0 = 0.0;
    std::array<double, 6> xi{};
    std::complex<double> p, p_alt;
    // e1, e2 + r/(1-a^2b), e3 - (c+1)p/(1-a^2b), e4, e5 + rp/(1-a^2b),
    // e6 - cp^2/(1-a^2b), for p and for p_alt
    Residuals residuals{}, residuals_alt{};
};

struct CriticalSet {
    std::vector<CriticalLength> lengths;
};

double f1_length(const ValidatedParams& p, int k);
double f2_length(const ValidatedParams& p, const std::array<int, 5>& idx, AlphaForm form = AlphaForm::Printed);

CriticalSet enumerate_critical_lengths(const ValidatedParams& p, double Lmax,
                                       AlphaForm form = AlphaForm::Printed);

std::optional<GeneratorTuple> is_critical(const ValidatedParams& p, double L, double rel_tol,
                                          AlphaForm form = AlphaForm::Printed);

CriticalLength verify_tuple(const ValidatedParams& p, const GeneratorTuple& gen,
                            AlphaForm form = AlphaForm::Printed);

// Roots of P(xi) = (1-a^2b)xi^6 - r xi^4 - (c+1)p xi^3 + r p xi + c p^2.
std::array<std::complex<double>, 6> polynomial_roots(const ValidatedParams& p, std::complex<double> pval);

bool root_sharing_oracle(const ValidatedParams& p, std::complex<double> pval, double L, double tol);

enum class KernelVariant {
    // eigenvalue problem with the five adjoint relations at both ends
    E18,
    // the cascade with phi, psi and their first two derivatives zero at 0
    E14
};

struct ScanPoint {
    std::complex<double> lambda;
    double sigma_min = 0.0;
};

std::vector<ScanPoint> ode_kernel_scan(const ValidatedParams& p, double L,
                                       const std::vector<std::complex<double>>& lambdas,
                                       KernelVariant variant = KernelVariant::E18, int nx = 128);

}  // namespace gg
