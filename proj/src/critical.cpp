#include "gg/critical.hpp"

#include "gg/stencil.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gg {

namespace {

using cd = std::complex<double>;

// Integer root offsets: xi_j = q_j * pi / (3L).
std::array<long long, 6> root_offsets(const std::array<int, 5>& idx)
{
    const auto [k, l, m, n, s] = idx;
    std::array<long long, 6> q{};
    q[0] = -(5LL * k + 4LL * l + 3LL * m + 2LL * n + s);
    for (int j = 1; j < 6; ++j) q[j] = q[j - 1] + 6LL * idx[j - 1];
    return q;
}

std::array<int, 5> f2_indices(const GeneratorTuple& gen)
{
    if (gen.family != Family::F2 || gen.indices.size() != 5)
        throw Error("PreconditionViolation", "expected an F2 tuple (k,l,m,n,s), got " + to_string(gen));
    std::array<int, 5> idx{};
    for (int i = 0; i < 5; ++i) {
        if (gen.indices[i] < 1) throw Error("PreconditionViolation", "tuple indices must be >= 1");
        idx[i] = gen.indices[i];
    }
    return idx;
}

// Parlett-Reinsch balancing by powers of two.
void balance(Eigen::MatrixXcd& A)
{
    const int n = static_cast<int>(A.rows());
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(A(j, i));
                r += std::abs(A(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while (c >= r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if ((c + r) < 0.95 * s) {
                done = false;
                A.row(i) /= f;
                A.col(i) *= f;
            }
        }
    }
}

}  // namespace

std::string to_string(const GeneratorTuple& gen)
{
    std::ostringstream os;
    os << (gen.family == Family::F1 ? "F1(" : "F2(");
    for (std::size_t i = 0; i < gen.indices.size(); ++i) os << (i ? "," : "") << gen.indices[i];
    os << ')';
    return os.str();
}

bool operator==(const GeneratorTuple& x, const GeneratorTuple& y)
{
    return x.family == y.family && x.indices == y.indices;
}

long long alpha_quadratic(int k, int l, int m, int n, int s, AlphaForm form)
{
    if (k < 1 || l < 1 || m < 1 || n < 1 || s < 1)
        throw Error("PreconditionViolation", "alpha indices must be >= 1");
    const long long K = k, Lv = l, M = m, N = n, S = s;
    const long long ls = form == AlphaForm::Printed ? 3 : 4;
    return 5 * K * K + 8 * Lv * Lv + 9 * M * M + 8 * N * N + 5 * S * S + 8 * K * Lv + 6 * K * M +
           4 * K * N + 2 * K * S + 12 * M * Lv + 8 * Lv * N + ls * Lv * S + 12 * M * N + 6 * M * S +
           8 * N * S;
}

double f1_length(const ValidatedParams& p, int k)
{
    return 2.0 * M_PI * k * std::sqrt(p.one_minus_a2b() / p.r());
}

double f2_length(const ValidatedParams& p, const std::array<int, 5>& idx, AlphaForm form)
{
    const double al = static_cast<double>(alpha_quadratic(idx[0], idx[1], idx[2], idx[3], idx[4], form));
    return M_PI * std::sqrt(p.one_minus_a2b() * al / (3.0 * p.r()));
}

CriticalLength verify_tuple(const ValidatedParams& p, const GeneratorTuple& gen, AlphaForm form)
{
    const auto idx = f2_indices(gen);
    const double w = p.one_minus_a2b(), r = p.r(), c = p.c();
    CriticalLength cl;
    cl.gens = {gen};
    cl.value = f2_length(p, idx, form);
    const auto q = root_offsets(idx);
    const double unit = M_PI / (3.0 * cl.value);
    for (int j = 0; j < 6; ++j) cl.xi[j] = q[j] * unit;
    cl.xi0 = cl.xi[0];

    // elementary symmetric functions; e1 from the integer offsets
    std::array<double, 7> e{};
    e[0] = 1.0;
    for (double x : cl.xi)
        for (int j = 6; j >= 1; --j) e[j] += e[j - 1] * x;
    long long qsum = 0;
    for (long long v : q) qsum += v;
    e[1] = static_cast<double>(qsum) * unit;

    cl.p = std::sqrt(cd(w * e[6] / c, 0.0));
    cl.p_alt = -cl.p;
    auto fill = [&](cd pv, Residuals& res) {
        res[0] = e[1];
        res[1] = e[2] + r / w;
        res[2] = e[3] - (c + 1.0) * pv / w;
        res[3] = e[4];
        res[4] = e[5] + r * pv / w;
        res[5] = e[6] - c * pv * pv / w;
    };
    fill(cl.p, cl.residuals);
    fill(cl.p_alt, cl.residuals_alt);
    return cl;
}

CriticalSet enumerate_critical_lengths(const ValidatedParams& p, double Lmax, AlphaForm form)
{
    if (!(Lmax > 0.0)) throw Error("PreconditionViolation", "Lmax must be positive");
    std::vector<CriticalLength> all;
    for (int k = 1; f1_length(p, k) <= Lmax; ++k) {
        CriticalLength cl;
        cl.value = f1_length(p, k);
        cl.gens = {GeneratorTuple{Family::F1, {k}}};
        all.push_back(cl);
    }
    const double bound = 3.0 * p.r() * Lmax * Lmax / (p.one_minus_a2b() * M_PI * M_PI);
    auto al = [&](int k, int l, int m, int n, int s) {
        return static_cast<double>(alpha_quadratic(k, l, m, n, s, form));
    };
    for (int k = 1; al(k, 1, 1, 1, 1) <= bound; ++k)
        for (int l = 1; al(k, l, 1, 1, 1) <= bound; ++l)
            for (int m = 1; al(k, l, m, 1, 1) <= bound; ++m)
                for (int n = 1; al(k, l, m, n, 1) <= bound; ++n)
                    for (int s = 1; al(k, l, m, n, s) <= bound; ++s) {
                        CriticalLength cl = verify_tuple(p, GeneratorTuple{Family::F2, {k, l, m, n, s}}, form);
                        if (cl.value <= Lmax) all.push_back(cl);
                    }
    std::stable_sort(all.begin(), all.end(),
                     [](const CriticalLength& x, const CriticalLength& y) { return x.value < y.value; });
    CriticalSet set;
    for (auto& cl : all) {
        if (!set.lengths.empty()) {
            CriticalLength& last = set.lengths.back();
            if (std::abs(cl.value - last.value) <= 1e-9 * last.value) {
                last.gens.insert(last.gens.end(), cl.gens.begin(), cl.gens.end());
                continue;
            }
        }
        set.lengths.push_back(std::move(cl));
    }
    return set;
}

std::optional<GeneratorTuple> is_critical(const ValidatedParams& p, double L, double rel_tol, AlphaForm form)
{
    if (!(L > 0.0)) throw Error("PreconditionViolation", "L must be positive");
    if (!(rel_tol >= 0.0 && rel_tol < 1.0)) throw Error("PreconditionViolation", "rel_tol must lie in [0,1)");
    const CriticalSet set = enumerate_critical_lengths(p, L / (1.0 - rel_tol) * (1.0 + 1e-12), form);
    const CriticalLength* best = nullptr;
    for (const auto& cl : set.lengths)
        if (!best || std::abs(cl.value - L) < std::abs(best->value - L)) best = &cl;
    if (best && std::abs(best->value - L) <= rel_tol * best->value) return best->gens.front();
    return std::nullopt;
}

std::array<cd, 6> polynomial_roots(const ValidatedParams& p, cd pval)
{
    const double w = p.one_minus_a2b(), r = p.r(), c = p.c();
    // monic coefficients c0..c5 of P / (1-a^2b)
    const std::array<cd, 6> coef = {c * pval * pval / w, r * pval / w, cd(0.0),
                                    -(c + 1.0) * pval / w, -r / w, cd(0.0)};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(6, 6);
    for (int i = 1; i < 6; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < 6; ++i) C(i, 5) = -coef[i];
    balance(C);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    if (es.info() != Eigen::Success) throw Error("RootConditioning", "companion eigensolve failed");
    std::array<cd, 6> roots;
    for (int i = 0; i < 6; ++i) {
        const cd z = es.eigenvalues()[i];
        cd val = 1.0;
        double mag = 1.0;
        for (int j = 5; j >= 0; --j) val = val * z + coef[j];
        for (int j = 5; j >= 0; --j) mag = mag * std::abs(z) + std::abs(coef[j]);
        if (std::abs(val) > 1e-8 * mag)
            throw Error("RootConditioning", "root residual " + std::to_string(std::abs(val) / mag));
        roots[i] = z;
    }
    std::sort(roots.begin(), roots.end(), [](cd x, cd y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return roots;
}

bool root_sharing_oracle(const ValidatedParams& p, cd pval, double L, double tol)
{
    if (!(L > 0.0)) throw Error("PreconditionViolation", "L must be positive");
    std::vector<cd> roots;
    if (pval == cd(0.0)) {
        const double kappa = std::sqrt(p.r() / p.one_minus_a2b());
        roots = {cd(0.0), cd(kappa), cd(-kappa)};
    } else {
        const auto all = polynomial_roots(p, pval);
        roots.assign(all.begin(), all.end());
    }
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <= tol) return false;
    const cd ref = std::exp(cd(0.0, -L) * roots[0]);
    for (const cd& z : roots)
        if (std::abs(std::exp(cd(0.0, -L) * z) - ref) > tol) return false;
    return true;
}

std::vector<ScanPoint> ode_kernel_scan(const ValidatedParams& p, double L, const std::vector<cd>& lambdas,
                                       KernelVariant variant, int nx)
{
    if (nx < 64) throw Error("PreconditionViolation", "ode_kernel_scan needs nx >= 64");
    if (!(L > 0.0)) throw Error("PreconditionViolation", "L must be positive");
    const double a = p.a(), b = p.b(), c = p.c(), r = p.r();
    const double h = L / nx;
    const int nu = 2 * (nx + 1);
    auto col = [](int j, int comp) { return 2 * j + comp; };

    const std::vector<int> centered{-2, -1, 0, 1, 2}, skewed{-3, -2, -1, 0, 1};
    const auto w3c = fd_weights(centered, 3, h), w3s = fd_weights(skewed, 3, h);
    const auto w1 = fd_weights({-1, 0, 1}, 1, h);
    const auto d1l = fd_weights({0, 1, 2}, 1, h), d1r = fd_weights({-2, -1, 0}, 1, h);
    const auto d2l = fd_weights({0, 1, 2, 3}, 2, h), d2r = fd_weights({-3, -2, -1, 0}, 2, h);

    // rows independent of lambda, plus the diagonal lambda pattern
    struct Row {
        std::vector<std::pair<int, double>> taps;
        int lambda_col = -1;
    };
    std::vector<Row> rows;
    for (int j = 2; j <= nx - 1; ++j) {
        const auto& offs = j == nx - 1 ? skewed : centered;
        const auto& w3 = j == nx - 1 ? w3s : w3c;
        Row ru, rv;
        ru.lambda_col = col(j, 0);
        rv.lambda_col = col(j, 1);
        for (std::size_t q = 0; q < offs.size(); ++q) {
            ru.taps.push_back({col(j + offs[q], 0), w3[q]});
            ru.taps.push_back({col(j + offs[q], 1), a * b / c * w3[q]});
            rv.taps.push_back({col(j + offs[q], 0), a * w3[q]});
            rv.taps.push_back({col(j + offs[q], 1), w3[q] / c});
        }
        for (int q = 0; q < 3; ++q) rv.taps.push_back({col(j + q - 1, 1), r / c * w1[q]});
        rows.push_back(ru);
        rows.push_back(rv);
    }
    auto end_rows = [&](bool left) {
        const int e = left ? 0 : nx;
        const auto& d1 = left ? d1l : d1r;
        const auto& d2 = left ? d2l : d2r;
        auto node1 = [&](int q) { return left ? q : nx - 2 + q; };
        auto node2 = [&](int q) { return left ? q : nx - 3 + q; };
        Row mix0, dphi, dpsi, mix2a, mix2b;
        mix0.taps = {{col(e, 0), a}, {col(e, 1), 1.0 / c}};
        for (int q = 0; q < 3; ++q) {
            dphi.taps.push_back({col(node1(q), 0), d1[q]});
            dpsi.taps.push_back({col(node1(q), 1), d1[q]});
        }
        for (int q = 0; q < 4; ++q) {
            mix2a.taps.push_back({col(node2(q), 0), d2[q]});
            mix2a.taps.push_back({col(node2(q), 1), a * b / c * d2[q]});
            mix2b.taps.push_back({col(node2(q), 0), a * d2[q]});
            mix2b.taps.push_back({col(node2(q), 1), d2[q] / c});
        }
        mix2b.taps.push_back({col(e, 1), r / c});
        for (auto* rw : {&mix0, &dphi, &dpsi, &mix2a, &mix2b}) rows.push_back(*rw);
    };
    if (variant == KernelVariant::E18) {
        end_rows(true);
        end_rows(false);
    } else {
        for (int comp = 0; comp < 2; ++comp) {
            Row v0, v1, v2;
            v0.taps = {{col(0, comp), 1.0}};
            for (int q = 0; q < 3; ++q) v1.taps.push_back({col(q, comp), d1l[q]});
            for (int q = 0; q < 4; ++q) v2.taps.push_back({col(q, comp), d2l[q]});
            rows.push_back(v0);
            rows.push_back(v1);
            rows.push_back(v2);
        }
    }

    std::vector<ScanPoint> out;
    out.reserve(lambdas.size());
    const int nr = static_cast<int>(rows.size());
    for (const cd& lam : lambdas) {
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nr, nu);
        for (int i = 0; i < nr; ++i) {
            for (const auto& [cidx, wv] : rows[i].taps) A(i, cidx) += wv;
            if (rows[i].lambda_col >= 0) A(i, rows[i].lambda_col) += lam;
            const double nrm = A.row(i).norm();
            if (nrm > 0.0) A.row(i) /= nrm;
        }
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
        out.push_back({lam, svd.singularValues().minCoeff()});
    }
    return out;
}

}  // namespace gg
