#include "gg/model.hpp"

#include <cmath>
#include <sstream>

namespace gg {

Eigen::Matrix2d ValidatedParams::dispersion() const
{
    Eigen::Matrix2d A;
    A << 1.0, p_.a, p_.a * p_.b / p_.c, 1.0 / p_.c;
    return A;
}

ValidatedParams validate_params(const SystemParams& p)
{
    std::vector<std::string> failed;
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(p.a) || bad(p.a1) || bad(p.a2) || bad(p.b) || bad(p.c) || bad(p.r))
        failed.push_back("all coefficients must be finite");
    if (!(p.b > 0.0)) failed.push_back("b > 0 (b=" + std::to_string(p.b) + ")");
    if (!(p.c > 0.0)) failed.push_back("c > 0 (c=" + std::to_string(p.c) + ")");
    if (!(p.r > 0.0)) failed.push_back("r > 0 (r=" + std::to_string(p.r) + ")");
    double d = 1.0 - p.a * p.a * p.b;
    if (!(d > 0.0)) failed.push_back("1 - a^2 b > 0 (1 - a^2 b=" + std::to_string(d) + ")");
    if (!failed.empty()) {
        std::ostringstream os;
        for (std::size_t i = 0; i < failed.size(); ++i) os << (i ? "; " : "") << failed[i];
        throw Error("CoefficientViolation", os.str());
    }
    return ValidatedParams(p);
}

DiagonalForm diagonalize(const ValidatedParams& p)
{
    const double a = p.a(), b = p.b(), c = p.c();
    if (a == 0.0)
        throw Error("DegenerateDiagonalization", "a = 0 leaves the change of variables singular");
    const double s = 1.0 / c - 1.0;
    DiagonalForm d;
    d.lambda = std::sqrt(s * s + 4.0 * a * a * b / c);
    d.alpha_plus = -0.5 * (s + d.lambda);
    d.alpha_minus = -0.5 * (s - d.lambda);
    d.from_diag << 2.0 * a, 2.0 * a, s + d.lambda, s - d.lambda;
    d.to_diag = d.from_diag.inverse();
    return d;
}

Grid make_grid(double L, double T, int nx, int nt)
{
    if (!(L > 0.0) || !(T > 0.0) || nx < 8 || nt < 8 || !std::isfinite(L) || !std::isfinite(T))
        throw Error("GridViolation", "need L > 0, T > 0, nx >= 8, nt >= 8");
    return Grid{L, T, nx, nt};
}

StatePair StatePair::zeros(const Grid& g)
{
    return StatePair{std::vector<double>(g.nodes(), 0.0), std::vector<double>(g.nodes(), 0.0)};
}

StatePair StatePair::from_stacked(const Eigen::VectorXd& s)
{
    const Eigen::Index n = s.size() / 2;
    StatePair out;
    out.u.assign(s.data(), s.data() + n);
    out.v.assign(s.data() + n, s.data() + 2 * n);
    return out;
}

Eigen::VectorXd StatePair::stacked() const
{
    Eigen::VectorXd s(u.size() + v.size());
    for (std::size_t j = 0; j < u.size(); ++j) s[j] = u[j];
    for (std::size_t j = 0; j < v.size(); ++j) s[u.size() + j] = v[j];
    return s;
}

StatePair& StatePair::operator+=(const StatePair& o)
{
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += o.u[j];
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += o.v[j];
    return *this;
}

StatePair& StatePair::operator-=(const StatePair& o)
{
    for (std::size_t j = 0; j < u.size(); ++j) u[j] -= o.u[j];
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= o.v[j];
    return *this;
}

StatePair& StatePair::operator*=(double s)
{
    for (double& x : u) x *= s;
    for (double& x : v) x *= s;
    return *this;
}

StatePair operator+(StatePair a, const StatePair& b) { return a += b; }
StatePair operator-(StatePair a, const StatePair& b) { return a -= b; }
StatePair operator*(double s, StatePair a) { return a *= s; }

std::vector<double> space_weights(const Grid& g)
{
    std::vector<double> w(g.nodes(), g.dx());
    w.front() = w.back() = 0.5 * g.dx();
    return w;
}

std::vector<double> time_weights(const Grid& g)
{
    std::vector<double> w(g.nt + 1, g.dt());
    w.front() = w.back() = 0.5 * g.dt();
    return w;
}

void check_shape(const StatePair& s, const Grid& g)
{
    const std::size_t n = static_cast<std::size_t>(g.nodes());
    if (s.u.size() != n || s.v.size() != n)
        throw Error("ShapeMismatch", "state has " + std::to_string(s.u.size()) + "/" +
                                         std::to_string(s.v.size()) + " nodes, grid has " +
                                         std::to_string(n));
}

namespace {

double weighted(const StatePair& s1, const StatePair& s2, const Grid& g, double vweight)
{
    check_shape(s1, g);
    check_shape(s2, g);
    const auto w = space_weights(g);
    double su = 0.0, sv = 0.0;
    for (int j = 0; j < g.nodes(); ++j) {
        su += w[j] * s1.u[j] * s2.u[j];
        sv += w[j] * s1.v[j] * s2.v[j];
    }
    return su + vweight * sv;
}

}  // namespace

double x_inner(const StatePair& s1, const StatePair& s2, const ValidatedParams& p, const Grid& g)
{
    return weighted(s1, s2, g, p.b() / p.c());
}

double l2_inner(const StatePair& s1, const StatePair& s2, const Grid& g)
{
    return weighted(s1, s2, g, 1.0);
}

double x_norm(const StatePair& s, const ValidatedParams& p, const Grid& g)
{
    return std::sqrt(std::max(0.0, x_inner(s, s, p, g)));
}

double l2_norm(const StatePair& s, const Grid& g)
{
    return std::sqrt(std::max(0.0, l2_inner(s, s, g)));
}

}  // namespace gg
