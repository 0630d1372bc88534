#include "gg/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gg;

namespace {

SystemParams make(double a, double b, double c, double r)
{
    SystemParams p;
    p.a = a;
    p.b = b;
    p.c = c;
    p.r = r;
    return p;
}

std::string kind_of(const SystemParams& sp)
{
    try {
        validate_params(sp);
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

}  // namespace

TEST_CASE("validate_params accepts the default set")
{
    const auto p = validate_params(SystemParams{});
    CHECK(p.one_minus_a2b() == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("validate_params rejects each failed inequality")
{
    CHECK(kind_of(make(2.0, 1.0, 1.0, 1.0)) == "CoefficientViolation");
    CHECK(kind_of(make(0.5, 1.0, -1.0, 1.0)) == "CoefficientViolation");
    CHECK(kind_of(make(0.5, 0.0, 1.0, 1.0)) == "CoefficientViolation");
    CHECK(kind_of(make(0.5, 1.0, 1.0, -2.0)) == "CoefficientViolation");
    CHECK(kind_of(make(NAN, 1.0, 1.0, 1.0)) == "CoefficientViolation");

    try {
        validate_params(make(2.0, 1.0, -1.0, 0.0));
        FAIL("expected CoefficientViolation");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("c > 0") != std::string::npos);
        CHECK(msg.find("r > 0") != std::string::npos);
        CHECK(msg.find("1 - a^2 b") != std::string::npos);
    }
}

TEST_CASE("validate_params region matches the inequalities on random tuples")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const auto sp = make(U(rng), U(rng), U(rng), U(rng));
        const bool ok = sp.b > 0 && sp.c > 0 && sp.r > 0 && 1.0 - sp.a * sp.a * sp.b > 0;
        CHECK(kind_of(sp).empty() == ok);
    }
}

TEST_CASE("diagonalize at the default parameters")
{
    const auto d = diagonalize(validate_params(SystemParams{}));
    CHECK(d.lambda == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.alpha_plus == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(d.alpha_minus == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("diagonalize with c = 2")
{
    const auto d = diagonalize(validate_params(make(0.5, 1.0, 2.0, 1.0)));
    const double lam = std::sqrt(0.75);
    CHECK(d.lambda == doctest::Approx(lam).epsilon(1e-14));
    CHECK(d.alpha_plus == doctest::Approx(-0.5 * (-0.5 + lam)).epsilon(1e-14));
    CHECK(d.alpha_minus == doctest::Approx(-0.5 * (-0.5 - lam)).epsilon(1e-14));
}

TEST_CASE("diagonalize fails for a = 0")
{
    const auto p = validate_params(make(0.0, 1.0, 1.0, 1.0));
    try {
        diagonalize(p);
        FAIL("expected DegenerateDiagonalization");
    } catch (const Error& e) {
        CHECK(e.kind() == "DegenerateDiagonalization");
    }
}

TEST_CASE("diagonalize decouples the dispersion matrix")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.1, 3.0);
    for (int i = 0; i < 200; ++i) {
        auto sp = make(U(rng) - 1.55, U(rng), U(rng), U(rng));
        if (sp.a == 0.0 || 1.0 - sp.a * sp.a * sp.b <= 0.0) continue;
        const auto p = validate_params(sp);
        const auto d = diagonalize(p);
        CHECK((d.to_diag * d.from_diag - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        const Eigen::Matrix2d M = d.to_diag * p.dispersion() * d.from_diag;
        CHECK(std::abs(M(0, 1)) < 1e-10 * M.cwiseAbs().maxCoeff());
        CHECK(std::abs(M(1, 0)) < 1e-10 * M.cwiseAbs().maxCoeff());
        CHECK(d.lambda > std::abs(1.0 / sp.c - 1.0));
        CHECK(d.alpha_plus < 0.0);
        CHECK(d.alpha_minus > 0.0);
    }
}

TEST_CASE("make_grid validates its arguments")
{
    CHECK_THROWS_AS(make_grid(1.0, 1.0, 4, 100), Error);
    CHECK_THROWS_AS(make_grid(-1.0, 1.0, 100, 100), Error);
    CHECK_THROWS_AS(make_grid(1.0, 0.0, 100, 100), Error);
    const Grid g = make_grid(2.0, 1.0, 10, 20);
    CHECK(g.dx() == 0.2);
    CHECK(g.dt() == 0.05);
    CHECK(g.nodes() == 11);
}

TEST_CASE("inner products on constant states")
{
    const Grid g2 = make_grid(2.0, 1.0, 16, 16);
    StatePair s = StatePair::zeros(g2);
    const auto p = validate_params(SystemParams{});
    CHECK(x_inner(s, s, p, g2) == 0.0);
    CHECK(l2_inner(s, s, g2) == 0.0);

    std::fill(s.u.begin(), s.u.end(), 1.0);
    CHECK(x_inner(s, s, p, g2) == doctest::Approx(2.0).epsilon(1e-14));
    std::fill(s.v.begin(), s.v.end(), 1.0);
    CHECK(l2_inner(s, s, g2) == doctest::Approx(4.0).epsilon(1e-14));

    const Grid g3 = make_grid(3.0, 1.0, 12, 12);
    const auto p2 = validate_params(make(0.5, 1.0, 2.0, 1.0));
    StatePair w = StatePair::zeros(g3);
    std::fill(w.v.begin(), w.v.end(), 1.0);
    CHECK(x_inner(w, w, p2, g3) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("inner products are symmetric and positive")
{
    const Grid g = make_grid(M_PI, 1.0, 40, 40);
    const auto p = validate_params(SystemParams{});
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    for (int i = 0; i < 20; ++i) {
        StatePair s1 = StatePair::zeros(g), s2 = StatePair::zeros(g);
        for (int j = 0; j < g.nodes(); ++j) {
            s1.u[j] = N(rng), s1.v[j] = N(rng), s2.u[j] = N(rng), s2.v[j] = N(rng);
        }
        CHECK(x_inner(s1, s2, p, g) == doctest::Approx(x_inner(s2, s1, p, g)).epsilon(1e-14));
        CHECK(l2_inner(s1, s1, g) > 0.0);
        CHECK(x_norm(s1, p, g) > 0.0);
    }
}

TEST_CASE("shape mismatch is reported")
{
    const Grid g = make_grid(1.0, 1.0, 10, 10);
    StatePair s = StatePair::zeros(g);
    s.v.pop_back();
    const auto p = validate_params(SystemParams{});
    try {
        x_inner(s, s, p, g);
        FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == "ShapeMismatch");
    }
}

TEST_CASE("stacked layout round-trips")
{
    const Grid g = make_grid(1.0, 1.0, 10, 10);
    StatePair s = StatePair::zeros(g);
    for (int j = 0; j < g.nodes(); ++j) s.u[j] = j, s.v[j] = -j;
    const StatePair t = StatePair::from_stacked(s.stacked());
    CHECK(t.u == s.u);
    CHECK(t.v == s.v);
}
