#include "gg/evolution.hpp"

#include "gg/stencil.hpp"
#include "gg/timefrac.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gg {

namespace {

constexpr int kBand = 7;

struct Tap {
    int node;
    int comp;
    double w;
};

using Functional = std::vector<Tap>;

void check_series(const BoundaryData& bd, const Grid& g)
{
    for (int k = 0; k < kChannels; ++k)
        if (bd[k].size() != static_cast<std::size_t>(g.nt + 1))
            throw Error("ShapeMismatch", std::string("boundary channel ") + channel_name(k) +
                                             " has " + std::to_string(bd[k].size()) +
                                             " samples, expected " + std::to_string(g.nt + 1));
}

// The adjoint boundary relations in row order 0, 1, 2, 3, 2nx, 2nx+1.
std::array<Functional, 6> adjoint_functionals(const ValidatedParams& p, const Grid& g)
{
    const double a = p.a(), b = p.b(), c = p.c(), r = p.r(), h = g.dx();
    const int nx = g.nx;
    const auto d1l = fd_weights({0, 1, 2}, 1, h);
    const auto d2l = fd_weights({0, 1, 2, 3}, 2, h);
    const auto d2r = fd_weights({-3, -2, -1, 0}, 2, h);
    std::array<Functional, 6> f;
    for (int k = 0; k < 3; ++k) {
        f[0].push_back({k, 0, d1l[k]});
        f[1].push_back({k, 1, d1l[k]});
    }
    for (int k = 0; k < 4; ++k) {
        f[2].push_back({k, 0, d2l[k]});
        f[2].push_back({k, 1, a * b / c * d2l[k]});
        f[3].push_back({k, 0, a * d2l[k]});
        f[3].push_back({k, 1, d2l[k] / c});
        const int j = nx - 3 + k;
        f[4].push_back({j, 0, d2r[k]});
        f[4].push_back({j, 1, a * b / c * d2r[k]});
        f[5].push_back({j, 0, a * d2r[k]});
        f[5].push_back({j, 1, d2r[k] / c});
    }
    f[3].push_back({0, 1, r / c});
    f[5].push_back({nx, 1, r / c});
    return f;
}

}  // namespace

const char* channel_name(int k)
{
    static const char* names[kChannels] = {"h0", "h1", "h2", "g0", "g1", "g2"};
    return names[k];
}

BoundaryData BoundaryData::zeros(const Grid& g)
{
    BoundaryData bd;
    for (auto& c : bd.ch) c.assign(g.nt + 1, 0.0);
    return bd;
}

ControlConfig ControlConfig::make(ConfigId id)
{
    ControlConfig cfg;
    cfg.id = id;
    auto on = [&](std::initializer_list<int> ks) {
        for (int k : ks) cfg.active[k] = true;
    };
    switch (id) {
    case ConfigId::C1: on({H1, G0, G1, G2}); break;
    case ConfigId::C2: on({H0, H1, H2, G1}); break;
    case ConfigId::C3: on({H0, H1, G0, G1}); break;
    case ConfigId::C4: on({H1, H2, G1, G2}); break;
    case ConfigId::C5: on({H1}); break;
    case ConfigId::C6: on({G1}); break;
    }
    return cfg;
}

ControlConfig ControlConfig::parse(const std::string& name)
{
    if (name.size() == 2 && (name[0] == 'C' || name[0] == 'c') && name[1] >= '1' && name[1] <= '6')
        return make(static_cast<ConfigId>(name[1] - '0'));
    throw Error("ConfigError", "unknown control configuration '" + name + "'");
}

std::string ControlConfig::name() const
{
    return "C" + std::to_string(static_cast<int>(id));
}

BoundaryData apply_mask(const ControlConfig& cfg, BoundaryData bd)
{
    for (int k = 0; k < kChannels; ++k)
        if (!cfg.active[k]) std::fill(bd[k].begin(), bd[k].end(), 0.0);
    return bd;
}

BoundaryData observations(const AdjointTraces& tr, const ValidatedParams& p)
{
    const double a = p.a(), b = p.b(), c = p.c();
    const std::size_t n = tr.phi0.size();
    BoundaryData o;
    for (auto& ch : o.ch) ch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        o[H0][i] = tr.phi0[i] + a * b / c * tr.psi0[i];
        o[H1][i] = tr.dphiL[i] + a * b / c * tr.dpsiL[i];
        o[H2][i] = -(tr.phiL[i] + a * b / c * tr.psiL[i]);
        o[G0][i] = a * tr.phi0[i] + tr.psi0[i] / c;
        o[G1][i] = a * tr.dphiL[i] + tr.dpsiL[i] / c;
        o[G2][i] = -(a * tr.phiL[i] + tr.psiL[i] / c);
    }
    return o;
}

std::vector<double> interleave(const StatePair& s)
{
    std::vector<double> U(2 * s.u.size());
    for (std::size_t j = 0; j < s.u.size(); ++j) {
        U[2 * j] = s.u[j];
        U[2 * j + 1] = s.v[j];
    }
    return U;
}

StatePair deinterleave(const std::vector<double>& U)
{
    const std::size_t n = U.size() / 2;
    StatePair s{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        s.u[j] = U[2 * j];
        s.v[j] = U[2 * j + 1];
    }
    return s;
}

ForwardScheme::ForwardScheme(const ValidatedParams& p, const Grid& g)
    : p_(p), g_(g), ap_(2 * g.nodes(), kBand, kBand), am_(2 * g.nodes(), kBand, kBand),
      bc_mask_(2 * g.nodes(), 0)
{
    const int nx = g.nx;
    const double h = g.dx(), half = 0.5 * g.dt();
    const Eigen::Matrix2d A = p.dispersion();
    const auto w1 = fd_weights({-1, 0, 1}, 1, h);
    const std::vector<int> centered{-2, -1, 0, 1, 2}, skewed{-1, 0, 1, 2, 3};
    const auto w3c = fd_weights(centered, 3, h);
    const auto w3s = fd_weights(skewed, 3, h);

    auto add_k = [&](int row, int col, double kval) {
        ap_.add(row, col, half * kval);
        am_.add(row, col, -half * kval);
    };
    for (int j = 1; j <= nx - 2; ++j) {
        const auto& offs = j == 1 ? skewed : centered;
        const auto& w3 = j == 1 ? w3s : w3c;
        for (int ci = 0; ci < 2; ++ci) {
            const int row = 2 * j + ci;
            ap_.add(row, row, 1.0);
            am_.add(row, row, 1.0);
            for (int cj = 0; cj < 2; ++cj)
                for (std::size_t q = 0; q < offs.size(); ++q)
                    add_k(row, 2 * (j + offs[q]) + cj, A(ci, cj) * w3[q]);
            if (ci == 1)
                for (int q = 0; q < 3; ++q) add_k(row, 2 * (j + q - 1) + 1, p.r() / p.c() * w1[q]);
        }
    }

    const auto w2l = fd_weights({0, 1, 2, 3}, 2, h);
    const auto w1r = fd_weights({-2, -1, 0}, 1, h);
    const auto w2r = fd_weights({-3, -2, -1, 0}, 2, h);
    for (int ci = 0; ci < 2; ++ci) {
        const int r0 = ci, r1 = 2 * (nx - 1) + ci, r2 = 2 * nx + ci;
        for (int q = 0; q < 4; ++q) ap_.add(r0, 2 * q + ci, w2l[q]);
        for (int q = 0; q < 3; ++q) ap_.add(r1, 2 * (nx - 2 + q) + ci, w1r[q]);
        for (int q = 0; q < 4; ++q) ap_.add(r2, 2 * (nx - 3 + q) + ci, w2r[q]);
        bc_row_[ci == 0 ? H0 : G0] = r0;
        bc_row_[ci == 0 ? H1 : G1] = r1;
        bc_row_[ci == 0 ? H2 : G2] = r2;
        bc_mask_[r0] = bc_mask_[r1] = bc_mask_[r2] = 1;
    }
    lu_ = BandLU(ap_);
}

void ForwardScheme::explicit_part(const std::vector<double>& U, std::vector<double>& rhs) const
{
    rhs.resize(U.size());
    am_.multiply(U.data(), rhs.data());
}

void ForwardScheme::step(std::vector<double>& U, const std::array<double, kChannels>& bc,
                         const std::vector<double>* extra) const
{
    std::vector<double> rhs;
    explicit_part(U, rhs);
    if (extra)
        for (std::size_t i = 0; i < rhs.size(); ++i)
            if (!bc_mask_[i]) rhs[i] += (*extra)[i];
    for (int k = 0; k < kChannels; ++k) rhs[bc_row_[k]] = bc[k];
    lu_.solve(rhs.data());
    U.swap(rhs);
}

void ForwardScheme::nonlinear_terms(const std::vector<double>& U, const NonlinearOptions& opt,
                                    std::vector<double>& out) const
{
    const int nx = g_.nx;
    const double inv2h = 1.0 / (2.0 * g_.dx());
    const double a1 = p_.a1(), a2 = p_.a2(), b = p_.b(), c = p_.c();
    const double self = opt.self_terms ? 1.0 : 0.0;
    out.assign(U.size(), 0.0);
    for (int j = 1; j <= nx - 2; ++j) {
        const double um = U[2 * (j - 1)], up = U[2 * (j + 1)];
        const double vm = U[2 * (j - 1) + 1], vp = U[2 * (j + 1) + 1];
        const double duu = 0.5 * (up * up - um * um) * inv2h;  // (u^2/2)_x
        const double dvv = 0.5 * (vp * vp - vm * vm) * inv2h;  // (v^2/2)_x
        const double duv = (up * vp - um * vm) * inv2h;        // (uv)_x
        out[2 * j] = self * duu + a1 * dvv + a2 * duv;
        out[2 * j + 1] = (self * dvv + a2 * b * duu + a1 * b * duv) / c;
    }
}

AdjointScheme::AdjointScheme(const ValidatedParams& p, const Grid& g)
    : p_(p), g_(g), ap_(2 * g.nodes(), kBand, kBand), am_(2 * g.nodes(), kBand, kBand),
      bc_mask_(2 * g.nodes(), 0)
{
    const int nx = g.nx;
    const double h = g.dx(), half = 0.5 * g.dt();
    const Eigen::Matrix2d At = p.dispersion().transpose();
    const auto w1 = fd_weights({-1, 0, 1}, 1, h);
    const std::vector<int> centered{-2, -1, 0, 1, 2}, skewed{-3, -2, -1, 0, 1};
    const auto w3c = fd_weights(centered, 3, h);
    const auto w3s = fd_weights(skewed, 3, h);

    for (int j = 2; j <= nx - 1; ++j) {
        const auto& offs = j == nx - 1 ? skewed : centered;
        const auto& w3 = j == nx - 1 ? w3s : w3c;
        for (int ci = 0; ci < 2; ++ci) {
            const int row = 2 * j + ci;
            ap_.add(row, row, 1.0);
            am_.add(row, row, 1.0);
            auto add_k = [&](int col, double kval) {
                ap_.add(row, col, -half * kval);
                am_.add(row, col, half * kval);
            };
            for (int cj = 0; cj < 2; ++cj)
                for (std::size_t q = 0; q < offs.size(); ++q)
                    add_k(2 * (j + offs[q]) + cj, At(ci, cj) * w3[q]);
            if (ci == 1)
                for (int q = 0; q < 3; ++q) add_k(2 * (j + q - 1) + 1, p.r() / p.c() * w1[q]);
        }
    }
    const auto f = adjoint_functionals(p, g);
    const int rows[6] = {0, 1, 2, 3, 2 * nx, 2 * nx + 1};
    for (int i = 0; i < 6; ++i) {
        for (const Tap& t : f[i]) ap_.add(rows[i], 2 * t.node + t.comp, t.w);
        bc_mask_[rows[i]] = 1;
    }
    lu_ = BandLU(ap_);
}

void AdjointScheme::step(std::vector<double>& Phi) const
{
    std::vector<double> rhs(Phi.size());
    am_.multiply(Phi.data(), rhs.data());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        if (bc_mask_[i]) rhs[i] = 0.0;
    lu_.solve(rhs.data());
    Phi.swap(rhs);
}

void AdjointScheme::record(const std::vector<double>& Phi, int n, AdjointTraces& tr) const
{
    const int nx = g_.nx;
    const double h = g_.dx();
    static thread_local std::vector<double> d1r, d2l, d2r;
    static thread_local double cached_h = -1.0;
    if (cached_h != h) {
        d1r = fd_weights({-2, -1, 0}, 1, h);
        d2l = fd_weights({0, 1, 2, 3}, 2, h);
        d2r = fd_weights({-3, -2, -1, 0}, 2, h);
        cached_h = h;
    }
    auto at = [&](int j, int c) { return Phi[2 * j + c]; };
    tr.phi0[n] = at(0, 0);
    tr.psi0[n] = at(0, 1);
    tr.phiL[n] = at(nx, 0);
    tr.psiL[n] = at(nx, 1);
    double dp = 0, ds = 0, d2p0 = 0, d2s0 = 0, d2pL = 0, d2sL = 0;
    for (int q = 0; q < 3; ++q) {
        dp += d1r[q] * at(nx - 2 + q, 0);
        ds += d1r[q] * at(nx - 2 + q, 1);
    }
    for (int q = 0; q < 4; ++q) {
        d2p0 += d2l[q] * at(q, 0);
        d2s0 += d2l[q] * at(q, 1);
        d2pL += d2r[q] * at(nx - 3 + q, 0);
        d2sL += d2r[q] * at(nx - 3 + q, 1);
    }
    tr.dphiL[n] = dp;
    tr.dpsiL[n] = ds;
    tr.d2phi0[n] = d2p0;
    tr.d2psi0[n] = d2s0;
    tr.d2phiL[n] = d2pL;
    tr.d2psiL[n] = d2sL;
}

std::array<double, 6> AdjointScheme::boundary_residuals(const StatePair& s) const
{
    const auto f = adjoint_functionals(p_, g_);
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i)
        for (const Tap& t : f[i]) out[i] += t.w * (t.comp == 0 ? s.u[t.node] : s.v[t.node]);
    return out;
}

Eigen::MatrixXd adjoint_boundary_matrix(const ValidatedParams& p, const Grid& g)
{
    const auto f = adjoint_functionals(p, g);
    const int n = g.nodes();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 2 * n);
    for (int i = 0; i < 6; ++i)
        for (const Tap& t : f[i]) B(i, t.comp * n + t.node) += t.w;
    return B;
}

namespace {

std::array<double, kChannels> bc_at(const BoundaryData& bd, int n)
{
    std::array<double, kChannels> v{};
    for (int k = 0; k < kChannels; ++k) v[k] = bd[k][n];
    return v;
}

AdjointTraces empty_traces(int len)
{
    AdjointTraces tr;
    for (auto* v : {&tr.phi0, &tr.psi0, &tr.phiL, &tr.psiL, &tr.dphiL, &tr.dpsiL, &tr.d2phi0,
                    &tr.d2psi0, &tr.d2phiL, &tr.d2psiL})
        v->assign(len, 0.0);
    return tr;
}

}  // namespace

Trajectory solve_linear_forward(const ValidatedParams& p, const Grid& g, const StatePair& init,
                                const BoundaryData& bd, const SourcePair* src)
{
    check_shape(init, g);
    check_series(bd, g);
    ForwardScheme fs(p, g);
    Trajectory tr;
    tr.states.reserve(g.nt + 1);
    tr.states.push_back(init);
    tr.times.push_back(0.0);
    std::vector<double> U = interleave(init), extra;
    const double half = 0.5 * g.dt();
    for (int n = 0; n < g.nt; ++n) {
        const std::vector<double>* ex = nullptr;
        if (src) {
            extra.assign(U.size(), 0.0);
            for (int j = 0; j < g.nodes(); ++j) {
                extra[2 * j] = half * (src->f[n][j] + src->f[n + 1][j]);
                extra[2 * j + 1] = half * (src->s[n][j] + src->s[n + 1][j]);
            }
            ex = &extra;
        }
        fs.step(U, bc_at(bd, n + 1), ex);
        tr.states.push_back(deinterleave(U));
        tr.times.push_back(g.t(n + 1));
    }
    return tr;
}

Trajectory solve_nonlinear_forward(const ValidatedParams& p, const Grid& g, const StatePair& init,
                                   const BoundaryData& bd, const NonlinearOptions& opt)
{
    check_shape(init, g);
    check_series(bd, g);
    ForwardScheme fs(p, g);
    Trajectory tr;
    tr.states.reserve(g.nt + 1);
    tr.states.push_back(init);
    tr.times.push_back(0.0);
    std::vector<double> U = interleave(init), base, Nold, Nnew, rhs, next;
    const double half = 0.5 * g.dt();
    for (int n = 0; n < g.nt; ++n) {
        fs.explicit_part(U, base);
        fs.nonlinear_terms(U, opt, Nold);
        const auto bc = bc_at(bd, n + 1);
        next = U;
        bool converged = false;
        double change = 0.0;
        for (int it = 0; it < opt.picard_maxit; ++it) {
            fs.nonlinear_terms(next, opt, Nnew);
            rhs = base;
            for (std::size_t i = 0; i < rhs.size(); ++i)
                if (!fs.is_bc_row(static_cast<int>(i))) rhs[i] -= half * (Nold[i] + Nnew[i]);
            for (int k = 0; k < kChannels; ++k) rhs[fs.bc_row(k)] = bc[k];
            if (!std::all_of(rhs.begin(), rhs.end(), [](double v) { return std::isfinite(v); })) {
                change = INFINITY;
                break;
            }
            fs.lu().solve(rhs.data());
            change = 0.0;
            double scale = 0.0;
            for (std::size_t i = 0; i < rhs.size(); ++i) {
                change = std::max(change, std::abs(rhs[i] - next[i]));
                scale = std::max(scale, std::abs(rhs[i]));
            }
            if (!std::isfinite(change)) break;
            next.swap(rhs);
            if (change <= opt.picard_tol * std::max(scale, 1e-300) || change == 0.0) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw Error("PicardDivergence", "step " + std::to_string(n + 1) + ", last update " +
                                                std::to_string(change));
        U.swap(next);
        tr.states.push_back(deinterleave(U));
        tr.times.push_back(g.t(n + 1));
    }
    return tr;
}

AdjointSolution solve_adjoint_backward(const ValidatedParams& p, const Grid& g,
                                       const StatePair& final_data)
{
    check_shape(final_data, g);
    AdjointScheme as(p, g);
    AdjointSolution sol;
    sol.traces = empty_traces(g.nt + 1);
    sol.trajectory.states.resize(g.nt + 1);
    sol.trajectory.times.resize(g.nt + 1);
    std::vector<double> Phi = interleave(final_data);
    for (int n = g.nt; n >= 0; --n) {
        if (n < g.nt) as.step(Phi);
        as.record(Phi, n, sol.traces);
        sol.trajectory.states[n] = deinterleave(Phi);
        sol.trajectory.times[n] = g.t(n);
    }
    return sol;
}

StatePair forward_final_state(const ForwardScheme& fs, const StatePair& init, const BoundaryData& bd)
{
    const Grid& g = fs.grid();
    check_shape(init, g);
    check_series(bd, g);
    std::vector<double> U = interleave(init);
    for (int n = 0; n < g.nt; ++n) fs.step(U, bc_at(bd, n + 1));
    return deinterleave(U);
}

AdjointTraces adjoint_traces(const AdjointScheme& as, const StatePair& final_data)
{
    const Grid& g = as.grid();
    check_shape(final_data, g);
    AdjointTraces tr = empty_traces(g.nt + 1);
    std::vector<double> Phi = interleave(final_data);
    for (int n = g.nt; n >= 0; --n) {
        if (n < g.nt) as.step(Phi);
        as.record(Phi, n, tr);
    }
    return tr;
}

StatePair random_smooth_state(const ValidatedParams& p, const Grid& g, std::uint64_t seed, int modes)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> cu(modes), cv(modes);
    for (int k = 0; k < modes; ++k) {
        cu[k] = nd(rng);
        cv[k] = nd(rng);
    }
    StatePair s = StatePair::zeros(g);
    for (int j = 0; j < g.nodes(); ++j)
        for (int k = 0; k < modes; ++k) {
            const double ck = std::cos(k * M_PI * g.x(j) / g.L);
            s.u[j] += cu[k] * ck;
            s.v[j] += cv[k] * ck;
        }
    const double nrm = x_norm(s, p, g);
    if (nrm > 0.0) s *= 1.0 / nrm;
    return s;
}

BoundaryData random_smooth_boundary(const Grid& g, std::uint64_t seed, double amplitude, int modes)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    BoundaryData bd = BoundaryData::zeros(g);
    for (int k = 0; k < kChannels; ++k) {
        std::vector<double> coef(modes);
        for (double& v : coef) v = nd(rng);
        for (int n = 0; n <= g.nt; ++n) {
            const double s = g.t(n) / g.T;
            double v = 0.0;
            for (int m = 0; m < modes; ++m) v += coef[m] * std::cos(m * M_PI * s);
            bd[k][n] = amplitude * s * s * s * v;
        }
    }
    return bd;
}

HiddenRegularityEstimate hidden_regularity_estimate(const ValidatedParams& p, const Grid& g,
                                                    int samples, std::uint64_t seed)
{
    if (samples < 1) throw Error("PreconditionViolation", "samples must be >= 1");
    AdjointScheme as(p, g);
    HiddenRegularityEstimate est;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < samples; ++i) {
        const StatePair s = random_smooth_state(p, g, rng());
        const AdjointTraces tr = adjoint_traces(as, s);
        double m = 0.0;
        for (const auto* v : {&tr.phi0, &tr.psi0, &tr.phiL, &tr.psiL})
            m = std::max(m, sobolev_norm(TimeSeries{*v, g.T}, 1.0 / 3.0));
        for (const auto* v : {&tr.dphiL, &tr.dpsiL})
            m = std::max(m, sobolev_norm(TimeSeries{*v, g.T}, 0.0));
        est.C_T = std::max(est.C_T, m);
        est.running_max.push_back(est.C_T);
    }
    return est;
}

AdjointEnergyTerms adjoint_energy_terms(const ValidatedParams& p, const Grid& g,
                                        const AdjointSolution& sol)
{
    const double a = p.a(), b = p.b(), c = p.c(), r = p.r();
    const auto wc = time_weights(g);
    const AdjointTraces& tr = sol.traces;
    double bulk = 0.0;
    for (int n = 0; n <= g.nt; ++n) {
        const double e = x_norm(sol.trajectory.states[n], p, g);
        bulk += wc[n] * e * e;
    }
    auto sq = [&](auto f) {
        double s = 0.0;
        for (int n = 0; n <= g.nt; ++n) {
            const double v = f(n);
            s += wc[n] * v * v;
        }
        return s;
    };
    AdjointEnergyTerms out;
    const double e1 = x_norm(sol.trajectory.states.back(), p, g);
    out.lhs = e1 * e1;
    out.rhs = bulk / g.T + 0.5 * sq([&](int n) { return tr.dphiL[n]; }) +
              b / (2 * c) * sq([&](int n) { return tr.dpsiL[n]; }) +
              b * r / (c * c) * sq([&](int n) { return tr.psiL[n]; }) +
              0.5 * sq([&](int n) { return tr.dphiL[n] + a * b / c * tr.dpsiL[n]; }) +
              b / (2 * c) * sq([&](int n) { return a * tr.dphiL[n] + tr.dpsiL[n] / c; });
    return out;
}

DiscreteControlMap::DiscreteControlMap(const ValidatedParams& p, const Grid& g, const ControlConfig& cfg)
    : cfg_(cfg), fs_(p, g)
{
}

StatePair DiscreteControlMap::apply(const BoundaryData& bd) const
{
    return forward_final_state(fs_, StatePair::zeros(fs_.grid()), apply_mask(cfg_, bd));
}

BoundaryData DiscreteControlMap::transpose(const StatePair& y) const
{
    const Grid& g = fs_.grid();
    check_shape(y, g);
    const auto w = space_weights(g);
    const auto wc = time_weights(g);
    std::vector<double> z(2 * g.nodes()), tmp(z.size());
    for (int j = 0; j < g.nodes(); ++j) {
        z[2 * j] = w[j] * y.u[j];
        z[2 * j + 1] = w[j] * y.v[j];
    }
    fs_.lu().solve_transpose(z.data());
    BoundaryData obs = BoundaryData::zeros(g);
    for (int n = g.nt; n >= 1; --n) {
        for (int k = 0; k < kChannels; ++k)
            if (cfg_.active[k]) obs[k][n] = z[fs_.bc_row(k)] / wc[n];
        if (n > 1) {
            fs_.a_minus().multiply_transpose(z.data(), tmp.data());
            fs_.lu().solve_transpose(tmp.data());
            z.swap(tmp);
        }
    }
    return obs;
}

DiscreteControlMap build_discrete_adjoint(const ValidatedParams& p, const Grid& g,
                                          const ControlConfig& cfg)
{
    return DiscreteControlMap(p, g, cfg);
}

double boundary_pairing(const ControlConfig& cfg, const BoundaryData& bd, const BoundaryData& obs,
                        const Grid& g)
{
    const auto wc = time_weights(g);
    double s = 0.0;
    for (int k = 0; k < kChannels; ++k) {
        if (!cfg.active[k]) continue;
        for (int n = 0; n <= g.nt; ++n) s += wc[n] * bd[k][n] * obs[k][n];
    }
    return s;
}

}  // namespace gg
