#include "gg/hum.hpp"

#include "gg/critical.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gg {

LawKind parse_law(const std::string& name)
{
    if (name == "bessel") return LawKind::Bessel;
    if (name == "riesz") return LawKind::Riesz;
    throw Error("ConfigError", "unknown control law '" + name + "' (expected bessel or riesz)");
}

const char* law_name(LawKind k) { return k == LawKind::Bessel ? "bessel" : "riesz"; }

namespace {

// Smallest eigenvalue of the Lanczos tridiagonal implied by CG coefficients.
double cg_min_eig(const std::vector<double>& alphas, const std::vector<double>& betas)
{
    const int k = static_cast<int>(alphas.size());
    if (k == 0) return 0.0;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
        T(j, j) = 1.0 / alphas[j] + (j > 0 ? betas[j - 1] / alphas[j - 1] : 0.0);
        if (j + 1 < k) T(j, j + 1) = T(j + 1, j) = std::sqrt(betas[j]) / alphas[j];
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues()[0];
}

TimeSeries lawed(const std::vector<double>& v, double T, const LawOptions& law)
{
    TimeSeries ts{v, T};
    if (law.kind == LawKind::Riesz) return frac_neg_laplacian(ts, 1.0 / 3.0);
    return bessel_potential(ts, 1.0 / 3.0);
}

}  // namespace

BoundaryData apply_law(const ControlConfig& cfg, const BoundaryData& obs, const Grid& g, const LawOptions& law)
{
    BoundaryData out = BoundaryData::zeros(g);
    for (int k = 0; k < kChannels; ++k) {
        if (!cfg.active[k]) continue;
        if (obs[k].size() != static_cast<std::size_t>(g.nt + 1))
            throw Error("ShapeMismatch", std::string("observation channel ") + channel_name(k));
        out[k] = is_fractional(k) ? lawed(obs[k], g.T, law).values : obs[k];
    }
    return out;
}

BoundaryData synthesize_controls(const ControlConfig& cfg, const AdjointTraces& traces,
                                 const ValidatedParams& p, const Grid& g, const LawOptions& law)
{
    return apply_law(cfg, observations(traces, p), g, law);
}

double observation_energy(const ControlConfig& cfg, const BoundaryData& obs, const Grid& g, const LawOptions& law)
{
    const BoundaryData ctl = apply_law(cfg, obs, g, law);
    return boundary_pairing(cfg, ctl, obs, g);
}

Gramian::Gramian(const ValidatedParams& p, const Grid& g, const ControlConfig& cfg, const LawOptions& law)
    : map_(p, g, cfg), law_(law)
{
}

BoundaryData Gramian::controls(const StatePair& phi1) const
{
    return apply_law(config(), map_.transpose(phi1), grid(), law_);
}

StatePair Gramian::apply(const StatePair& phi1) const { return map_.apply(controls(phi1)); }

double Gramian::form(const StatePair& phi1) const
{
    return observation_energy(config(), map_.transpose(phi1), grid(), law_);
}

StatePair gramian_apply(const ControlConfig& cfg, const StatePair& phi1, const ValidatedParams& p,
                        const Grid& g, const LawOptions& law)
{
    return Gramian(p, g, cfg, law).apply(phi1);
}

FinalDataBasis FinalDataBasis::legendre(const Grid& g, int degree, const Eigen::MatrixXd* constraints)
{
    if (degree < 1) throw Error("PreconditionViolation", "basis degree must be >= 1");
    const int n = g.nodes();
    Eigen::MatrixXd P0 = Eigen::MatrixXd::Zero(2 * n, 2 * degree);
    for (int j = 0; j < n; ++j) {
        const double z = 2.0 * g.x(j) / g.L - 1.0;
        for (int k = 0; k < degree; ++k) {
            const double val = std::legendre(k, std::clamp(z, -1.0, 1.0));
            P0(j, k) = val;
            P0(n + j, degree + k) = val;
        }
    }
    if (constraints) {
        const Eigen::MatrixXd C = (*constraints) * P0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > 1e-12 * sv[0]) ++rank;
        P0 = P0 * svd.matrixV().rightCols(P0.cols() - rank);
    }
    FinalDataBasis B;
    const auto w = space_weights(g);
    B.w_.resize(2 * n);
    for (int j = 0; j < n; ++j) B.w_[j] = B.w_[n + j] = w[j];
    const Eigen::VectorXd sw = B.w_.cwiseSqrt();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * P0);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * n, P0.cols());
    B.P_ = sw.cwiseInverse().asDiagonal() * Q;
    return B;
}

StatePair FinalDataBasis::expand(const Eigen::VectorXd& coeff) const
{
    return StatePair::from_stacked(P_ * coeff);
}

Eigen::VectorXd FinalDataBasis::project(const StatePair& s) const
{
    return P_.transpose() * w_.cwiseProduct(s.stacked());
}

DualityReport duality_report(const ControlConfig& cfg, const BoundaryData& bd, const StatePair& phi1,
                             const ValidatedParams& p, const Grid& g)
{
    const BoundaryData masked = apply_mask(cfg, bd);
    const StatePair yT = solve_linear_forward(p, g, StatePair::zeros(g), masked).final_state();
    const AdjointSolution ad = solve_adjoint_backward(p, g, phi1);
    DualityReport rep;
    rep.state_pairing = l2_inner(yT, phi1, g);
    rep.boundary_pairing = boundary_pairing(cfg, masked, observations(ad.traces, p), g);
    rep.gap = std::abs(rep.state_pairing - rep.boundary_pairing);
    rep.scale = std::sqrt(l2_inner(yT, yT, g) * l2_inner(phi1, phi1, g));
    return rep;
}

double duality_gap(const ControlConfig& cfg, const BoundaryData& bd, const StatePair& phi1,
                   const ValidatedParams& p, const Grid& g)
{
    return duality_report(cfg, bd, phi1, p, g).gap;
}

double relative_error(const StatePair& y, const StatePair& target, const ValidatedParams& p, const Grid& g)
{
    const double e = x_norm(y - target, p, g);
    const double t = x_norm(target, p, g);
    return t > 0.0 ? e / t : e;
}

HumContext::HumContext(const ControlProblem& prob, const HumOptions& opt)
    : prob_(prob), opt_(opt), gram_(prob.params, prob.grid, prob.cfg, opt.law),
      basis_(FinalDataBasis::legendre(prob.grid, opt.degree))
{
    check_shape(prob.init, prob.grid);
    check_shape(prob.target, prob.grid);
    free_final_ = forward_final_state(gram_.map().scheme(), prob.init, BoundaryData::zeros(prob.grid));
}

HumSolution HumContext::solve_controls(const StatePair& target, double tol, int maxit) const
{
    const Grid& g = prob_.grid;
    HumSolution sol;
    if (prob_.cfg.id == ConfigId::C1 || prob_.cfg.id == ConfigId::C2) {
        if (auto gen = is_critical(prob_.params, g.L, opt_.critical_warn_tol)) {
            sol.warnings.push_back("L=" + std::to_string(g.L) + " lies within " +
                                   std::to_string(opt_.critical_warn_tol) +
                                   " of the critical length generated by " + to_string(*gen));
        }
    }

    const Eigen::VectorXd b = basis_.project(target - free_final_);
    const int m = basis_.size();
    auto A = [&](const Eigen::VectorXd& xi) { return basis_.project(gram_.apply(basis_.expand(xi))); };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(m), r = b, d = r;
    double rr = r.squaredNorm();
    const double b0 = std::sqrt(rr);
    std::vector<double> alphas, betas, best;
    sol.converged = b0 == 0.0;
    for (int it = 1; it <= maxit && !sol.converged; ++it) {
        const Eigen::VectorXd Ad = A(d);
        const double dAd = d.dot(Ad);
        if (!(dAd > 0.0))
            throw Error("CgStagnation", "Gramian not positive along a search direction (d^T A d = " +
                                            std::to_string(dAd) + ")");
        const double alpha = rr / dAd;
        x += alpha * d;
        r -= alpha * Ad;
        const double rn = r.squaredNorm();
        const double rel = std::sqrt(rn) / b0;
        sol.residual_history.push_back(rel);
        sol.cg_iterations = it;
        alphas.push_back(alpha);
        const double beta = rn / rr;
        betas.push_back(beta);
        if (rel <= tol) {
            sol.converged = true;
            break;
        }
        best.push_back(std::min(rel, best.empty() ? rel : best.back()));
        const int w = opt_.stagnation_window;
        if (it > w && best.back() > 0.5 * best[it - 1 - w])
            throw Error("CgStagnation", "residual plateau at " + std::to_string(rel) + " after " +
                                            std::to_string(it) + " iterations, min eigenvalue estimate " +
                                            std::to_string(cg_min_eig(alphas, betas)));
        d = r + beta * d;
        rr = rn;
    }

    sol.gramian_min_eig_estimate = cg_min_eig(alphas, betas);
    sol.final_data = basis_.expand(x);
    sol.controls = gram_.controls(sol.final_data);
    return sol;
}

HumSolution hum_solve(const ControlProblem& prob, double tol, int maxit, const HumOptions& opt)
{
    HumContext ctx(prob, opt);
    HumSolution sol = ctx.solve_controls(prob.target, tol, maxit);
    sol.trajectory = solve_linear_forward(prob.params, prob.grid, prob.init, sol.controls);
    sol.final_error = relative_error(sol.trajectory.final_state(), prob.target, prob.params, prob.grid);
    return sol;
}

double embedding_constant() { return 1.0; }

OneControlCert one_control_certificate(const ValidatedParams& p, const Grid& g, std::optional<double> C_T,
                                       int samples, std::optional<double> beta, std::uint64_t seed)
{
    OneControlCert cert;
    cert.C_T = C_T ? *C_T : hidden_regularity_estimate(p, g, samples, seed).C_T;
    cert.beta = beta ? *beta : embedding_constant();
    cert.condition_value = cert.beta * cert.C_T / g.T * (g.L + p.r() / p.c());
    const double a2b = p.a() * p.a() * p.b();
    if (cert.condition_value < 1.0 && a2b > 0.0) cert.K = 1.0 / (a2b * (1.0 - cert.condition_value));
    return cert;
}

HumSolution nonlinear_control(const ControlProblem& prob, double delta, double tol, int maxit_outer,
                              const HumOptions& opt, const NonlinearOptions& nl)
{
    const ValidatedParams& p = prob.params;
    const Grid& g = prob.grid;
    const double size = x_norm(prob.init, p, g) + x_norm(prob.target, p, g);
    if (size > delta * (1.0 + 1e-12))
        throw Error("PreconditionViolation", "|init|_X + |target|_X = " + std::to_string(size) +
                                                 " exceeds delta = " + std::to_string(delta));
    HumContext ctx(prob, opt);
    StatePair corrected = prob.target;
    std::vector<double> drifts, errors;
    double prev = std::numeric_limits<double>::infinity();
    int rising = 0;
    HumSolution sol;
    for (int k = 0; k < maxit_outer; ++k) {
        sol = ctx.solve_controls(corrected, 1e-8, 200);
        sol.trajectory = solve_nonlinear_forward(p, g, prob.init, sol.controls, nl);
        const StatePair lin = forward_final_state(ctx.gramian().map().scheme(), prob.init, sol.controls);
        const StatePair drift = sol.trajectory.final_state() - lin;
        drifts.push_back(x_norm(drift, p, g));
        const double err = relative_error(sol.trajectory.final_state(), prob.target, p, g);
        errors.push_back(err);
        sol.final_error = err;
        sol.outer_iterations = k + 1;
        sol.drift_history = drifts;
        sol.error_history = errors;
        sol.converged = err <= tol;
        if (sol.converged) return sol;
        rising = err >= prev ? rising + 1 : 0;
        if (rising >= 5)
            throw Error("OuterDivergence", "final error has not contracted for 5 outer iterations (last " +
                                               std::to_string(err) + ")");
        prev = err;
        corrected = prob.target - drift;
    }
    return sol;
}

double observability_form(const ControlConfig& cfg, const StatePair& phi1, const ValidatedParams& p,
                          const Grid& g, const LawOptions& law)
{
    const AdjointSolution ad = solve_adjoint_backward(p, g, phi1);
    return observation_energy(cfg, observations(ad.traces, p), g, law);
}

double observability_ratio(const ControlConfig& cfg, const ValidatedParams& p, const Grid& g, int samples,
                           std::uint64_t seed, int degree, const LawOptions& law)
{
    if (samples < 1) throw Error("PreconditionViolation", "samples must be >= 1");
    const Eigen::MatrixXd B = adjoint_boundary_matrix(p, g);
    const FinalDataBasis basis = FinalDataBasis::legendre(g, degree, &B);
    const AdjointScheme as(p, g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd xi(basis.size());
        for (int i = 0; i < xi.size(); ++i) xi[i] = nd(rng);
        const StatePair phi = basis.expand(xi);
        const double nrm = x_norm(phi, p, g);
        const double q = observation_energy(cfg, observations(adjoint_traces(as, phi), p), g, law);
        best = std::min(best, q / (nrm * nrm));
    }
    return best;
}

LanczosResult lanczos(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, int dim, int steps,
                      std::uint64_t seed)
{
    steps = std::min(steps, dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd V(dim, steps);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = nd(rng);
    v.normalize();
    std::vector<double> al, be;
    int m = 0;
    for (; m < steps; ++m) {
        V.col(m) = v;
        Eigen::VectorXd w = op(v);
        al.push_back(v.dot(w));
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j <= m; ++j) w -= V.col(j).dot(w) * V.col(j);
        const double nb = w.norm();
        if (m + 1 == steps || nb <= 1e-14 * std::abs(al.back()) || nb == 0.0) {
            ++m;
            break;
        }
        be.push_back(nb);
        v = w / nb;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        T(j, j) = al[j];
        if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = be[j];
    }
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues();
    LanczosResult res;
    res.steps = m;
    res.ritz.assign(ev.data(), ev.data() + ev.size());
    return res;
}

LanczosResult gramian_lanczos(const Gramian& gram, const FinalDataBasis& basis, int steps, std::uint64_t seed)
{
    auto op = [&](const Eigen::VectorXd& xi) { return basis.project(gram.apply(basis.expand(xi))); };
    return lanczos(op, basis.size(), steps, seed);
}

double observability_lanczos(const ControlConfig& cfg, const ValidatedParams& p, const Grid& g, int degree,
                             const LawOptions& law)
{
    const Eigen::MatrixXd B = adjoint_boundary_matrix(p, g);
    const FinalDataBasis basis = FinalDataBasis::legendre(g, degree, &B);
    const AdjointScheme as(p, g);
    const int m = basis.size();
    std::vector<BoundaryData> obs(m);
    for (int i = 0; i < m; ++i)
        obs[i] = observations(adjoint_traces(as, basis.expand(Eigen::VectorXd::Unit(m, i))), p);
    auto op = [&](const Eigen::VectorXd& c) {
        BoundaryData sum = BoundaryData::zeros(g);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < kChannels; ++k)
                if (cfg.active[k])
                    for (int n = 0; n <= g.nt; ++n) sum[k][n] += c[i] * obs[i][k][n];
        const BoundaryData ctl = apply_law(cfg, sum, g, law);
        Eigen::VectorXd out(m);
        for (int i = 0; i < m; ++i) out[i] = boundary_pairing(cfg, ctl, obs[i], g);
        return out;
    };
    return lanczos(op, m, m).ritz.front();
}

}  // namespace gg
