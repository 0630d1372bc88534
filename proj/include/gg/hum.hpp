#pragma once

#include "gg/evolution.hpp"
#include "gg/timefrac.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gg {

// Multiplier used on the H^{-1/3} channels. Bessel is (1+w^2)^{1/3}, Riesz is
// |w|^{2/3}. The Riesz form annihilates time-constant traces.
enum class LawKind { Bessel, Riesz };

struct LawOptions {
    LawKind kind = LawKind::Bessel;
};

LawKind parse_law(const std::string& name);
const char* law_name(LawKind k);

// Applies the control law channel by channel to signed observations and masks
// inactive channels.
BoundaryData apply_law(const ControlConfig& cfg, const BoundaryData& obs, const Grid& g,
                       const LawOptions& law = {});

BoundaryData synthesize_controls(const ControlConfig& cfg, const AdjointTraces& traces,
                                 const ValidatedParams& p, const Grid& g, const LawOptions& law = {});

// sum over active channels of the time pairing of obs with law(obs)
double observation_energy(const ControlConfig& cfg, const BoundaryData& obs, const Grid& g,
                          const LawOptions& law = {});

// Phi1 -> final state of the forward scheme driven by the controls built from
// the exact transpose of the control-to-state map.
class Gramian {
public:
    Gramian(const ValidatedParams& p, const Grid& g, const ControlConfig& cfg, const LawOptions& law = {});

    const Grid& grid() const { return map_.scheme().grid(); }
    const ControlConfig& config() const { return map_.config(); }
    const DiscreteControlMap& map() const { return map_; }

    BoundaryData controls(const StatePair& phi1) const;
    StatePair apply(const StatePair& phi1) const;
    // <Gamma phi1, phi1> computed on the boundary side
    double form(const StatePair& phi1) const;

private:
    DiscreteControlMap map_;
    LawOptions law_;
};

StatePair gramian_apply(const ControlConfig& cfg, const StatePair& phi1, const ValidatedParams& p,
                        const Grid& g, const LawOptions& law = {});

// Final data spanned by Legendre polynomials of degree < degree in each
// component, orthonormal under l2_inner. Optional linear constraints (rows over
// the stacked [u; v] layout) restrict the span to their kernel.
class FinalDataBasis {
public:
    static FinalDataBasis legendre(const Grid& g, int degree,
                                   const Eigen::MatrixXd* constraints = nullptr);

    int size() const { return static_cast<int>(P_.cols()); }
    const Eigen::MatrixXd& matrix() const { return P_; }
    StatePair expand(const Eigen::VectorXd& coeff) const;
    // coefficients of the l2 projection
    Eigen::VectorXd project(const StatePair& s) const;

private:
    Eigen::MatrixXd P_;
    Eigen::VectorXd w_;
};

struct DualityReport {
    double state_pairing = 0.0;
    double boundary_pairing = 0.0;
    double gap = 0.0;
    // |y(T)| |phi1| in l2, the largest value either pairing can take
    double scale = 0.0;
};

DualityReport duality_report(const ControlConfig& cfg, const BoundaryData& bd, const StatePair& phi1,
                             const ValidatedParams& p, const Grid& g);
double duality_gap(const ControlConfig& cfg, const BoundaryData& bd, const StatePair& phi1,
                   const ValidatedParams& p, const Grid& g);

struct ControlProblem {
    ValidatedParams params;
    Grid grid;
    ControlConfig cfg;
    StatePair init;
    StatePair target;
};

struct HumOptions {
    int degree = 16;
    LawOptions law;
    // relative length of the critical-set warning for C1 and C2
    double critical_warn_tol = 1e-6;
    // iterations without halving the best residual that count as stagnation
    int stagnation_window = 25;
};

struct HumSolution {
    BoundaryData controls;
    Trajectory trajectory;
    int cg_iterations = 0;
    bool converged = false;
    double final_error = 0.0;
    double gramian_min_eig_estimate = 0.0;
    std::vector<double> residual_history;
    StatePair final_data;
    std::vector<std::string> warnings;
    // nonlinear loop only
    int outer_iterations = 0;
    std::vector<double> drift_history;
    std::vector<double> error_history;
};

// Relative X-norm distance of a state to the target (absolute if target = 0).
double relative_error(const StatePair& y, const StatePair& target, const ValidatedParams& p, const Grid& g);

// Reusable pieces of one HUM configuration: Gramian, final-data basis and
// free evolution.
class HumContext {
public:
    HumContext(const ControlProblem& prob, const HumOptions& opt = {});

    const ControlProblem& problem() const { return prob_; }
    const Gramian& gramian() const { return gram_; }
    const FinalDataBasis& basis() const { return basis_; }

    // controls steering init to the given state; fills everything except the
    // trajectory and final error
    HumSolution solve_controls(const StatePair& target, double tol, int maxit) const;

private:
    ControlProblem prob_;
    HumOptions opt_;
    Gramian gram_;
    FinalDataBasis basis_;
    StatePair free_final_;
};

HumSolution hum_solve(const ControlProblem& prob, double tol = 1e-8, int maxit = 200,
                      const HumOptions& opt = {});

struct OneControlCert {
    double C_T = 0.0;
    double beta = 1.0;
    double condition_value = 0.0;
    std::optional<double> K;
    bool passes() const { return condition_value < 1.0; }
};

// Embedding constant of H^{1/3}(0,T) into L2(0,T) for the (1+w^2)^{1/6}
// multiplier; a constant function attains it.
double embedding_constant();

OneControlCert one_control_certificate(const ValidatedParams& p, const Grid& g,
                                       std::optional<double> C_T, int samples,
                                       std::optional<double> beta = std::nullopt,
                                       std::uint64_t seed = 0);

HumSolution nonlinear_control(const ControlProblem& prob, double delta, double tol, int maxit_outer,
                              const HumOptions& opt = {}, const NonlinearOptions& nl = {});

// Consistent-adjoint observation functional sum_k <obs_k, law(obs_k)>.
double observability_form(const ControlConfig& cfg, const StatePair& phi1, const ValidatedParams& p,
                          const Grid& g, const LawOptions& law = {});

// Minimum over random unit final data, drawn in the adjoint-compatible
// Legendre space, of observability_form / |phi1|_X^2.
double observability_ratio(const ControlConfig& cfg, const ValidatedParams& p, const Grid& g, int samples,
                           std::uint64_t seed = 0, int degree = 16, const LawOptions& law = {});

struct LanczosResult {
    std::vector<double> ritz;  // ascending
    int steps = 0;
};

// Lanczos with full reorthogonalization on a symmetric operator of size dim.
LanczosResult lanczos(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, int dim,
                      int steps, std::uint64_t seed = 0);

// Lanczos on the Galerkin Gramian xi -> P^T W Gamma(P xi) in a final-data basis.
LanczosResult gramian_lanczos(const Gramian& gram, const FinalDataBasis& basis, int steps, std::uint64_t seed = 0);

// Smallest Ritz value of the observability form on the adjoint-compatible
// Legendre space, orthonormal under l2_inner.
double observability_lanczos(const ControlConfig& cfg, const ValidatedParams& p, const Grid& g,
                             int degree = 16, const LawOptions& law = {});

}  // namespace gg
