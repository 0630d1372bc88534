#pragma once

#include "gg/banded.hpp"
#include "gg/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gg {

// Boundary channels in the order u_xx(0), u_x(L), u_xx(L), v_xx(0), v_x(L), v_xx(L).
enum Channel { H0 = 0, H1, H2, G0, G1, G2 };
inline constexpr int kChannels = 6;
const char* channel_name(int k);

// Channels whose natural control space is H^{-1/3}(0,T).
inline bool is_fractional(int k) { return k == H0 || k == H2 || k == G0 || k == G2; }

struct BoundaryData {
    std::array<std::vector<double>, kChannels> ch;

    static BoundaryData zeros(const Grid& g);
    std::vector<double>& operator[](int k) { return ch[k]; }
    const std::vector<double>& operator[](int k) const { return ch[k]; }
};

enum class ConfigId { C1 = 1, C2, C3, C4, C5, C6 };

struct ControlConfig {
    ConfigId id = ConfigId::C3;
    std::array<bool, kChannels> active{};

    static ControlConfig make(ConfigId id);
    static ControlConfig parse(const std::string& name);
    std::string name() const;
};

// Zero out every inactive channel.
BoundaryData apply_mask(const ControlConfig& cfg, BoundaryData bd);

struct AdjointTraces {
    std::vector<double> phi0, psi0, phiL, psiL;
    std::vector<double> dphiL, dpsiL;
    std::vector<double> d2phi0, d2psi0, d2phiL, d2psiL;
};

// Signed boundary observations paired with each control channel by the
// duality identity, e.g. channel H0 observes phi(0)+(ab/c)psi(0) and channel
// H2 observes -(phi(L)+(ab/c)psi(L)).
BoundaryData observations(const AdjointTraces& tr, const ValidatedParams& p);

struct SourcePair {
    // f[n][j], s[n][j] at time level n and node j
    std::vector<std::vector<double>> f, s;
};

struct NonlinearOptions {
    // false drops u u_x from the first equation and v v_x from the second
    bool self_terms = true;
    double picard_tol = 1e-10;
    int picard_maxit = 50;
};

// Crank-Nicolson discretization of the forward linear system. The unknowns are
// interleaved by node, index 2j for u_j and 2j+1 for v_j.
class ForwardScheme {
public:
    ForwardScheme(const ValidatedParams& p, const Grid& g);

    const Grid& grid() const { return g_; }
    const ValidatedParams& params() const { return p_; }

    // row of the linear system that carries boundary channel k
    int bc_row(int k) const { return bc_row_[k]; }
    bool is_bc_row(int row) const { return bc_mask_[row]; }

    // one step from level n to n+1; controls are taken at t_{n+1}
    void step(std::vector<double>& U, const std::array<double, kChannels>& bc,
              const std::vector<double>* extra = nullptr) const;

    // rhs = A_minus U (without boundary values)
    void explicit_part(const std::vector<double>& U, std::vector<double>& rhs) const;
    const BandMatrix& a_plus() const { return ap_; }
    const BandMatrix& a_minus() const { return am_; }
    const BandLU& lu() const { return lu_; }

    // nonlinear terms at PDE rows (zero at boundary rows), as a right-hand side
    // contribution N(U) of u_t + ... = -N(U)
    void nonlinear_terms(const std::vector<double>& U, const NonlinearOptions& opt,
                         std::vector<double>& out) const;

private:
    ValidatedParams p_;
    Grid g_;
    BandMatrix ap_, am_;
    BandLU lu_;
    std::array<int, kChannels> bc_row_{};
    std::vector<char> bc_mask_;
};

// Backward Crank-Nicolson discretization of the adjoint system.
class AdjointScheme {
public:
    AdjointScheme(const ValidatedParams& p, const Grid& g);

    const Grid& grid() const { return g_; }
    // one step from level n+1 back to level n
    void step(std::vector<double>& Phi) const;
    void record(const std::vector<double>& Phi, int n, AdjointTraces& tr) const;
    // the six boundary functionals of the adjoint system evaluated on a state
    std::array<double, 6> boundary_residuals(const StatePair& s) const;

private:
    ValidatedParams p_;
    Grid g_;
    BandMatrix ap_, am_;
    BandLU lu_;
    std::vector<char> bc_mask_;
};

std::vector<double> interleave(const StatePair& s);
StatePair deinterleave(const std::vector<double>& U);

Trajectory solve_linear_forward(const ValidatedParams& p, const Grid& g, const StatePair& init,
                                const BoundaryData& bd, const SourcePair* src = nullptr);

Trajectory solve_nonlinear_forward(const ValidatedParams& p, const Grid& g, const StatePair& init,
                                   const BoundaryData& bd, const NonlinearOptions& opt = {});

struct AdjointSolution {
    Trajectory trajectory;
    AdjointTraces traces;
};

AdjointSolution solve_adjoint_backward(const ValidatedParams& p, const Grid& g,
                                       const StatePair& final_data);

// Final state only, reusing a prepared scheme.
StatePair forward_final_state(const ForwardScheme& fs, const StatePair& init, const BoundaryData& bd);
AdjointTraces adjoint_traces(const AdjointScheme& as, const StatePair& final_data);

// Constraint matrix (6 x 2n, stacked [u; v] layout) of the adjoint boundary
// relations at t = T; final data in its kernel is compatible with the scheme.
Eigen::MatrixXd adjoint_boundary_matrix(const ValidatedParams& p, const Grid& g);

// Random smooth unit-norm state: a few cosine modes with normal coefficients.
StatePair random_smooth_state(const ValidatedParams& p, const Grid& g, std::uint64_t seed, int modes = 8);

// Random smooth boundary series on every channel: a few cosine modes with
// normal coefficients, multiplied by (t/T)^3 so that they vanish at t = 0.
BoundaryData random_smooth_boundary(const Grid& g, std::uint64_t seed, double amplitude = 1.0, int modes = 6);

struct HiddenRegularityEstimate {
    double C_T = 0.0;
    std::vector<double> running_max;
};

HiddenRegularityEstimate hidden_regularity_estimate(const ValidatedParams& p, const Grid& g,
                                                    int samples, std::uint64_t seed = 0);

// Terms of the adjoint energy estimate at t = T.
struct AdjointEnergyTerms {
    double lhs = 0.0;
    double rhs = 0.0;
};

AdjointEnergyTerms adjoint_energy_terms(const ValidatedParams& p, const Grid& g,
                                        const AdjointSolution& sol);

// Exact algebraic transpose of the control-to-final-state map of the forward
// scheme, paired by l2_inner on states and by trapezoid weights in time.
class DiscreteControlMap {
public:
    DiscreteControlMap(const ValidatedParams& p, const Grid& g, const ControlConfig& cfg);

    const ControlConfig& config() const { return cfg_; }
    const ForwardScheme& scheme() const { return fs_; }

    StatePair apply(const BoundaryData& bd) const;
    BoundaryData transpose(const StatePair& y) const;

private:
    ControlConfig cfg_;
    ForwardScheme fs_;
};

DiscreteControlMap build_discrete_adjoint(const ValidatedParams& p, const Grid& g,
                                          const ControlConfig& cfg);

// Time integral of sum_k bd_k * obs_k over the active channels (trapezoid).
double boundary_pairing(const ControlConfig& cfg, const BoundaryData& bd, const BoundaryData& obs,
                        const Grid& g);

}  // namespace gg
