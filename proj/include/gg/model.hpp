#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace gg {

// Every failure raised by the library carries a short kind tag
// (e.g. "CoefficientViolation") in addition to the message.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct SystemParams {
    double a = 0.5;
    double a1 = 1.0;
    double a2 = 1.0;
    double b = 1.0;
    double c = 1.0;
    double r = 1.0;
};

class ValidatedParams {
public:
    const SystemParams& raw() const { return p_; }
    double a() const { return p_.a; }
    double a1() const { return p_.a1; }
    double a2() const { return p_.a2; }
    double b() const { return p_.b; }
    double c() const { return p_.c; }
    double r() const { return p_.r; }
    double one_minus_a2b() const { return 1.0 - p_.a * p_.a * p_.b; }

    // coupling matrix of the third-order terms, [[1, a], [ab/c, 1/c]]
    Eigen::Matrix2d dispersion() const;

private:
    explicit ValidatedParams(const SystemParams& p) : p_(p) {}
    friend ValidatedParams validate_params(const SystemParams& p);
    SystemParams p_;
};

ValidatedParams validate_params(const SystemParams& p);

struct DiagonalForm {
    double lambda = 0.0;
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    Eigen::Matrix2d to_diag;
    Eigen::Matrix2d from_diag;
};

DiagonalForm diagonalize(const ValidatedParams& p);

struct Grid {
    double L = 1.0;
    double T = 1.0;
    int nx = 100;
    int nt = 1000;

    double dx() const { return L / nx; }
    double dt() const { return T / nt; }
    int nodes() const { return nx + 1; }
    double x(int j) const { return j * dx(); }
    double t(int n) const { return n * dt(); }
};

Grid make_grid(double L, double T, int nx, int nt);

struct StatePair {
    std::vector<double> u;
    std::vector<double> v;

    static StatePair zeros(const Grid& g);
    static StatePair from_stacked(const Eigen::VectorXd& s);
    Eigen::VectorXd stacked() const;
    StatePair& operator+=(const StatePair& o);
    StatePair& operator-=(const StatePair& o);
    StatePair& operator*=(double s);
};

StatePair operator+(StatePair a, const StatePair& b);
StatePair operator-(StatePair a, const StatePair& b);
StatePair operator*(double s, StatePair a);

struct Trajectory {
    std::vector<StatePair> states;
    std::vector<double> times;

    const StatePair& final_state() const { return states.back(); }
};

// composite trapezoid weights on the spatial nodes and on the time levels
std::vector<double> space_weights(const Grid& g);
std::vector<double> time_weights(const Grid& g);

double x_inner(const StatePair& s1, const StatePair& s2, const ValidatedParams& p, const Grid& g);
double l2_inner(const StatePair& s1, const StatePair& s2, const Grid& g);
double x_norm(const StatePair& s, const ValidatedParams& p, const Grid& g);
double l2_norm(const StatePair& s, const Grid& g);

void check_shape(const StatePair& s, const Grid& g);

}  // namespace gg
