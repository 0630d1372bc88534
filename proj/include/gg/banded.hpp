#pragma once

#include <vector>

namespace gg {

// Square band matrix in LAPACK general-band layout. The storage already
// reserves the kl extra rows dgbtrf needs for fill-in.
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }
    double get(int i, int j) const;
    void add(int i, int j, double value);
    void set(int i, int j, double value);

    // y = A x and y = A^T x
    void multiply(const double* x, double* y) const;
    void multiply_transpose(const double* x, double* y) const;

    const std::vector<double>& storage() const { return ab_; }
    int ldab() const { return 2 * kl_ + ku_ + 1; }

private:
    double& ref(int i, int j) { return ab_[static_cast<std::size_t>(j) * ldab() + kl_ + ku_ + i - j]; }
    double cref(int i, int j) const { return ab_[static_cast<std::size_t>(j) * ldab() + kl_ + ku_ + i - j]; }

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> ab_;
};

// LU factorization with partial pivoting (dgbtrf) and solves with A or A^T.
class BandLU {
public:
    BandLU() = default;
    explicit BandLU(const BandMatrix& a);

    void solve(double* b) const;
    void solve_transpose(double* b) const;
    int n() const { return n_; }

private:
    void solve_impl(double* b, char trans) const;

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
};

}  // namespace gg
