#include "gg/banded.hpp"

#include "gg/model.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>

namespace gg {

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ab_(static_cast<std::size_t>(n) * (2 * kl + ku + 1), 0.0)
{
}

double BandMatrix::get(int i, int j) const
{
    return in_band(i, j) ? cref(i, j) : 0.0;
}

void BandMatrix::add(int i, int j, double value)
{
    if (!in_band(i, j))
        throw Error("BandOverflow", "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") outside the band");
    ref(i, j) += value;
}

void BandMatrix::set(int i, int j, double value)
{
    if (!in_band(i, j))
        throw Error("BandOverflow", "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") outside the band");
    ref(i, j) = value;
}

void BandMatrix::multiply(const double* x, double* y) const
{
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        const int j0 = std::max(0, i - kl_), j1 = std::min(n_ - 1, i + ku_);
        for (int j = j0; j <= j1; ++j) s += cref(i, j) * x[j];
        y[i] = s;
    }
}

void BandMatrix::multiply_transpose(const double* x, double* y) const
{
    for (int j = 0; j < n_; ++j) {
        double s = 0.0;
        const int i0 = std::max(0, j - ku_), i1 = std::min(n_ - 1, j + kl_);
        for (int i = i0; i <= i1; ++i) s += cref(i, j) * x[i];
        y[j] = s;
    }
}

BandLU::BandLU(const BandMatrix& a)
    : n_(a.n()), kl_(a.kl()), ku_(a.ku()), ab_(a.storage()), ipiv_(a.n())
{
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), a.ldab(),
                                     ipiv_.data());
    if (info != 0)
        throw Error("SingularSystem", "band LU failed (info=" + std::to_string(info) + ")");
}

void BandLU::solve_impl(double* b, char trans) const
{
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, trans, n_, kl_, ku_, 1, ab_.data(),
                                     2 * kl_ + ku_ + 1, ipiv_.data(), b, n_);
    if (info != 0)
        throw Error("SingularSystem", "band solve failed (info=" + std::to_string(info) + ")");
}

void BandLU::solve(double* b) const { solve_impl(b, 'N'); }

void BandLU::solve_transpose(double* b) const { solve_impl(b, 'T'); }

}  // namespace gg
