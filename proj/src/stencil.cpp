#include "gg/stencil.hpp"

#include <cmath>

namespace gg {

std::vector<double> fd_weights(const std::vector<int>& offsets, int m)
{
    const int n = static_cast<int>(offsets.size());
    // c[k][j]: weight of node j for the k-th derivative
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    c[0][0] = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - offsets[i - 1] * c[k][i - 1]) / c2;
                c[0][i] = -c1 * offsets[i - 1] * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (offsets[i] * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = offsets[i] * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c[m];
}

std::vector<double> fd_weights(const std::vector<int>& offsets, int m, double h)
{
    auto w = fd_weights(offsets, m);
    const double s = std::pow(h, m);
    for (double& x : w) x /= s;
    return w;
}

}  // namespace gg
