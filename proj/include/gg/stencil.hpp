#pragma once

#include <vector>

namespace gg {

// Finite-difference weights for the m-th derivative at offset 0 on the given
// integer offsets (unit spacing), by Fornberg's recursion.
std::vector<double> fd_weights(const std::vector<int>& offsets, int m);

// Same weights divided by h^m.
std::vector<double> fd_weights(const std::vector<int>& offsets, int m, double h);

}  // namespace gg
