#pragma once

#include <vector>

namespace cdbulk {

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// components of its orthonormal eigenvectors, by the implicit-shift QL
/// iteration. `diag` holds d_0..d_{n-1}, `sub` the couplings e_0..e_{n-2}
/// (e_i between rows i and i+1). Results are sorted by eigenvalue.
struct TridiagEigen {
    std::vector<double> values;
    std::vector<double> first_components;
};

TridiagEigen tridiag_eigen_first_components(std::vector<double> diag, std::vector<double> sub);

} // namespace cdbulk
