#include "cdbulk/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cdbulk {

// Implicit-shift QL on a symmetric tridiagonal matrix, rotations applied to a
// single row of the accumulated transform (initialized to e_1). This is the
// classical EISPACK imtql2 scheme restricted to the data Gauss quadrature
// needs; O(n^2) total.
TridiagEigen tridiag_eigen_first_components(std::vector<double> diag, std::vector<double> sub) {
    const std::size_t n = diag.size();
    if (n == 0) throw std::invalid_argument("tridiag_eigen: empty matrix");
    if (sub.size() + 1 != n && !(n == 1 && sub.empty())) {
        throw std::invalid_argument("tridiag_eigen: subdiagonal size mismatch");
    }

    std::vector<double> d = std::move(diag);
    std::vector<double> e(n, 0.0);
    std::copy(sub.begin(), sub.end(), e.begin()); // e[i] couples rows i, i+1; e[n-1] = 0
    std::vector<double> z(n, 0.0);
    z[0] = 1.0;

    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        int iterations = 0;
        while (true) {
            std::size_t m = l;
            while (m + 1 < n) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
                ++m;
            }
            if (m == l) break;
            if (++iterations > 50) {
                throw std::runtime_error("tridiag_eigen: QL iteration failed to converge");
            }

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool deflated = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) { // underflow: deflate and restart this eigenvalue
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if (deflated) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    TridiagEigen out;
    out.values.reserve(n);
    out.first_components.reserve(n);
    for (std::size_t i : order) {
        out.values.push_back(d[i]);
        out.first_components.push_back(z[i]);
    }
    return out;
}

} // namespace cdbulk
