// Fixed-dimension vector/matrix aliases shared by every module.
#pragma once

#include <Eigen/Dense>

namespace noisytug {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

template <int D>
using Mat = Eigen::Matrix<double, D, D>;

/// Strict lexicographic order on coordinates, used for deterministic
/// tie-breaking between geometrically equivalent points.
template <int D>
inline bool lex_less(const Vec<D>& a, const Vec<D>& b) {
    for (int i = 0; i < D; ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

template <int D>
inline Vec<D> unit_axis(int i) {
    Vec<D> e = Vec<D>::Zero();
    e[i] = 1.0;
    return e;
}

}  // namespace noisytug
