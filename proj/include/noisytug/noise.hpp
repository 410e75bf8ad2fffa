// Noise measures: mean-zero, compactly supported, axially symmetric about e1,
// their derived game constants (p, q, beta, alpha) and the rotated/scaled
// push-forward sampling used by the game engine.
#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noisytug/rng.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

enum class TurnMode { random_turn, alternating };

/// Constants attached to a (measure, turn mode) pair.
///
/// Random-turn mode:      p = (C11 + C22 + 1) / C22, C11 + 1 = beta/q, C22 = beta/p.
/// Alternating-turn mode: p = (C11 + C22) / C22,     C11     = beta/q, C22 = beta/p.
/// C22 = 0 gives p = infinity (the no-noise game).  alpha = 1 + support radius.
struct GameConstants {
    double p = 2.0;
    double q = 2.0;
    double beta = 2.0;
    double alpha = 2.0;
    TurnMode turn_mode = TurnMode::random_turn;

    bool p_finite() const { return std::isfinite(p); }
};

/// Psi = |v| times an orthonormal map taking e1 to v/|v|.
template <int D>
struct RotationScale {
    Mat<D> psi;
    Vec<D> v;
};

/// Applies the canonical rotation-scale for target v to a point expressed in
/// the e1-aligned frame, without forming the matrix.  The orthonormal part is
/// the reflection swapping e1 and v/|v| (identity when v is a positive
/// multiple of e1), so psi^T psi = |v|^2 I and psi e1 = v.
template <int D>
inline Vec<D> apply_rotation_scale(const Vec<D>& v, const Vec<D>& a) {
    const double vn = v.norm();
    if (vn == 0.0) return Vec<D>::Zero();
    Vec<D> n = v / vn;
    n[0] -= 1.0;
    const double nn = n.squaredNorm();
    if (nn < 1e-28) return vn * a;
    return vn * (a - (2.0 * n.dot(a) / nn) * n);
}

/// Explicit matrix form of the same map; |v| = 0 is rejected.
template <int D>
inline RotationScale<D> rotation_to(const Vec<D>& v) {
    if (v.norm() == 0.0) throw std::domain_error("rotation_to: undefined rotation target (zero vector)");
    RotationScale<D> rs;
    rs.v = v;
    for (int i = 0; i < D; ++i) rs.psi.col(i) = apply_rotation_scale<D>(v, unit_axis<D>(i));
    return rs;
}

template <int D>
struct Atom {
    Vec<D> point;
    double weight;
};

template <int D>
class NoiseMeasure {
  public:
    enum class Kind { point_mass, discrete_atoms, sphere_orthogonal };

    /// Degenerate measure at the origin (the no-noise game).
    static NoiseMeasure point_mass() {
        NoiseMeasure m;
        m.kind_ = Kind::point_mass;
        m.support_radius_ = 0.0;
        m.cov_.setZero();
        return m;
    }

    /// Finitely supported measure; validates normalization, zero mean and
    /// axial symmetry about e1 and rejects violations with a diagnostic.
    static NoiseMeasure discrete_atoms(std::vector<Atom<D>> atoms) {
        if (atoms.empty()) throw std::invalid_argument("noise measure: atom list is empty");
        double total = 0.0, radius = 0.0;
        Vec<D> mean = Vec<D>::Zero();
        Mat<D> cov = Mat<D>::Zero();
        double scale = 1.0;
        for (const auto& a : atoms) {
            if (!(a.weight > 0.0)) throw std::invalid_argument("noise measure: atom weights must be positive");
            total += a.weight;
            mean += a.weight * a.point;
            cov += a.weight * (a.point * a.point.transpose());
            radius = std::max(radius, a.point.norm());
            scale = std::max(scale, a.point.norm());
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("noise measure: atom weights must sum to 1 (got " + std::to_string(total) + ")");
        if (mean.norm() > 1e-12 * scale)
            throw std::invalid_argument("noise measure: mean is not zero");
        check_axial_symmetry(atoms, cov, scale);

        NoiseMeasure m;
        m.kind_ = Kind::discrete_atoms;
        m.atoms_ = std::move(atoms);
        m.support_radius_ = radius;
        m.cov_ = cov;
        m.build_cdf();
        return m;
    }

    /// Uniform distribution on the sphere of the given radius inside the
    /// hyperplane orthogonal to e1.  In dimension 2 this is the two-point
    /// measure at (0, +-radius).
    static NoiseMeasure sphere_orthogonal(double radius) {
        if (!(radius > 0.0)) throw std::invalid_argument("noise measure: sphere radius must be positive");
        NoiseMeasure m;
        m.kind_ = Kind::sphere_orthogonal;
        m.support_radius_ = radius;
        m.cov_.setZero();
        for (int i = 1; i < D; ++i) m.cov_(i, i) = radius * radius / (D - 1);
        return m;
    }

    Kind kind() const { return kind_; }
    double support_radius() const { return support_radius_; }
    const Mat<D>& covariance() const { return cov_; }
    double parallel_variance() const { return cov_(0, 0); }
    double perpendicular_variance() const { return cov_(1, 1); }

    /// True when the push-forward expectation can be evaluated as a finite
    /// sum (the grid oracle requires this).
    bool finitely_supported() const {
        return kind_ != Kind::sphere_orthogonal || D == 2;
    }

    /// Materialized atom list in the e1-aligned frame.
    std::vector<Atom<D>> atom_list() const {
        switch (kind_) {
            case Kind::point_mass:
                return {{Vec<D>::Zero(), 1.0}};
            case Kind::discrete_atoms:
                return atoms_;
            case Kind::sphere_orthogonal: {
                if (D != 2) throw std::runtime_error("noise measure: not finitely supported");
                Vec<D> up = Vec<D>::Zero();
                up[1] = support_radius_;
                return {{up, 0.5}, {-up, 0.5}};
            }
        }
        throw std::logic_error("unreachable");
    }

    /// One draw from the push-forward of the measure under the rotation-scale
    /// aligned with v.  |v| = 0 yields the zero vector (degenerate limit).
    Vec<D> sample(const Vec<D>& v, Rng& rng) const {
        if (kind_ == Kind::point_mass) return Vec<D>::Zero();
        if (v.squaredNorm() == 0.0) return Vec<D>::Zero();
        switch (kind_) {
            case Kind::discrete_atoms: {
                const double u = rng.u01();
                std::size_t i = 0;
                while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
                return apply_rotation_scale<D>(v, atoms_[i].point);
            }
            case Kind::sphere_orthogonal: {
                Vec<D> a = Vec<D>::Zero();
                if constexpr (D == 2) {
                    a[1] = rng.coin() ? support_radius_ : -support_radius_;
                } else {
                    Vec<D - 1> u = sample_unit_vector<D - 1>(rng);
                    for (int i = 1; i < D; ++i) a[i] = support_radius_ * u[i - 1];
                }
                return apply_rotation_scale<D>(v, a);
            }
            default:
                return Vec<D>::Zero();
        }
    }

  private:
    static void check_axial_symmetry(const std::vector<Atom<D>>& atoms, const Mat<D>& cov, double scale) {
        const double tol = 1e-12 * std::max(1.0, scale * scale);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j)
                if (i != j && std::abs(cov(i, j)) > tol)
                    throw std::invalid_argument("noise measure: not axially symmetric about e1 (covariance not diagonal)");
        for (int i = 2; i < D; ++i)
            if (std::abs(cov(i, i) - cov(1, 1)) > tol)
                throw std::invalid_argument(
                    "noise measure: not axially symmetric about e1 (unequal perpendicular variances)");
        // Sign-flip invariance of the atom multiset in each coordinate >= 2.
        // Sufficient for the measures used here; exotic atom sets with subtler
        // symmetry groups are rejected.
        for (int axis = 1; axis < D; ++axis) {
            for (const auto& a : atoms) {
                Vec<D> flipped = a.point;
                flipped[axis] = -flipped[axis];
                double matched = 0.0;
                for (const auto& b : atoms)
                    if ((b.point - flipped).norm() <= 1e-12 * std::max(1.0, scale)) matched += b.weight;
                double self = 0.0;
                for (const auto& b : atoms)
                    if ((b.point - a.point).norm() <= 1e-12 * std::max(1.0, scale)) self += b.weight;
                if (std::abs(matched - self) > 1e-12)
                    throw std::invalid_argument("noise measure: not axially symmetric about e1 (atom multiset not "
                                                "invariant under sign flips)");
            }
        }
    }

    void build_cdf() {
        cdf_.clear();
        double acc = 0.0;
        for (const auto& a : atoms_) {
            acc += a.weight;
            cdf_.push_back(acc);
        }
        cdf_.back() = 1.0;
    }

    Kind kind_ = Kind::point_mass;
    double support_radius_ = 0.0;
    Mat<D> cov_ = Mat<D>::Zero();
    std::vector<Atom<D>> atoms_;
    std::vector<double> cdf_;
};

/// Game constants for a measure under the chosen turn rule.  C22 = 0 maps to
/// p = infinity; alternating measures with C11 = 0 would give p = 1, which is
/// outside the supported range and rejected.
template <int D>
inline GameConstants derive_constants(const NoiseMeasure<D>& mu, TurnMode mode) {
    const double c11 = mu.parallel_variance();
    const double c22 = mu.perpendicular_variance();
    GameConstants gc;
    gc.turn_mode = mode;
    gc.alpha = 1.0 + mu.support_radius();
    if (c22 <= 0.0) {
        gc.p = std::numeric_limits<double>::infinity();
        gc.q = 1.0;
        gc.beta = (mode == TurnMode::random_turn) ? c11 + 1.0 : c11;
        return gc;
    }
    if (mode == TurnMode::random_turn) {
        gc.p = (c11 + c22 + 1.0) / c22;
    } else {
        if (c11 <= 0.0)
            throw std::invalid_argument("derive_constants: alternating mode with zero parallel covariance gives p = 1, "
                                        "outside the supported range (1, inf)");
        gc.p = (c11 + c22) / c22;
    }
    gc.q = gc.p / (gc.p - 1.0);
    gc.beta = gc.p * c22;
    return gc;
}

}  // namespace noisytug
