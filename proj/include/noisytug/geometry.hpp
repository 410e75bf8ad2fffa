// Bounded open domains with the boundary queries the game rules need:
// signed distance, containment, and exit-point selection inside a budget
// ball.  Distances are exact for the analytic kinds; exit candidates beyond
// the nearest point are found by ray bisection in a fixed direction set.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "noisytug/rng.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

/// Deterministic, roughly uniform direction set used for exit candidates and
/// the grid oracle's move search.
template <int D>
inline std::vector<Vec<D>> direction_set(int n) {
    std::vector<Vec<D>> dirs;
    dirs.reserve(n);
    if constexpr (D == 2) {
        for (int k = 0; k < n; ++k) {
            const double a = 6.283185307179586476925287 * k / n;
            dirs.push_back(Vec<2>(std::cos(a), std::sin(a)));
        }
    } else if constexpr (D == 3) {
        // Fibonacci sphere.
        const double ga = 2.399963229728653;
        for (int k = 0; k < n; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / n;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            dirs.push_back(Vec<3>(r * std::cos(ga * k), r * std::sin(ga * k), z));
        }
    } else {
        Rng rng(0x9E3779B97F4A7C15ULL);  // fixed seed: the set is part of the contract
        for (int k = 0; k < n; ++k) dirs.push_back(sample_unit_vector<D>(rng));
    }
    return dirs;
}

/// Process-wide cache of direction sets; domains stay immutable and all
/// queries reentrant.  Entries are never evicted, so returned references
/// remain valid.
template <int D>
inline const std::vector<Vec<D>>& shared_directions(int n) {
    static std::mutex mu;
    static std::unordered_map<int, std::unique_ptr<const std::vector<Vec<D>>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<const std::vector<Vec<D>>>(direction_set<D>(n));
    return *slot;
}

template <int D>
class Domain {
  public:
    enum class Kind { ball, annulus, box, punctured_ball, cone_complement, polygon };

    static Domain ball(const Vec<D>& center, double radius) {
        require(radius > 0.0, "ball radius must be positive");
        Domain d(Kind::ball);
        d.center_ = center;
        d.outer_ = radius;
        return d;
    }

    static Domain annulus(const Vec<D>& center, double inner, double outer) {
        require(inner > 0.0 && outer > inner, "annulus radii must satisfy 0 < inner < outer");
        Domain d(Kind::annulus);
        d.center_ = center;
        d.inner_ = inner;
        d.outer_ = outer;
        return d;
    }

    static Domain box(const Vec<D>& lo, const Vec<D>& hi) {
        for (int i = 0; i < D; ++i) require(lo[i] < hi[i], "box must have positive extent in every axis");
        Domain d(Kind::box);
        d.lo_ = lo;
        d.hi_ = hi;
        return d;
    }

    /// Ball with an inner closed ball of radius `core` removed; core = 0
    /// removes just the center point (whose boundary is that single point).
    static Domain punctured_ball(const Vec<D>& center, double radius, double core = 0.0) {
        require(radius > 0.0 && core >= 0.0 && core < radius, "punctured ball needs 0 <= core < radius");
        Domain d(Kind::punctured_ball);
        d.center_ = center;
        d.outer_ = radius;
        d.inner_ = core;
        return d;
    }

    /// Ball minus a solid cone whose tip sits on the sphere at center +
    /// radius * tip_direction and whose axis points back toward the center.
    static Domain cone_complement(const Vec<D>& center, double radius, const Vec<D>& tip_direction,
                                  double half_angle) {
        require(radius > 0.0, "cone complement radius must be positive");
        require(half_angle > 0.0 && half_angle < 1.5707963267948966, "cone half-angle must lie in (0, pi/2)");
        require(tip_direction.norm() > 0.0, "cone tip direction must be nonzero");
        Domain d(Kind::cone_complement);
        d.center_ = center;
        d.outer_ = radius;
        d.axis_ = -tip_direction.normalized();
        d.half_angle_ = half_angle;
        return d;
    }

    /// Simple polygon, dimension 2 only.
    static Domain polygon(std::vector<Vec<D>> vertices) {
        static_assert(D == 2, "polygon domains are restricted to dimension 2");
        require(vertices.size() >= 3, "polygon needs at least 3 vertices");
        Domain d(Kind::polygon);
        d.verts_ = std::move(vertices);
        return d;
    }

    Kind kind() const { return kind_; }

    /// Signed distance to the boundary: positive inside, negative outside.
    double boundary_distance(const Vec<D>& x) const {
        switch (kind_) {
            case Kind::ball:
                return outer_ - (x - center_).norm();
            case Kind::annulus: {
                const double r = (x - center_).norm();
                return std::min(r - inner_, outer_ - r);
            }
            case Kind::box: {
                double inside = std::numeric_limits<double>::infinity();
                double out2 = 0.0;
                for (int i = 0; i < D; ++i) {
                    inside = std::min(inside, std::min(x[i] - lo_[i], hi_[i] - x[i]));
                    const double e = std::max({lo_[i] - x[i], 0.0, x[i] - hi_[i]});
                    out2 += e * e;
                }
                return inside >= 0.0 ? inside : -std::sqrt(out2);
            }
            case Kind::punctured_ball: {
                const double r = (x - center_).norm();
                if (inner_ == 0.0) return std::min(r, outer_ - r);
                return std::min(r - inner_, outer_ - r);
            }
            case Kind::cone_complement:
                return std::min(outer_ - (x - center_).norm(), cone_distance(x));
            case Kind::polygon: {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < verts_.size(); ++i) {
                    const Vec<D>& a = verts_[i];
                    const Vec<D>& b = verts_[(i + 1) % verts_.size()];
                    best = std::min(best, segment_distance(x, a, b));
                }
                return polygon_contains(x) ? best : -best;
            }
        }
        return 0.0;
    }

    bool contains(const Vec<D>& x) const { return boundary_distance(x) > 0.0; }

    /// Closest boundary point; ties broken by lexicographic minimum.
    Vec<D> nearest_boundary_point(const Vec<D>& x) const {
        switch (kind_) {
            case Kind::ball:
                return sphere_project(x, outer_);
            case Kind::annulus:
                return pick_nearest(x, {sphere_project(x, inner_), sphere_project(x, outer_)});
            case Kind::box: {
                bool inside = true;
                for (int i = 0; i < D; ++i) inside = inside && x[i] >= lo_[i] && x[i] <= hi_[i];
                if (!inside) {
                    Vec<D> y = x;
                    for (int i = 0; i < D; ++i) y[i] = std::clamp(y[i], lo_[i], hi_[i]);
                    return y;
                }
                std::vector<Vec<D>> cands;
                for (int i = 0; i < D; ++i) {
                    Vec<D> a = x, b = x;
                    a[i] = lo_[i];
                    b[i] = hi_[i];
                    cands.push_back(a);
                    cands.push_back(b);
                }
                return pick_nearest(x, cands);
            }
            case Kind::punctured_ball: {
                std::vector<Vec<D>> cands{sphere_project(x, outer_)};
                cands.push_back(inner_ == 0.0 ? center_ : sphere_project(x, inner_));
                return pick_nearest(x, cands);
            }
            case Kind::cone_complement:
                return cone_nearest(x);
            case Kind::polygon: {
                std::vector<Vec<D>> cands;
                for (std::size_t i = 0; i < verts_.size(); ++i)
                    cands.push_back(segment_project(x, verts_[i], verts_[(i + 1) % verts_.size()]));
                return pick_nearest(x, cands);
            }
        }
        return x;
    }

    /// Terminal move: a boundary point within `budget` of x.  Without a
    /// preference this is the nearest point; with one, the candidate
    /// maximizing the inner product with the preference vector.
    Vec<D> exit_point(const Vec<D>& x, double budget) const {
        const Vec<D> y = nearest_boundary_point(x);
        if ((y - x).norm() > budget + 1e-12)
            throw std::domain_error("exit_point: no boundary point within budget (caller must be in the "
                                    "termination band)");
        return y;
    }

    Vec<D> exit_point(const Vec<D>& x, double budget, const Vec<D>& preference, int n_dir = 64) const {
        const auto cands = exit_candidates(x, budget, n_dir);
        const Vec<D>* best = &cands.front();
        double best_dot = preference.dot(cands.front());
        for (const auto& c : cands) {
            const double d = preference.dot(c);
            if (d > best_dot + 1e-15 || (std::abs(d - best_dot) <= 1e-15 && lex_less<D>(c, *best))) {
                best = &c;
                best_dot = d;
            }
        }
        return *best;
    }

    /// Deterministic candidate set for a terminating move: the nearest
    /// boundary point plus ray/boundary intersections in n_dir directions
    /// within the budget.  An approximation of the player's full choice set.
    std::vector<Vec<D>> exit_candidates(const Vec<D>& x, double budget, int n_dir = 64) const {
        std::vector<Vec<D>> cands{exit_point(x, budget)};
        for (const auto& w : shared_directions<D>(n_dir)) {
            double t_in = 0.0, d_in = boundary_distance(x);
            if (d_in < 0.0) break;  // outside: nearest point only
            bool bracketed = false;
            const int march = 24;
            for (int s = 1; s <= march; ++s) {
                const double t = budget * s / march;
                const double d = boundary_distance(x + t * w);
                if (d <= 0.0) {
                    bracketed = true;
                    double lo = t_in, hi = t;
                    for (int it = 0; it < 70; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (boundary_distance(x + mid * w) > 0.0 ? lo : hi) = mid;
                    }
                    cands.push_back(x + hi * w);
                    break;
                }
                t_in = t;
                d_in = d;
            }
            (void)bracketed;
            (void)d_in;
        }
        return cands;
    }

    std::pair<Vec<D>, Vec<D>> bounding_box() const {
        switch (kind_) {
            case Kind::box:
                return {lo_, hi_};
            case Kind::polygon: {
                Vec<D> lo = verts_.front(), hi = verts_.front();
                for (const auto& v : verts_)
                    for (int i = 0; i < D; ++i) {
                        lo[i] = std::min(lo[i], v[i]);
                        hi[i] = std::max(hi[i], v[i]);
                    }
                return {lo, hi};
            }
            default:
                return {center_ - Vec<D>::Constant(outer_), center_ + Vec<D>::Constant(outer_)};
        }
    }

    double diameter() const {
        switch (kind_) {
            case Kind::box:
                return (hi_ - lo_).norm();
            case Kind::polygon: {
                double best = 0.0;
                for (std::size_t i = 0; i < verts_.size(); ++i)
                    for (std::size_t j = i + 1; j < verts_.size(); ++j)
                        best = std::max(best, (verts_[i] - verts_[j]).norm());
                return best;
            }
            default:
                return 2.0 * outer_;
        }
    }

  private:
    explicit Domain(Kind k) : kind_(k) {}

    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(std::string("domain: ") + msg);
    }

    Vec<D> sphere_project(const Vec<D>& x, double radius) const {
        const Vec<D> d = x - center_;
        const double n = d.norm();
        if (n < 1e-300) return center_ - radius * unit_axis<D>(0);  // lex-min point of the sphere
        return center_ + (radius / n) * d;
    }

    Vec<D> pick_nearest(const Vec<D>& x, const std::vector<Vec<D>>& cands) const {
        const Vec<D>* best = &cands.front();
        double best_d = (cands.front() - x).norm();
        for (const auto& c : cands) {
            const double d = (c - x).norm();
            if (d < best_d - 1e-15 || (std::abs(d - best_d) <= 1e-15 && lex_less<D>(c, *best))) {
                best = &c;
                best_d = d;
            }
        }
        return *best;
    }

    Vec<D> cone_tip() const { return center_ - outer_ * axis_; }

    // Signed distance to the removed solid cone: positive outside it.
    double cone_distance(const Vec<D>& x) const {
        const Vec<D> q = x - cone_tip();
        const double h = q.dot(axis_);
        const double rho = (q - h * axis_).norm();
        const double s = rho * std::sin(half_angle_) + h * std::cos(half_angle_);
        if (s < 0.0) return q.norm();  // tip is the closest cone point
        return rho * std::cos(half_angle_) - h * std::sin(half_angle_);
    }

    Vec<D> cone_nearest(const Vec<D>& x) const {
        const Vec<D> tip = cone_tip();
        const Vec<D> q = x - tip;
        const double h = q.dot(axis_);
        Vec<D> radial = q - h * axis_;
        double rho = radial.norm();
        Vec<D> rhat;
        if (rho > 1e-12) {
            rhat = radial / rho;
        } else {
            // On the axis: any perpendicular works; pick deterministically.
            int k = 0;
            for (int i = 1; i < D; ++i)
                if (std::abs(axis_[i]) < std::abs(axis_[k])) k = i;
            rhat = (unit_axis<D>(k) - axis_[k] * axis_).normalized();
        }
        std::vector<Vec<D>> cands{tip};
        const Vec<D> sp = sphere_project(x, outer_);
        if (cone_distance(sp) >= -1e-9) cands.push_back(sp);
        const double s = rho * std::sin(half_angle_) + h * std::cos(half_angle_);
        if (s > 0.0) {
            const Vec<D> edge = std::cos(half_angle_) * axis_ + std::sin(half_angle_) * rhat;
            const Vec<D> lateral = tip + s * edge;
            if ((lateral - center_).norm() <= outer_ + 1e-9) cands.push_back(lateral);
            // Rim circle (sphere meets cone surface) in the plane of x.
            const double srim = -2.0 * (tip - center_).dot(edge);
            if (srim > 0.0) cands.push_back(tip + srim * edge);
        }
        return pick_nearest(x, cands);
    }

    static double segment_distance(const Vec<D>& x, const Vec<D>& a, const Vec<D>& b) {
        return (x - segment_project(x, a, b)).norm();
    }

    static Vec<D> segment_project(const Vec<D>& x, const Vec<D>& a, const Vec<D>& b) {
        const Vec<D> u = b - a;
        const double t = std::clamp(u.dot(x - a) / u.squaredNorm(), 0.0, 1.0);
        return a + t * u;
    }

    bool polygon_contains(const Vec<D>& x) const {
        // Even-odd crossing rule.
        bool in = false;
        for (std::size_t i = 0, j = verts_.size() - 1; i < verts_.size(); j = i++) {
            const Vec<D>&a = verts_[i], &b = verts_[j];
            if ((a[1] > x[1]) != (b[1] > x[1])) {
                const double t = (x[1] - a[1]) / (b[1] - a[1]);
                if (x[0] < a[0] + t * (b[0] - a[0])) in = !in;
            }
        }
        return in;
    }

    Kind kind_;
    Vec<D> center_ = Vec<D>::Zero();
    Vec<D> lo_ = Vec<D>::Zero(), hi_ = Vec<D>::Zero();
    Vec<D> axis_ = Vec<D>::Zero();
    double inner_ = 0.0, outer_ = 0.0, half_angle_ = 0.0;
    std::vector<Vec<D>> verts_;
};

}  // namespace noisytug
