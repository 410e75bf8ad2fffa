// Cantor-type porous subsets of the unit circle, stored as sorted angular
// intervals, with precomputed fattened neighborhoods and their complement
// gaps for the measure-decay experiment.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "noisytug/field.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

inline constexpr double kTwoPi = 6.283185307179586476925287;

/// Middle-fraction Cantor construction on an arc of the unit circle.
struct CantorSpec {
    double arc_start = -0.5;  // radians
    double arc_length = 1.0;
    double ratio = 1.0 / 3.0;  // removed middle fraction
    int depth = 7;

    /// Porosity constant: any interval of length L fully contains a
    /// construction interval of length > s*L (s the side fraction), whose
    /// middle gap has length ratio*s*L; halving gives the ball radius.
    double porosity() const { return ratio * (1.0 - ratio) / 4.0; }
};

/// The closed delta-neighborhood of the generated set, merged into disjoint
/// angular intervals, plus its complement gaps on the circle.
class FattenedArcSet {
  public:
    FattenedArcSet(std::vector<std::pair<double, double>> intervals, double delta) : delta_(delta) {
        for (auto& [a, b] : intervals) {
            a -= delta;
            b += delta;
        }
        for (const auto& iv : intervals) {
            if (!merged_.empty() && iv.first <= merged_.back().second)
                merged_.back().second = std::max(merged_.back().second, iv.second);
            else
                merged_.push_back(iv);
        }
        for (std::size_t i = 0; i < merged_.size(); ++i) {
            const double start = merged_[i].second;
            const double end = i + 1 < merged_.size() ? merged_[i + 1].first : merged_.front().first + kTwoPi;
            gaps_.push_back({start, end});
        }
    }

    double delta() const { return delta_; }
    const std::vector<std::pair<double, double>>& intervals() const { return merged_; }

    bool contains_angle(double theta) const { return distance_to_set(theta) == 0.0; }

    double distance_to_set(double theta) const {
        double best = kTwoPi;
        visit_reps(theta, [&](double t) {
            const auto [idx, d] = nearest_in(merged_, t);
            (void)idx;
            best = std::min(best, d);
        });
        return best;
    }

    /// Angle of the nearest set point.
    double nearest_angle(double theta) const { return nearest_arc_angle(merged_, theta); }

    /// Gap interiors shrunk by `margin` on both sides (gaps too narrow to
    /// hold the margin are dropped): the angular targets from which an
    /// exit misses the fattened set with room to spare.
    std::vector<std::pair<double, double>> gap_cores(double margin) const {
        std::vector<std::pair<double, double>> out;
        for (const auto& [a, b] : gaps_)
            if (b - a > 2.0 * margin) out.push_back({a + margin, b - margin});
        return out;
    }

    /// Midpoint of the widest complement gap (the global avoidance target).
    double largest_gap_midpoint() const {
        double best_len = -1.0, best = 0.0;
        for (const auto& [a, b] : gaps_) {
            if (b - a > best_len) {
                best_len = b - a;
                best = 0.5 * (a + b);
            }
        }
        return best;
    }

    /// Wrap-aware nearest point of a union of sorted angular intervals.
    static double nearest_arc_angle(const std::vector<std::pair<double, double>>& ivs, double theta) {
        double best_d = std::numeric_limits<double>::infinity(), best = theta;
        visit_reps(theta, [&](double t) {
            const auto [idx, d] = nearest_in(ivs, t);
            if (d < best_d) {
                best_d = d;
                best = std::clamp(t, ivs[idx].first, ivs[idx].second) - (t - theta);
            }
        });
        return best;
    }

  private:
    template <class Fn>
    static void visit_reps(double theta, Fn&& fn) {
        fn(theta - kTwoPi);
        fn(theta);
        fn(theta + kTwoPi);
    }

    /// Index of the interval nearest to t (sorted disjoint intervals) and
    /// its distance.
    static std::pair<std::size_t, double> nearest_in(const std::vector<std::pair<double, double>>& ivs, double t) {
        auto it = std::upper_bound(ivs.begin(), ivs.end(), t,
                                   [](double v, const std::pair<double, double>& iv) { return v < iv.first; });
        std::size_t best_i = 0;
        double best_d = std::numeric_limits<double>::infinity();
        const auto consider = [&](std::size_t i) {
            const double c = std::clamp(t, ivs[i].first, ivs[i].second);
            const double d = std::abs(c - t);
            if (d < best_d) {
                best_d = d;
                best_i = i;
            }
        };
        if (it != ivs.end()) consider(static_cast<std::size_t>(it - ivs.begin()));
        if (it != ivs.begin()) consider(static_cast<std::size_t>(it - ivs.begin()) - 1);
        return {best_i, best_d};
    }

    double delta_;
    std::vector<std::pair<double, double>> merged_;
    std::vector<std::pair<double, double>> gaps_;
};

/// Harmonic extension to the unit disc of the indicator of a union of
/// boundary arcs, via the closed-form antiderivative of the Poisson kernel.
/// Supplies the descent direction for the strongest avoidance strategy at
/// p = 2.
class DiscArcIndicatorHarmonic final : public ScalarField<2> {
  public:
    explicit DiscArcIndicatorHarmonic(std::vector<std::pair<double, double>> arcs) : arcs_(std::move(arcs)) {}

    double value(const Vec<2>& x) const override {
        const double r = std::min(x.norm(), 1.0 - 1e-12);
        const double phi = std::atan2(x[1], x[0]);
        const double c = (1.0 + r) / (1.0 - r);
        double acc = 0.0;
        for (const auto& [a, b] : arcs_) acc += poisson_cdf(b - phi, c) - poisson_cdf(a - phi, c);
        return acc / kPi;
    }

    Vec<2> gradient(const Vec<2>& x) const override {
        const double r = x.norm();
        if (r < 1e-9) {
            double gx = 0.0, gy = 0.0;
            for (const auto& [a, b] : arcs_) {
                gx += std::sin(b) - std::sin(a);
                gy += std::cos(a) - std::cos(b);
            }
            return Vec<2>(gx / kPi, gy / kPi);
        }
        const double rc = std::min(r, 1.0 - 1e-12);
        const double phi = std::atan2(x[1], x[0]);
        // q(t) = 1 + r^2 - 2 r cos t; dG/dt = (1-r^2)/(2q); dG/dr = sin(t)/q.
        double du_dr = 0.0, du_dphi = 0.0;
        for (const auto& [a, b] : arcs_) {
            const double ta = a - phi, tb = b - phi;
            const double qa = 1.0 + rc * rc - 2.0 * rc * std::cos(ta);
            const double qb = 1.0 + rc * rc - 2.0 * rc * std::cos(tb);
            du_dr += std::sin(tb) / qb - std::sin(ta) / qa;
            du_dphi += 0.5 * (1.0 - rc * rc) * (1.0 / qa - 1.0 / qb);
        }
        du_dr /= kPi;
        du_dphi /= kPi;
        const double cphi = x[0] / r, sphi = x[1] / r;
        return Vec<2>(du_dr * cphi - du_dphi / r * sphi, du_dr * sphi + du_dphi / r * cphi);
    }

  private:
    static constexpr double kPi = 3.141592653589793238462643;

    // Continuous antiderivative of the Poisson kernel at parameter c =
    // (1+r)/(1-r): increases by pi per 2*pi period.
    static double poisson_cdf(double t, double c) {
        const double m = std::floor((t + kPi) / kTwoPi);
        const double tr = t - kTwoPi * m;
        return kPi * m + std::atan(c * std::tan(0.5 * tr));
    }

    std::vector<std::pair<double, double>> arcs_;
};

class CantorArcSet {
  public:
    explicit CantorArcSet(const CantorSpec& spec) : spec_(spec) {
        if (!(spec.ratio > 0.0 && spec.ratio < 1.0)) throw std::invalid_argument("cantor: ratio must lie in (0,1)");
        if (!(spec.arc_length > 0.0 && spec.arc_length < kTwoPi))
            throw std::invalid_argument("cantor: arc length must lie in (0, 2*pi)");
        if (spec.depth < 0 || spec.depth > 40) throw std::invalid_argument("cantor: depth out of range");
        intervals_.push_back({spec.arc_start, spec.arc_start + spec.arc_length});
        const double side = 0.5 * (1.0 - spec.ratio);
        for (int level = 0; level < spec.depth; ++level) {
            std::vector<std::pair<double, double>> next;
            next.reserve(2 * intervals_.size());
            for (const auto& [a, b] : intervals_) {
                const double len = b - a;
                next.push_back({a, a + side * len});
                next.push_back({b - side * len, b});
            }
            intervals_ = std::move(next);
        }
    }

    const CantorSpec& spec() const { return spec_; }
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

    FattenedArcSet fatten(double delta) const { return FattenedArcSet(intervals_, delta); }

  private:
    CantorSpec spec_;
    std::vector<std::pair<double, double>> intervals_;
};

}  // namespace noisytug
