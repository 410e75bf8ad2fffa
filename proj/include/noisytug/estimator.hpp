// Monte Carlo value estimation and the derived experiments: convergence
// sweeps against closed-form references, boundary regularity probes, and the
// porous-set measure-decay experiment.  All estimators draw per-play streams
// from a counter scheme, so results are independent of thread scheduling.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "noisytug/cantor.hpp"
#include "noisytug/engine.hpp"
#include "noisytug/util.hpp"

namespace noisytug {

struct ValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n = 0;
    double cap_hit_fraction = 0.0;
    double fallback_fraction = 0.0;  // plays with at least one gradient fallback
    std::uint64_t fingerprint = 0;
    std::uint64_t seed = 0;
};

/// Mean payoff over n independent plays with per-play streams derived from
/// (seed, play index).  Bit-identical for fixed inputs whatever the thread
/// count; capped plays contribute their running payoff only (terminal
/// component zero) and are reported through cap_hit_fraction.
template <int D>
ValueEstimate estimate_value(const GameConfig<D>& cfg, const Strategy<D>& s_one, const Strategy<D>& s_two, long n,
                             std::uint64_t seed, int threads = 1, std::uint64_t fingerprint = 0) {
    if (n < 2) throw std::invalid_argument("estimate_value: n must be at least 2");
    std::vector<double> payoffs(n);
    std::vector<long> caps(resolve_threads(threads), 0), falls(resolve_threads(threads), 0);
    parallel_for(n, resolve_threads(threads), [&](int chunk, long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
            const Outcome<D> o = cfg.shrink ? play_shrinking(cfg, s_one, s_two, rng) : play(cfg, s_one, s_two, rng);
            payoffs[i] = o.payoff;
            if (!o.terminated && !o.boundary_proxy) ++caps[chunk];
            if (o.gradient_fallbacks > 0) ++falls[chunk];
        }
    });
    long double acc = 0.0L;
    for (double p : payoffs) acc += p;
    const double mean = static_cast<double>(acc / n);
    long double var = 0.0L;
    for (double p : payoffs) var += (p - mean) * (p - mean);
    ValueEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(static_cast<double>(var) / (n - 1) / n);
    est.n = n;
    long cap_total = 0, fall_total = 0;
    for (long c : caps) cap_total += c;
    for (long f : falls) fall_total += f;
    est.cap_hit_fraction = static_cast<double>(cap_total) / n;
    est.fallback_fraction = static_cast<double>(fall_total) / n;
    est.fingerprint = fingerprint;
    est.seed = seed;
    return est;
}

struct SweepRow {
    double eps;
    double mean;
    double std_error;
    double reference;
    double abs_error;
    double cap_hit_fraction;
    long n;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    double fitted_slope = 0.0;  // least-squares slope of log|error| vs log eps
};

inline double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    for (const auto& [x, y] : xy) {
        if (!(y > 0.0)) continue;
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Runs estimate_value across an eps list against a closed-form reference at
/// the start point and fits the log-log error slope.
template <int D>
SweepTable convergence_sweep(GameConfig<D> cfg, const std::vector<double>& eps_list, const Strategy<D>& s_one,
                             const Strategy<D>& s_two, const ScalarField<D>& reference, long n, std::uint64_t seed,
                             int threads = 1, std::uint64_t fingerprint = 0) {
    SweepTable table;
    const double ref = reference.value(cfg.start);
    for (std::size_t r = 0; r < eps_list.size(); ++r) {
        cfg.eps = eps_list[r];
        const auto est =
            estimate_value(cfg, s_one, s_two, n, seed + 0x1000 * static_cast<std::uint64_t>(r), threads, fingerprint);
        table.rows.push_back({cfg.eps, est.mean, est.std_error, ref, std::abs(est.mean - ref), est.cap_hit_fraction, n});
    }
    std::vector<std::pair<double, double>> xy;
    for (const auto& row : table.rows) xy.push_back({row.eps, row.abs_error});
    table.fitted_slope = fit_loglog_slope(xy);
    return table;
}

enum class ProbeStyle {
    pull_to_target,  // aim straight at the target boundary point
    exterior_cone    // aim at a receding point outside the domain behind the target
};

struct ProbeOpponent {
    std::string name;
    double success = 0.0;
    double std_error = 0.0;
};

struct ProbeResult {
    double theta_min = 0.0;  // worst success frequency over the opponent panel
    double std_error = 0.0;
    std::vector<ProbeOpponent> panel;
    long n = 0;
};

namespace detail {

/// Pulls toward a target that recedes outside the domain behind y: the
/// cone-property chase.  The target sits at y + max(chi*|x-y|, floor) along
/// the outward direction.
template <int D>
class ExteriorPullStrategy final : public Strategy<D> {
  public:
    ExteriorPullStrategy(const Vec<D>& y, const Vec<D>& outward, double chi = 0.5)
        : y_(y), outward_(outward.normalized()), chi_(chi) {}

    Vec<D> move(const History<D>& h, double eps, MoveContext&) const override {
        const Vec<D>& x = h.current();
        const double r = (x - y_).norm();
        const Vec<D> target = y_ + std::max(chi_ * r, 4.0 * eps) * outward_;
        const Vec<D> d = target - x;
        const double n = d.norm();
        if (n < eps) return d;
        return (eps / n) * d;
    }

    std::optional<Vec<D>> exit_preference(const History<D>& h, double, MoveContext&) const override {
        const Vec<D> d = y_ - h.current();
        const double n = d.norm();
        if (n < 1e-300) return std::nullopt;
        return Vec<D>(d / n);
    }

  private:
    Vec<D> y_;
    Vec<D> outward_;
    double chi_;
};

}  // namespace detail

/// Estimates the probability that player one forces termination within
/// delta of the boundary target y against each member of a fixed adversary
/// panel (gradient-away, pull-to-far-boundary, uniform-random); reports the
/// panel minimum.  Player one chases y directly (inner-component targets) or
/// through a receding exterior target (cone-style boundary points).
template <int D>
ProbeResult regularity_probe(const Domain<D>& domain, const NoiseMeasure<D>& mu, const GameConstants& constants,
                             const Vec<D>& y, double delta, double eps, long n, std::uint64_t seed,
                             const Vec<D>& start, ProbeStyle style, double p_for_fields, int threads = 1) {
    GameConfig<D> cfg{domain, mu, constants};
    cfg.eps = eps;
    cfg.payoff = BoundaryFunction<D>::constant(0.0);  // payoff unused; the probe scores locations
    cfg.start = start;

    StrategyPtr<D> chaser;
    if (style == ProbeStyle::pull_to_target) {
        chaser = std::make_shared<PullTowardStrategy<D>>(y);
    } else {
        if ((y - start).norm() < 1e-12)
            throw std::invalid_argument("regularity_probe: start must differ from the target");
        chaser = std::make_shared<detail::ExteriorPullStrategy<D>>(y, (y - start).normalized());
    }

    auto radial = std::make_shared<RadialField<D>>(p_for_fields);
    // Far boundary point: the sampled boundary point farthest from y.
    Vec<D> far = domain.nearest_boundary_point(start);
    {
        const auto [lo, hi] = domain.bounding_box();
        const Vec<D> anchor = 0.5 * (lo + hi);
        for (const auto& w : shared_directions<D>(128)) {
            const Vec<D> probe = anchor + domain.diameter() * w;
            const Vec<D> b = domain.nearest_boundary_point(probe);
            if ((b - y).norm() > (far - y).norm()) far = b;
        }
    }
    std::vector<std::pair<std::string, StrategyPtr<D>>> panel = {
        {"gradient-away", std::make_shared<GradientStrategy<D>>(radial, +1)},
        {"pull-to-far-boundary", std::make_shared<PullTowardStrategy<D>>(far)},
        {"uniform-random", std::make_shared<UniformRandomStrategy<D>>()},
    };

    ProbeResult result;
    result.n = n;
    result.theta_min = 1.0;
    for (std::size_t oi = 0; oi < panel.size(); ++oi) {
        std::vector<int> hits(n, 0);
        parallel_for(n, resolve_threads(threads), [&](int, long lo, long hi) {
            for (long i = lo; i < hi; ++i) {
                Rng rng = Rng::stream(seed + 0x5000 * (oi + 1), static_cast<std::uint64_t>(i));
                const Outcome<D> o = play(cfg, *chaser, *panel[oi].second, rng);
                hits[i] = (o.terminated && ((*o.terminal) - y).norm() <= delta) ? 1 : 0;
            }
        });
        long total = 0;
        for (int h : hits) total += h;
        const double freq = static_cast<double>(total) / n;
        const double se = std::sqrt(std::max(freq * (1.0 - freq), 1.0 / n) / n);
        result.panel.push_back({panel[oi].first, freq, se});
        if (freq < result.theta_min) {
            result.theta_min = freq;
            result.std_error = se;
        }
    }
    return result;
}

struct PorousRow {
    double delta;
    double eps;
    double estimate;  // panel-minimum mean indicator payoff
    double std_error;
    std::string binding_opponent;
    long n;
};

struct PorousTable {
    std::vector<PorousRow> rows;
    double fitted_exponent = 0.0;  // slope of log(estimate) vs log(delta)
    double exponent_std_error = 0.0;
    bool strictly_decreasing = false;
    double porosity = 0.0;
};

/// Pulls toward the circle point at the nearest angle of a fixed union of
/// angular target arcs (re-aimed every move from the current position).
class AngularChaseStrategy final : public Strategy<2> {
  public:
    explicit AngularChaseStrategy(std::vector<std::pair<double, double>> target_arcs)
        : arcs_(std::move(target_arcs)) {
        if (arcs_.empty()) throw std::invalid_argument("angular chase: no target arcs");
    }

    Vec<2> move(const History<2>& h, double eps, MoveContext&) const override {
        const Vec<2> d = target(h.current()) - h.current();
        const double n = d.norm();
        if (n < eps) return d;
        return (eps / n) * d;
    }

    std::optional<Vec<2>> exit_preference(const History<2>& h, double, MoveContext&) const override {
        const Vec<2> d = target(h.current()) - h.current();
        const double n = d.norm();
        if (n < 1e-300) return std::nullopt;
        return Vec<2>(d / n);
    }

  private:
    Vec<2> target(const Vec<2>& x) const {
        const double a = FattenedArcSet::nearest_arc_angle(arcs_, std::atan2(x[1], x[0]));
        return Vec<2>(std::cos(a), std::sin(a));
    }

    std::vector<std::pair<double, double>> arcs_;
};

/// Avoidance strategy for indicator targets on the circle: approach the
/// boundary only through funnels over safe gaps.  The target sits at the
/// nearest safe-gap angle, at a depth proportional to the angular distance
/// still to cover, so the play stalls radially while over the target set
/// and descends only where an exit is clean.
class FunnelAvoidStrategy final : public Strategy<2> {
  public:
    FunnelAvoidStrategy(std::vector<std::pair<double, double>> safe_arcs, double band, double slope = 1.0)
        : arcs_(std::move(safe_arcs)), band_(band), slope_(slope) {
        if (arcs_.empty()) throw std::invalid_argument("funnel avoid: no safe arcs");
    }

    Vec<2> move(const History<2>& h, double eps, MoveContext&) const override {
        const Vec<2> d = target(h.current()) - h.current();
        const double n = d.norm();
        if (n < eps) return d;
        return (eps / n) * d;
    }

    std::optional<Vec<2>> exit_preference(const History<2>& h, double, MoveContext&) const override {
        const Vec<2> d = target(h.current()) - h.current();
        const double n = d.norm();
        if (n < 1e-300) return std::nullopt;
        return Vec<2>(d / n);
    }

  private:
    Vec<2> target(const Vec<2>& x) const {
        const double theta = std::atan2(x[1], x[0]);
        const double a = FattenedArcSet::nearest_arc_angle(arcs_, theta);
        const double depth = std::max(2.0 * band_, slope_ * std::abs(a - theta));
        const double r = std::max(0.05, 1.0 - depth);
        return Vec<2>(r * std::cos(a), r * std::sin(a));
    }

    std::vector<std::pair<double, double>> arcs_;
    double band_;
    double slope_;
};

/// Measure-decay experiment: the value at the disc center of the indicator
/// of the fattened Cantor set, with the set-seeking player fixed and an
/// avoidance panel on the other side; one row per delta = 3^-k, finishing
/// with a power-law fit of the panel-minimum estimates.
inline PorousTable porous_measure_decay(const CantorSpec& spec, const NoiseMeasure<2>& mu,
                                        const GameConstants& constants, const std::vector<int>& ks, double eps_divisor,
                                        long n, std::uint64_t seed, int threads = 1) {
    if (!(eps_divisor >= 1.0)) throw std::invalid_argument("porous experiment: eps divisor must be >= 1");
    const CantorArcSet set(spec);
    PorousTable table;
    table.porosity = spec.porosity();
    const Domain<2> disc = Domain<2>::ball(Vec<2>::Zero(), 1.0);

    for (std::size_t r = 0; r < ks.size(); ++r) {
        const double delta = std::pow(3.0, -ks[r]);
        const double eps = delta / eps_divisor;
        const auto fat = std::make_shared<FattenedArcSet>(set.fatten(delta));
        GameConfig<2> cfg{disc, mu, constants};
        cfg.eps = eps;
        cfg.start = Vec<2>::Zero();
        cfg.payoff = BoundaryFunction<2>::indicator(
            [fat](const Vec<2>& y) { return fat->contains_angle(std::atan2(y[1], y[0])); }, "cantor-neighborhood");

        AngularChaseStrategy chaser(fat->intervals());
        // Avoidance targets: gap interiors wide enough that a termination
        // there cannot be steered back into the set (the band radius).
        const double safe_margin = constants.alpha * eps;
        auto cores = fat->gap_cores(safe_margin);
        if (cores.empty()) cores.push_back({fat->largest_gap_midpoint(), fat->largest_gap_midpoint()});
        const double gap_mid = fat->largest_gap_midpoint();
        std::vector<std::pair<std::string, StrategyPtr<2>>> panel = {
            {"pull-to-nearest-safe-gap", std::make_shared<AngularChaseStrategy>(std::move(cores))},
            {"pull-to-largest-gap",
             std::make_shared<PullTowardStrategy<2>>(Vec<2>(std::cos(gap_mid), std::sin(gap_mid)))},
            {"uniform-random", std::make_shared<UniformRandomStrategy<2>>()},
        };

        PorousRow row{delta, eps, std::numeric_limits<double>::infinity(), 0.0, "", n};
        for (std::size_t oi = 0; oi < panel.size(); ++oi) {
            const auto est = estimate_value(cfg, chaser, *panel[oi].second, n, seed + 0x9000 * (oi + 1), threads);
            if (est.mean < row.estimate) {
                row.estimate = est.mean;
                row.std_error = est.std_error;
                row.binding_opponent = panel[oi].first;
            }
        }
        table.rows.push_back(row);
    }

    table.strictly_decreasing = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (!(table.rows[i].estimate < table.rows[i - 1].estimate)) table.strictly_decreasing = false;

    // Weighted least squares of log(estimate) on log(delta); the slope
    // standard error comes from the propagated per-row uncertainties.
    double sw = 0, swx = 0;
    std::vector<double> lx, ly, wts;
    for (const auto& row : table.rows) {
        if (!(row.estimate > 0.0)) continue;
        const double sigma = std::max(row.std_error / row.estimate, 1e-6);
        lx.push_back(std::log(row.delta));
        ly.push_back(std::log(row.estimate));
        wts.push_back(1.0 / (sigma * sigma));
        sw += wts.back();
        swx += wts.back() * lx.back();
    }
    if (lx.size() >= 2) {
        const double xbar = swx / sw;
        double num = 0, den = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            num += wts[i] * (lx[i] - xbar) * ly[i];
            den += wts[i] * (lx[i] - xbar) * (lx[i] - xbar);
        }
        table.fitted_exponent = num / den;
        table.exponent_std_error = 1.0 / std::sqrt(den);
    }
    return table;
}

}  // namespace noisytug
