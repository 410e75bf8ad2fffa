// The game engine: one play of tug of war with noise under a chosen turn
// variant.  Move rule: the turn's mover picks v with |v| <= eps and the
// engine adds a noise vector drawn from the push-forward of the noise
// measure aligned with v.  Termination: once the position is within
// alpha*eps of the boundary, the mover selects an exit point inside that
// budget and the play ends with the boundary payoff (plus any accumulated
// running payoff).
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisytug/geometry.hpp"
#include "noisytug/noise.hpp"
#include "noisytug/payoff.hpp"
#include "noisytug/strategy.hpp"

namespace noisytug {

enum class Variant { random_turn, alternating, spencer };

enum class Mover { player_one, player_two, direction_phase };

/// Deterministic halving schedule for the shrinking-step game: the step size
/// eps0 * 2^-m, with m raised whenever the position first crosses a dyadic
/// distance threshold or enters the termination band of the current step.
struct ShrinkSchedule {
    double eps0;
};

template <int D>
struct GameConfig {
    Domain<D> domain;
    NoiseMeasure<D> noise;
    GameConstants constants;
    double eps = 0.01;
    Variant variant = Variant::random_turn;
    double spencer_p = std::numeric_limits<double>::infinity();  // direction-phase rate 1/p
    BoundaryFunction<D> payoff;
    std::function<double(const Vec<D>&)> running_payoff;  // f, accrued as f(x_{k-1}) eps^2
    Vec<D> start = Vec<D>::Zero();
    long step_cap = 0;  // 0: 50 * eps^-2 * diam^2
    std::optional<ShrinkSchedule> shrink;
    bool record_history = false;
    bool record_trace = false;

    long resolved_step_cap(double eps_now) const {
        if (step_cap > 0) return step_cap;
        const double d = domain.diameter();
        return static_cast<long>(50.0 * d * d / (eps_now * eps_now)) + 1;
    }
};

template <int D>
struct TraceStep {
    long step;
    Mover mover;
    Vec<D> v;
    Vec<D> z;
    Vec<D> x;
    bool exit;
};

template <int D>
struct Outcome {
    std::optional<Vec<D>> terminal;  // boundary point when terminated
    double payoff = 0.0;
    long steps = 0;
    bool terminated = false;
    bool boundary_proxy = false;  // shrinking game: payoff read at nearest boundary point
    bool shrink_underflow = false;
    long clamped_moves = 0;
    long gradient_fallbacks = 0;
    std::uint64_t rng_seed = 0;
    std::optional<History<D>> history;
    std::optional<std::vector<TraceStep<D>>> trace;
};

/// Turn decision for step k.  Random turns toss a fair coin; alternating
/// turns give player one the odd steps; the interpolated variant enters a
/// direction-selection phase with probability 1/spencer_p and otherwise
/// tosses the tug coin.  spencer_p = inf consumes no phase draw.
inline Mover turn_order(Variant variant, double spencer_p, long k, Rng& rng) {
    switch (variant) {
        case Variant::random_turn:
            return rng.coin() ? Mover::player_one : Mover::player_two;
        case Variant::alternating:
            return (k % 2 == 1) ? Mover::player_one : Mover::player_two;
        case Variant::spencer:
            if (!std::isinf(spencer_p) && rng.u01() < 1.0 / spencer_p) return Mover::direction_phase;
            return rng.coin() ? Mover::player_one : Mover::player_two;
    }
    return Mover::player_one;
}

namespace detail {

template <int D>
Vec<D> clamp_move(Vec<D> v, double eps, Outcome<D>& out) {
    const double n2 = v.squaredNorm();
    if (n2 > eps * eps) {
        if (n2 > eps * eps * (1.0 + 1e-9)) ++out.clamped_moves;
        v *= eps / std::sqrt(n2);
    }
    return v;
}

template <int D>
void check_finite(const Vec<D>& x, long k) {
    for (int i = 0; i < D; ++i)
        if (!std::isfinite(x[i]))
            throw std::runtime_error("play: non-finite position at step " + std::to_string(k));
}

}  // namespace detail

/// One play of the fixed-step game.  Pure function of (config, strategies,
/// rng stream): identical inputs give bit-identical outcomes.
template <int D>
Outcome<D> play(const GameConfig<D>& cfg, const Strategy<D>& s_one, const Strategy<D>& s_two, Rng& rng) {
    if (cfg.shrink) throw std::invalid_argument("play: config has a shrink schedule; use play_shrinking");
    const double eps = cfg.eps;
    if (!(eps > 0.0)) throw std::invalid_argument("play: eps must be positive");
    if (!cfg.domain.contains(cfg.start)) throw std::invalid_argument("play: start position must lie inside the domain");
    const double band = cfg.constants.alpha * eps;
    const long cap = cfg.resolved_step_cap(eps);

    Outcome<D> out;
    History<D> hist;
    hist.start(cfg.start, cfg.record_history);
    MoveContext ctx{rng};
    if (cfg.record_trace) out.trace.emplace();

    double running = 0.0;
    for (long k = 1;; ++k) {
        if (k > cap) {
            out.steps = k - 1;
            out.terminated = false;  // cap: terminal component is zero
            break;
        }
        const Vec<D> x = hist.current();
        if (cfg.running_payoff) running += cfg.running_payoff(x) * eps * eps;

        const Mover mover = turn_order(cfg.variant, cfg.spencer_p, k, rng);
        if (cfg.domain.boundary_distance(x) <= band) {
            // Terminal move: the mover picks an exit point within the band
            // budget, steered by its preference direction (a direction phase
            // terminates through the vector chooser, player two).
            const Strategy<D>& m = (mover == Mover::player_one) ? s_one : s_two;
            const auto pref = m.exit_preference(hist, eps, ctx);
            const Vec<D> y = pref ? cfg.domain.exit_point(x, band, *pref) : cfg.domain.exit_point(x, band);
            hist.record_move(Vec<D>::Zero(), y);
            hist.mark_terminated();
            if (out.trace) out.trace->push_back({k, mover, Vec<D>::Zero(), Vec<D>::Zero(), y, true});
            out.steps = k;
            out.terminated = true;
            out.terminal = y;
            running += cfg.payoff(y);
            break;
        }

        Vec<D> v, z;
        if (mover == Mover::direction_phase) {
            // Player two proposes a unit-eps direction, player one signs it;
            // no noise is added on these steps.
            Vec<D> dir = s_two.move(hist, eps, ctx);
            const double n = dir.norm();
            dir = (n < 1e-300) ? Vec<D>(eps * unit_axis<D>(0)) : Vec<D>((eps / n) * dir);
            const int sigma = s_one.choose_sign(hist, dir, ctx);
            v = sigma * dir;
            z.setZero();
        } else {
            const Strategy<D>& m = (mover == Mover::player_one) ? s_one : s_two;
            v = detail::clamp_move<D>(m.move(hist, eps, ctx), eps, out);
            z = cfg.noise.sample(v, rng);
        }
        const Vec<D> xn = x + v + z;
        detail::check_finite<D>(xn, k);
        hist.record_move(v, xn);
        if (out.trace) out.trace->push_back({k, mover, v, z, xn, false});
    }

    out.payoff = running;
    out.gradient_fallbacks = ctx.gradient_fallbacks;
    if (cfg.record_history) out.history = hist;
    return out;
}

/// The shrinking-step game with the deterministic halving schedule.  The
/// step size is re-chosen (never grown) whenever the position enters the
/// current termination band or first crosses a dyadic boundary-distance
/// threshold, always restoring dist > alpha * eps, so the play never
/// terminates by boundary contact.  It stops at the step cap and the payoff
/// is read at the nearest boundary point of the final position — a per-play
/// proxy for the boundary limit value, flagged in the outcome.
template <int D>
Outcome<D> play_shrinking(const GameConfig<D>& cfg, const Strategy<D>& s_one, const Strategy<D>& s_two, Rng& rng) {
    if (!cfg.shrink) throw std::invalid_argument("play_shrinking: config needs a shrink schedule");
    if (cfg.variant == Variant::spencer)
        throw std::invalid_argument("play_shrinking: direction-selection variant not supported");
    if (!cfg.domain.contains(cfg.start))
        throw std::invalid_argument("play_shrinking: start position must lie inside the domain");
    const double eps0 = cfg.shrink->eps0;
    if (!(eps0 > 0.0)) throw std::invalid_argument("play_shrinking: eps0 must be positive");
    const long cap = cfg.step_cap > 0 ? cfg.step_cap : cfg.resolved_step_cap(eps0);
    const double alpha = cfg.constants.alpha;

    Outcome<D> out;
    History<D> hist;
    hist.start(cfg.start, cfg.record_history);
    MoveContext ctx{rng};
    if (cfg.record_trace) out.trace.emplace();

    int level = 0;       // eps = eps0 * 2^-level
    int next_dyadic = 1; // next threshold 2^-m to trip
    double eps = eps0;
    double running = 0.0;

    const auto reschedule = [&](double dist) {
        while (std::exp2(-next_dyadic) >= dist) ++next_dyadic;
        while (alpha * eps >= dist) {
            ++level;
            eps = eps0 * std::exp2(-level);
            if (eps < 1e-12) return false;
        }
        return true;
    };

    if (!reschedule(cfg.domain.boundary_distance(cfg.start))) {
        out.shrink_underflow = true;
    }
    long k = 0;
    while (!out.shrink_underflow && k < cap) {
        ++k;
        const Vec<D> x = hist.current();
        if (cfg.running_payoff) running += cfg.running_payoff(x) * eps * eps;
        const Mover mover = turn_order(cfg.variant, cfg.spencer_p, k, rng);
        const Strategy<D>& m = (mover == Mover::player_one) ? s_one : s_two;
        Vec<D> v = detail::clamp_move<D>(m.move(hist, eps, ctx), eps, out);
        Vec<D> z = cfg.noise.sample(v, rng);
        const Vec<D> xn = x + v + z;
        detail::check_finite<D>(xn, k);
        hist.record_move(v, xn);
        if (out.trace) out.trace->push_back({k, mover, v, z, xn, false});

        const double dist = cfg.domain.boundary_distance(xn);
        const bool trip = dist <= alpha * eps || std::exp2(-next_dyadic) >= dist;
        if (trip && !reschedule(dist)) out.shrink_underflow = true;
    }

    out.steps = k;
    out.terminated = false;
    out.boundary_proxy = true;
    const Vec<D> proxy = cfg.domain.nearest_boundary_point(hist.current());
    out.terminal = proxy;
    out.payoff = running + cfg.payoff(proxy);
    out.gradient_fallbacks = ctx.gradient_fallbacks;
    if (cfg.record_history) out.history = hist;
    return out;
}

}  // namespace noisytug
