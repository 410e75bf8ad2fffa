// Player strategies: deterministic (or stream-seeded) maps from the game
// history to a move of length at most eps.  Built-ins are Markov — they read
// only the current position — but the interface passes the full history so
// custom strategies can use it (enable history recording in the game config
// if they need more than the running summary).
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "noisytug/calculus.hpp"
#include "noisytug/field.hpp"
#include "noisytug/noise.hpp"
#include "noisytug/rng.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

/// Game history h_k = (x0, v1, x1, ..., vk, xk).  The running summary
/// (current position, last move, step count) is always maintained; the full
/// sequence is stored only when recording is on.  After termination the
/// position is frozen and further moves are zero by convention.
template <int D>
class History {
  public:
    void start(const Vec<D>& x0, bool record) {
        x0_ = current_ = x0;
        last_move_.setZero();
        steps_ = 0;
        terminated_ = false;
        recording_ = record;
        positions_.clear();
        moves_.clear();
        if (recording_) positions_.push_back(x0);
    }

    void record_move(const Vec<D>& v, const Vec<D>& x_new) {
        ++steps_;
        last_move_ = v;
        current_ = x_new;
        if (recording_) {
            moves_.push_back(v);
            positions_.push_back(x_new);
        }
    }

    void mark_terminated() { terminated_ = true; }

    const Vec<D>& start_point() const { return x0_; }
    const Vec<D>& current() const { return current_; }
    const Vec<D>& last_move() const { return last_move_; }
    long step_count() const { return steps_; }
    bool terminated() const { return terminated_; }
    bool recording() const { return recording_; }

    /// Recorded positions x0..xk (needs recording enabled).
    const std::vector<Vec<D>>& positions() const { return positions_; }
    const std::vector<Vec<D>>& moves() const { return moves_; }

    /// Position at step j under the freezing convention.
    Vec<D> position_at(std::size_t j) const {
        if (j >= positions_.size()) return positions_.back();
        return positions_[j];
    }

  private:
    Vec<D> x0_ = Vec<D>::Zero(), current_ = Vec<D>::Zero(), last_move_ = Vec<D>::Zero();
    long steps_ = 0;
    bool terminated_ = false, recording_ = false;
    std::vector<Vec<D>> positions_, moves_;
};

/// Per-play scratch handed to strategies: the play's random stream plus
/// counters for anomalous moves, aggregated into the outcome.
struct MoveContext {
    Rng& rng;
    long gradient_fallbacks = 0;
};

template <int D>
class Strategy {
  public:
    virtual ~Strategy() = default;

    /// The move vector for the next step; the engine clamps |v| to eps.
    virtual Vec<D> move(const History<D>& h, double eps, MoveContext& ctx) const = 0;

    /// Direction the player prefers for a terminating boundary choice;
    /// nullopt means take the nearest exit.  Defaults to the move direction.
    virtual std::optional<Vec<D>> exit_preference(const History<D>& h, double eps, MoveContext& ctx) const {
        Vec<D> v = move(h, eps, ctx);
        const double n = v.norm();
        if (n < 1e-300) return std::nullopt;
        return Vec<D>(v / n);
    }

    /// Sign choice for a direction-selection step; +1 on ties.
    virtual int choose_sign(const History<D>&, const Vec<D>&, MoveContext&) const { return +1; }
};

template <int D>
using StrategyPtr = std::shared_ptr<const Strategy<D>>;

/// Moves eps * grad u / |grad u| (sign = +1, the maximizer's variant) or its
/// negation (sign = -1).  A vanishing gradient falls back to a uniform
/// random direction for that move and bumps the context counter.
template <int D>
class GradientStrategy final : public Strategy<D> {
  public:
    GradientStrategy(FieldPtr<D> field, int sign = +1) : field_(std::move(field)), sign_(sign < 0 ? -1 : 1) {}

    Vec<D> move(const History<D>& h, double eps, MoveContext& ctx) const override {
        const Vec<D> g = field_->gradient(h.current());
        const double n = g.norm();
        if (n <= 1e-8) {
            ++ctx.gradient_fallbacks;
            return eps * sample_unit_vector<D>(ctx.rng);
        }
        return (sign_ * eps / n) * g;
    }

    std::optional<Vec<D>> exit_preference(const History<D>& h, double, MoveContext&) const override {
        const Vec<D> g = field_->gradient(h.current());
        const double n = g.norm();
        if (n <= 1e-8) return std::nullopt;
        return Vec<D>((sign_ / n) * g);
    }

  private:
    FieldPtr<D> field_;
    int sign_;
};

/// Moves straight toward a fixed target, or by the exact remaining vector
/// once closer than eps.
template <int D>
class PullTowardStrategy final : public Strategy<D> {
  public:
    explicit PullTowardStrategy(const Vec<D>& target) : target_(target) {}

    Vec<D> move(const History<D>& h, double eps, MoveContext&) const override {
        const Vec<D> d = target_ - h.current();
        const double n = d.norm();
        if (n == 0.0) return Vec<D>::Zero();
        if (n < eps) return d;
        return (eps / n) * d;
    }

    std::optional<Vec<D>> exit_preference(const History<D>& h, double, MoveContext&) const override {
        const Vec<D> d = target_ - h.current();
        const double n = d.norm();
        if (n < 1e-300) return std::nullopt;
        return Vec<D>(d / n);
    }

  private:
    Vec<D> target_;
};

/// Length-eps move in a uniformly random direction; no exit preference.
template <int D>
class UniformRandomStrategy final : public Strategy<D> {
  public:
    Vec<D> move(const History<D>&, double eps, MoveContext& ctx) const override {
        return eps * sample_unit_vector<D>(ctx.rng);
    }

    std::optional<Vec<D>> exit_preference(const History<D>&, double, MoveContext&) const override {
        return std::nullopt;
    }
};

/// Sign chooser for direction-selection turns: the sign making the move
/// align with grad u (against it when sign = -1); +1 on ties.  Its move()
/// (used if it ever wins an ordinary turn) is the gradient move.
template <int D>
class SignChooserStrategy final : public Strategy<D> {
  public:
    explicit SignChooserStrategy(FieldPtr<D> field, int sign = +1)
        : field_(std::move(field)), sign_(sign < 0 ? -1 : 1) {}

    Vec<D> move(const History<D>& h, double eps, MoveContext& ctx) const override {
        return GradientStrategy<D>(field_, sign_).move(h, eps, ctx);
    }

    int choose_sign(const History<D>& h, const Vec<D>& v, MoveContext&) const override {
        const double d = sign_ * field_->gradient(h.current()).dot(v);
        return d >= 0.0 ? +1 : -1;
    }

  private:
    FieldPtr<D> field_;
    int sign_;
};

/// Direction chooser for direction-selection turns: proposes a unit vector
/// orthogonal to grad u (dimension 2), the direction that makes the sign
/// choice worthless to the opponent.
template <int D>
class OrthogonalDirectionStrategy final : public Strategy<D> {
    static_assert(D == 2, "orthogonal direction choice is defined in dimension 2");

  public:
    explicit OrthogonalDirectionStrategy(FieldPtr<D> field) : field_(std::move(field)) {}

    Vec<D> move(const History<D>& h, double eps, MoveContext& ctx) const override {
        const Vec<D> g = field_->gradient(h.current());
        const double n = g.norm();
        if (n <= 1e-8) return eps * sample_unit_vector<D>(ctx.rng);
        return (eps / n) * Vec<2>(-g[1], g[0]);
    }

  private:
    FieldPtr<D> field_;
};

/// Plays the exact optimal move of the local quadratic model of the field at
/// the current position (second-order Taylor), maximizing or minimizing the
/// one-step expectation.
template <int D>
class LocalQuadraticStrategy final : public Strategy<D> {
  public:
    LocalQuadraticStrategy(FieldPtr<D> field, GameConstants constants, bool maximize = true)
        : field_(std::move(field)), constants_(constants), maximize_(maximize) {}

    Vec<D> move(const History<D>& h, double eps, MoveContext& ctx) const override {
        const Vec<D>& x = h.current();
        const Vec<D> xi = field_->gradient(x);
        if (xi.norm() <= 1e-8) {
            ++ctx.gradient_fallbacks;
            return eps * sample_unit_vector<D>(ctx.rng);
        }
        const QuadraticModel<D> model(0.5 * field_->hessian(x), xi);
        return optimal_move<D>(model, eps, constants_, maximize_).v;
    }

  private:
    FieldPtr<D> field_;
    GameConstants constants_;
    bool maximize_;
};

}  // namespace noisytug
