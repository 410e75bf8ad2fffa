// Boundary payoff functions F on the domain boundary, tagged with a
// descriptor so configs and result files can state what was run.  Indicator
// kinds keep an explicit membership test for their target set.
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noisytug/field.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

template <int D>
class BoundaryFunction {
  public:
    BoundaryFunction() : BoundaryFunction(constant(0.0)) {}

    static BoundaryFunction constant(double c) {
        return BoundaryFunction("constant", [c](const Vec<D>&) { return c; });
    }

    static BoundaryFunction linear(const Vec<D>& a, double b = 0.0) {
        return BoundaryFunction("linear", [a, b](const Vec<D>& y) { return a.dot(y) + b; });
    }

    /// The radial reference rho_{D,p} restricted to the boundary.
    static BoundaryFunction radial(double p) {
        return BoundaryFunction("radial", [p](const Vec<D>& y) { return radial_reference<D>(p, y); });
    }

    static BoundaryFunction from_field(FieldPtr<D> f, std::string descriptor = "field") {
        return BoundaryFunction(std::move(descriptor), [f](const Vec<D>& y) { return f->value(y); });
    }

    /// Indicator of an explicitly stored target set.
    static BoundaryFunction indicator(std::function<bool(const Vec<D>&)> member, std::string set_descriptor) {
        BoundaryFunction f("indicator(" + set_descriptor + ")",
                           [member](const Vec<D>& y) { return member(y) ? 1.0 : 0.0; });
        f.member_ = std::move(member);
        return f;
    }

    /// Nearest-point lookup in a value table.
    static BoundaryFunction table(std::vector<std::pair<Vec<D>, double>> entries) {
        if (entries.empty()) throw std::invalid_argument("boundary table must not be empty");
        auto shared = std::make_shared<std::vector<std::pair<Vec<D>, double>>>(std::move(entries));
        return BoundaryFunction("table", [shared](const Vec<D>& y) {
            double best = (shared->front().first - y).squaredNorm();
            double val = shared->front().second;
            for (const auto& [pt, v] : *shared) {
                const double d = (pt - y).squaredNorm();
                if (d < best) {
                    best = d;
                    val = v;
                }
            }
            return val;
        });
    }

    double operator()(const Vec<D>& y) const { return fn_(y); }

    const std::string& descriptor() const { return descriptor_; }

    /// Membership test of the indicator target set (indicator kinds only).
    bool in_target_set(const Vec<D>& y) const {
        if (!member_) throw std::logic_error("boundary function has no stored target set");
        return member_(y);
    }

  private:
    BoundaryFunction(std::string desc, std::function<double(const Vec<D>&)> fn)
        : descriptor_(std::move(desc)), fn_(std::move(fn)) {}

    std::string descriptor_;
    std::function<double(const Vec<D>&)> fn_;
    std::function<bool(const Vec<D>&)> member_;
};

}  // namespace noisytug
