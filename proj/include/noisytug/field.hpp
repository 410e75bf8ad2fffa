// Scalar reference fields with analytic gradients.  Gradient strategies and
// boundary payoffs are built from these; a numerical wrapper handles fields
// only known through their values.
#pragma once

#include <functional>
#include <memory>
#include <string>

#include "noisytug/calculus.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

template <int D>
class ScalarField {
  public:
    virtual ~ScalarField() = default;
    virtual double value(const Vec<D>& x) const = 0;
    virtual Vec<D> gradient(const Vec<D>& x) const = 0;
    /// Hessian; closed forms where available, central differences otherwise.
    virtual Mat<D> hessian(const Vec<D>& x) const {
        const double h = 1e-4 * (1.0 + x.norm());
        Mat<D> H;
        for (int i = 0; i < D; ++i) {
            const Vec<D> ei = unit_axis<D>(i) * h;
            H.col(i) = (gradient(x + ei) - gradient(x - ei)) / (2.0 * h);
        }
        return 0.5 * (H + H.transpose());
    }
};

template <int D>
using FieldPtr = std::shared_ptr<const ScalarField<D>>;

/// u(x) = (a, x) + b.
template <int D>
class LinearField final : public ScalarField<D> {
  public:
    LinearField(const Vec<D>& a, double b = 0.0) : a_(a), b_(b) {}
    double value(const Vec<D>& x) const override { return a_.dot(x) + b_; }
    Vec<D> gradient(const Vec<D>&) const override { return a_; }
    Mat<D> hessian(const Vec<D>&) const override { return Mat<D>::Zero(); }

  private:
    Vec<D> a_;
    double b_;
};

/// u(x) = x^T A x + (xi, x) + c.
template <int D>
class QuadraticField final : public ScalarField<D> {
  public:
    QuadraticField(const Mat<D>& A, const Vec<D>& xi = Vec<D>::Zero(), double c = 0.0)
        : model_(A, xi), c_(c) {}
    explicit QuadraticField(const QuadraticModel<D>& m, double c = 0.0) : model_(m), c_(c) {}

    double value(const Vec<D>& x) const override { return model_(x) + c_; }
    Vec<D> gradient(const Vec<D>& x) const override { return 2.0 * model_.A * x + model_.xi; }
    Mat<D> hessian(const Vec<D>&) const override { return 2.0 * model_.A; }
    const QuadraticModel<D>& model() const { return model_; }

  private:
    QuadraticModel<D> model_;
    double c_;
};

/// The radial p-harmonic reference rho_{D,p}, singular at the origin.
template <int D>
class RadialField final : public ScalarField<D> {
  public:
    explicit RadialField(double p) : p_(p), log_(std::abs(p - D) < 1e-9), c_(radial_exponent(p, D)) {}

    double value(const Vec<D>& x) const override { return radial_reference<D>(p_, x); }

    Vec<D> gradient(const Vec<D>& x) const override {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) throw std::domain_error("radial field: singular at the origin");
        if (log_) return x / r2;
        return c_ * std::pow(r2, 0.5 * c_ - 1.0) * x;
    }

    Mat<D> hessian(const Vec<D>& x) const override {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) throw std::domain_error("radial field: singular at the origin");
        if (log_) return Mat<D>::Identity() / r2 - 2.0 * (x * x.transpose()) / (r2 * r2);
        const double rc2 = std::pow(r2, 0.5 * c_ - 1.0);
        return c_ * rc2 * Mat<D>::Identity() + c_ * (c_ - 2.0) * rc2 / r2 * (x * x.transpose());
    }

    double p() const { return p_; }

  private:
    double p_;
    bool log_;
    double c_;
};

/// Wraps a value-only callable; gradient and Hessian fall back to central
/// differences with the shared default step.
template <int D>
class NumericalField final : public ScalarField<D> {
  public:
    explicit NumericalField(std::function<double(const Vec<D>&)> f, double h = -1.0) : f_(std::move(f)), h_(h) {}

    double value(const Vec<D>& x) const override { return f_(x); }

    Vec<D> gradient(const Vec<D>& x) const override {
        const double h = step(x);
        Vec<D> g;
        for (int i = 0; i < D; ++i) {
            const Vec<D> ei = unit_axis<D>(i) * h;
            g[i] = (f_(x + ei) - f_(x - ei)) / (2.0 * h);
        }
        return g;
    }

  private:
    double step(const Vec<D>& x) const { return h_ > 0.0 ? h_ : 1e-4 * (1.0 + x.norm()); }

    std::function<double(const Vec<D>&)> f_;
    double h_;
};

}  // namespace noisytug
