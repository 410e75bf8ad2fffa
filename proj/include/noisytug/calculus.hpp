// Differential operators (ordinary, infinity, 1- and game p-Laplacian) by
// central differences, the quadratic one-step expectation machinery, optimal
// moves on the epsilon-ball, and radial p-harmonic reference solutions.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "noisytug/noise.hpp"
#include "noisytug/vec.hpp"

namespace noisytug {

/// phi(x) = x^T A x + (xi, x) with A symmetric.
template <int D>
struct QuadraticModel {
    Mat<D> A;
    Vec<D> xi;

    QuadraticModel(const Mat<D>& a, const Vec<D>& xi_in) : A(a), xi(xi_in) {
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("quadratic model: A must be symmetric");
    }

    double operator()(const Vec<D>& x) const { return x.dot(A * x) + xi.dot(x); }
};

template <int D>
struct OperatorValues {
    double laplacian;      // sum of pure second derivatives
    double inf_laplacian;  // second derivative in the gradient direction
    double one_laplacian;  // laplacian - inf_laplacian
    double p_laplacian_g;  // p^-1 * one_laplacian + q^-1 * inf_laplacian
    Vec<D> gradient;
};

inline double conjugate_exponent(double p) { return std::isinf(p) ? 1.0 : p / (p - 1.0); }

/// Central-difference gradient/Hessian evaluation of all operators at x.
/// Classical values exist only away from critical points: a gradient below
/// 1e-8 is rejected as "vanishing gradient".
template <int D, class F>
OperatorValues<D> operators_at(F&& u, const Vec<D>& x, double p, double h = -1.0) {
    if (!(std::isinf(p) || p > 1.0)) throw std::invalid_argument("operators_at: p must lie in (1, inf]");
    if (h <= 0.0) h = 1e-4 * (1.0 + x.norm());
    Vec<D> grad;
    Mat<D> hess;
    for (int i = 0; i < D; ++i) {
        Vec<D> ei = unit_axis<D>(i) * h;
        const double up = u(x + ei), um = u(x - ei);
        grad[i] = (up - um) / (2.0 * h);
        hess(i, i) = (up - 2.0 * u(x) + um) / (h * h);
        for (int j = i + 1; j < D; ++j) {
            Vec<D> ej = unit_axis<D>(j) * h;
            const double v = (u(x + ei + ej) - u(x + ei - ej) - u(x - ei + ej) + u(x - ei - ej)) / (4.0 * h * h);
            hess(i, j) = hess(j, i) = v;
        }
    }
    const double gn = grad.norm();
    if (gn <= 1e-8) throw std::domain_error("operators_at: vanishing gradient, classical operators undefined");
    OperatorValues<D> out;
    out.gradient = grad;
    out.laplacian = hess.trace();
    out.inf_laplacian = grad.dot(hess * grad) / (gn * gn);
    out.one_laplacian = out.laplacian - out.inf_laplacian;
    const double pinv = std::isinf(p) ? 0.0 : 1.0 / p;
    out.p_laplacian_g = pinv * out.one_laplacian + (1.0 / conjugate_exponent(p)) * out.inf_laplacian;
    return out;
}

/// The matrix B with psi(v) = (xi, v) + v^T B v, where psi is the expected
/// value of phi one move-plus-noise later.  Mode-dependent:
///   random turns:      B = (beta/q - beta/p) A + (beta/p) tr(A) I
///   alternating turns: B = (beta/q - beta/p + 1) A + (beta/p) tr(A) I
template <int D>
Mat<D> quadratic_step_matrix(const QuadraticModel<D>& model, const GameConstants& gc) {
    const double bq = gc.beta / gc.q;
    const double bp = gc.p_finite() ? gc.beta / gc.p : 0.0;
    double k = bq - bp;
    if (gc.turn_mode == TurnMode::alternating) k += 1.0;
    return k * model.A + bp * model.A.trace() * Mat<D>::Identity();
}

/// psi(v): exact expectation of phi(v + z) over the push-forward noise.
template <int D>
double expected_quadratic(const QuadraticModel<D>& model, const Vec<D>& v, const GameConstants& gc) {
    const Mat<D> B = quadratic_step_matrix(model, gc);
    return model.xi.dot(v) + v.dot(B * v);
}

template <int D>
struct OptimalMove {
    Vec<D> v;
    double psi;
    bool sphere_regime;  // true when eps < |xi| / (4 ||B||), where the
                         // maximizer provably sits on the sphere
};

namespace detail {

// Maximize (xi, v) + v^T B v over the closed ball |v| <= eps, exactly, via
// the eigenstructure of B and a 1D dual root (hard case included).
template <int D>
Vec<D> ball_maximizer(const Vec<D>& xi, const Mat<D>& B, double eps) {
    Eigen::SelfAdjointEigenSolver<Mat<D>> es(B);
    const Vec<D> lam = es.eigenvalues();
    const Mat<D> Q = es.eigenvectors();
    const Vec<D> xt = Q.transpose() * xi;
    const double lmax = lam.maxCoeff();

    const auto vnorm2 = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < D; ++i) {
            const double d = mu - 2.0 * lam[i];
            s += (xt[i] * xt[i]) / (d * d);
        }
        return s;
    };
    const auto assemble = [&](double mu) {
        Vec<D> w;
        for (int i = 0; i < D; ++i) w[i] = xt[i] / (mu - 2.0 * lam[i]);
        return Vec<D>(Q * w);
    };

    const double mu_lo = std::max(0.0, 2.0 * lmax);
    // Interior optimum: B negative definite and the stationary point inside.
    if (lmax < 0.0) {
        const Vec<D> v0 = assemble(0.0);
        if (v0.norm() <= eps) return v0;
    }
    // Limit of |v(mu)|^2 as mu -> mu_lo from above; +inf when xi has weight
    // on the binding eigenspace.
    double limit = 0.0;
    for (int i = 0; i < D; ++i) {
        const double d = mu_lo - 2.0 * lam[i];
        if (d < 1e-13 * std::max(1.0, std::abs(lam[i]))) {
            if (std::abs(xt[i]) > 1e-13 * xi.norm()) {
                limit = std::numeric_limits<double>::infinity();
                break;
            }
        } else {
            limit += (xt[i] * xt[i]) / (d * d);
        }
    }
    if (limit < eps * eps) {
        // Hard case: xi orthogonal to the top eigenspace; pad with a top
        // eigenvector component to reach the sphere.
        Vec<D> w;
        for (int i = 0; i < D; ++i) {
            const double d = mu_lo - 2.0 * lam[i];
            w[i] = (d < 1e-13 * std::max(1.0, std::abs(lam[i]))) ? 0.0 : xt[i] / d;
        }
        int top = 0;
        for (int i = 1; i < D; ++i)
            if (lam[i] > lam[top]) top = i;
        const double pad = std::sqrt(std::max(0.0, eps * eps - w.squaredNorm()));
        w[top] += pad;
        return Vec<D>(Q * w);
    }
    // Regular case: bisect |v(mu)|^2 = eps^2 on (mu_lo, inf).
    double lo = mu_lo, hi = std::max(mu_lo + 1.0, mu_lo + 2.0 * xi.norm() / eps + 4.0 * lam.cwiseAbs().maxCoeff());
    while (vnorm2(hi) > eps * eps) hi = mu_lo + 2.0 * (hi - mu_lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (vnorm2(mid) > eps * eps ? lo : hi) = mid;
    }
    return assemble(0.5 * (lo + hi));
}

}  // namespace detail

/// Argmax (or argmin) of psi over |v| <= eps.  Inside the sphere regime
/// (eps < |xi| / (4||B||)) the maximizer sits on the sphere within
/// zeta * eps^2 of the gradient move; outside it the exact ball optimum is
/// still returned but flagged.
template <int D>
OptimalMove<D> optimal_move(const QuadraticModel<D>& model, double eps, const GameConstants& gc,
                            bool maximize = true) {
    if (model.xi.norm() == 0.0)
        throw std::domain_error("optimal_move: gradient-free quadratic step undefined");
    const Mat<D> B = quadratic_step_matrix(model, gc);
    const Vec<D> xi = maximize ? model.xi : Vec<D>(-model.xi);
    const Mat<D> Bs = maximize ? B : Mat<D>(-B);
    OptimalMove<D> out;
    out.v = detail::ball_maximizer<D>(xi, Bs, eps);
    out.psi = expected_quadratic(model, out.v, gc);
    const double bnorm = Eigen::SelfAdjointEigenSolver<Mat<D>>(B).eigenvalues().cwiseAbs().maxCoeff();
    out.sphere_regime = bnorm == 0.0 || eps < model.xi.norm() / (4.0 * bnorm);
    return out;
}

template <int D>
struct OneStepBound {
    double lower_bound;  // guaranteed E[phi(x_1)] under the gradient move, any opponent
    double M;            // cubic error constant 16 beta (d+1) ||A||^2 / |xi|
    double p_laplacian;  // game p-Laplacian of phi at the origin
};

/// Guaranteed one-step expected gain of the gradient move from x0 = 0 in the
/// random-turn game: phi(0) + (beta/2) Dp phi(0) eps^2 - M eps^3.
template <int D>
OneStepBound<D> one_step_bound(const QuadraticModel<D>& model, double eps, const GameConstants& gc) {
    const double xin = model.xi.norm();
    if (xin == 0.0) throw std::domain_error("one_step_bound: gradient-free quadratic step undefined");
    const double anorm = Eigen::SelfAdjointEigenSolver<Mat<D>>(model.A).eigenvalues().cwiseAbs().maxCoeff();
    const double lap = 2.0 * model.A.trace();
    const double inf_lap = 2.0 * model.xi.dot(model.A * model.xi) / (xin * xin);
    const double pinv = gc.p_finite() ? 1.0 / gc.p : 0.0;
    OneStepBound<D> out;
    out.p_laplacian = pinv * (lap - inf_lap) + (1.0 / gc.q) * inf_lap;
    out.M = 16.0 * gc.beta * (D + 1) * anorm * anorm / xin;
    out.lower_bound = 0.5 * gc.beta * out.p_laplacian * eps * eps - out.M * eps * eps * eps;
    return out;
}

/// Exponent c(p,d) of the radial p-harmonic function |x|^c (log at p = d).
inline double radial_exponent(double p, int d) { return (p - d) / (p - 1.0); }

/// Radially symmetric p-harmonic reference rho_{d,p}(x): |x|^{(p-d)/(p-1)},
/// or log|x| when p = d.
template <int D>
double radial_reference(double p, const Vec<D>& x) {
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("radial_reference: p must lie in (1, inf)");
    const double r = x.norm();
    if (r == 0.0) throw std::domain_error("radial_reference: singular at the origin");
    if (std::abs(p - D) < 1e-9) return std::log(r);
    return std::pow(r, radial_exponent(p, D));
}

template <int D>
Vec<D> radial_reference_gradient(double p, const Vec<D>& x) {
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("radial_reference: p must lie in (1, inf)");
    const double r = x.norm();
    if (r == 0.0) throw std::domain_error("radial_reference: singular at the origin");
    if (std::abs(p - D) < 1e-9) return x / (r * r);
    const double c = radial_exponent(p, D);
    return c * std::pow(r, c - 2.0) * x;
}

/// Probability b(s,t,p,d) = (t^c - 1)/(t^c - s^c) of reaching the inner
/// sphere of the annulus {sr < |x| < tr} from |x| = r, in the small-step
/// limit.  Log form at p = d; evaluated through expm1 so the two branches
/// join continuously.
inline double annulus_hit_prob(double s, double t, double p, int d) {
    if (!(0.0 < s && s < 1.0 && 1.0 < t)) throw std::invalid_argument("annulus_hit_prob: need 0 < s < 1 < t");
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("annulus_hit_prob: p must lie in (1, inf)");
    const double c = radial_exponent(p, d);
    if (std::abs(c) < 1e-12) return std::log(t) / (std::log(t) - std::log(s));
    const double tc = std::expm1(c * std::log(t));
    const double sc = std::expm1(c * std::log(s));
    return tc / (tc - sc);
}

}  // namespace noisytug
