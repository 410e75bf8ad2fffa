// Grid fixed-point oracle for the eps-game value with finitely supported
// noise, independent of any strategy implementation.  The one-step operator
//   T u(x) = 1/2 max_{|v|<=eps} E u(x+v+z) + 1/2 min_{|v|<=eps} E u(x+v+z)
// is iterated Jacobi-style on a regular lattice; the expectation over the
// push-forward noise is an exact atom sum with multilinear interpolation at
// off-grid points, and nodes in the termination band take the optimal exit
// value.  The max/min over the move ball is searched over the eps-sphere at
// a fixed direction count plus v = 0.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisytug/engine.hpp"
#include "noisytug/util.hpp"

namespace noisytug {

enum class NodeKind : std::uint8_t { interior = 0, band = 1, outside = 2 };

template <int D>
struct ValueField {
    Vec<D> origin;
    double spacing = 0.0;
    std::array<long, D> shape{};
    double eps = 0.0;
    Variant variant = Variant::random_turn;
    std::vector<double> values;
    std::vector<NodeKind> node_kind;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;

    long flat(const std::array<long, D>& idx) const {
        long f = 0;
        for (int d = 0; d < D; ++d) f = f * shape[d] + idx[d];
        return f;
    }

    Vec<D> node_point(std::array<long, D> idx) const {
        Vec<D> x = origin;
        for (int d = 0; d < D; ++d) x[d] += spacing * idx[d];
        return x;
    }

    /// Multilinear interpolation, clamped to the grid hull.
    double value_at(const Vec<D>& x) const {
        std::array<long, D> base{};
        std::array<double, D> frac{};
        for (int d = 0; d < D; ++d) {
            double t = (x[d] - origin[d]) / spacing;
            t = std::clamp(t, 0.0, static_cast<double>(shape[d] - 1));
            double fl = std::floor(t);
            if (fl > shape[d] - 2) fl = shape[d] - 2;
            base[d] = static_cast<long>(fl);
            frac[d] = t - fl;
        }
        double acc = 0.0;
        for (int corner = 0; corner < (1 << D); ++corner) {
            double w = 1.0;
            std::array<long, D> idx = base;
            for (int d = 0; d < D; ++d) {
                const bool hi = corner & (1 << d);
                w *= hi ? frac[d] : 1.0 - frac[d];
                if (hi) ++idx[d];
            }
            acc += w * values[flat(idx)];
        }
        return acc;
    }

    /// CSV rows: coordinates, value, node kind.
    void write_csv(std::ostream& os) const {
        for (int d = 0; d < D; ++d) os << "x" << d + 1 << ",";
        os << "value,kind\n";
        std::array<long, D> idx{};
        const long total = static_cast<long>(values.size());
        for (long f = 0; f < total; ++f) {
            const Vec<D> x = node_point(idx);
            for (int d = 0; d < D; ++d) os << format_double(x[d]) << ",";
            os << format_double(values[f]) << "," << static_cast<int>(node_kind[f]) << "\n";
            for (int d = D - 1; d >= 0; --d) {
                if (++idx[d] < shape[d]) break;
                idx[d] = 0;
            }
        }
    }

    /// Raw little-endian doubles next to a JSON header describing the grid.
    void write_binary(const std::string& base_path) const {
        {
            std::ofstream grid(base_path + ".grid", std::ios::binary);
            grid.write(reinterpret_cast<const char*>(values.data()),
                       static_cast<std::streamsize>(values.size() * sizeof(double)));
        }
        std::ofstream hdr(base_path + ".json");
        hdr << "{\n  \"spacing\": " << format_double(spacing) << ",\n  \"origin\": [";
        for (int d = 0; d < D; ++d) hdr << (d ? ", " : "") << format_double(origin[d]);
        hdr << "],\n  \"shape\": [";
        for (int d = 0; d < D; ++d) hdr << (d ? ", " : "") << shape[d];
        hdr << "],\n  \"order\": \"row-major, last axis fastest\",\n  \"dtype\": \"float64\"\n}\n";
    }
};

template <int D>
struct DppOptions {
    double h_grid = 0.0;  // 0: eps / 8
    double tol = 0.0;     // 0: 1e-6 * payoff range
    long max_iter = 0;    // 0: 10 * (diam/eps)^2
    int n_dir = 0;        // 0: 64 in d=2, 256 in d=3, 512 beyond
    int threads = 1;
};

template <int D>
class DppSolver {
  public:
    DppSolver(const Domain<D>& domain, const BoundaryFunction<D>& payoff, const NoiseMeasure<D>& mu,
              const GameConstants& constants, double eps, Variant variant, DppOptions<D> opts = {})
        : domain_(domain), variant_(variant), eps_(eps), opts_(opts) {
        if (!mu.finitely_supported())
            throw std::invalid_argument("grid oracle requires atomic noise (finitely supported measure)");
        if (!(eps > 0.0)) throw std::invalid_argument("grid oracle: eps must be positive");
        if (opts_.h_grid <= 0.0) opts_.h_grid = eps / 8.0;
        if (opts_.h_grid > eps / 8.0 + 1e-15)
            throw std::invalid_argument("grid oracle: grid spacing must be at most eps/8");
        if (opts_.n_dir <= 0) opts_.n_dir = D == 2 ? 64 : (D == 3 ? 256 : 512);
        if (opts_.threads <= 0) opts_.threads = 1;
        if (variant_ == Variant::spencer)
            throw std::invalid_argument("grid oracle supports the random-turn and alternating variants");

        const double band = constants.alpha * eps;
        build_grid(band);
        classify_and_fill(payoff, band);
        build_stencils(mu);
        const double diam = domain.diameter();
        if (opts_.max_iter <= 0) opts_.max_iter = static_cast<long>(10.0 * (diam / eps) * (diam / eps)) + 1;
        if (opts_.tol <= 0.0) {
            const double range = vmax_boundary_ - vmin_boundary_;
            opts_.tol = range > 0.0 ? 1e-6 * range : 1e-12;
        }
    }

    /// One Bellman sweep: interior nodes recomputed from `in`, absorbing
    /// nodes copied through.  Exposed for operator property tests
    /// (random-turn form only).
    void apply_once(const std::vector<double>& in, std::vector<double>& out) const {
        if (variant_ != Variant::random_turn)
            throw std::logic_error("apply_once: only the random-turn operator is exposed");
        out = in;
        sweep(in, out, nullptr);
    }

    ValueField<D> solve() {
        std::vector<double> cur = field_.values;
        std::vector<double> nxt = cur;
        const double mid = 0.5 * (vmin_boundary_ + vmax_boundary_);
        for (long i : interior_) cur[i] = mid;
        if (variant_ == Variant::alternating) {
            alt_other_ = cur;
            for (long i : band_) alt_other_[i] = band_min_[i];
            alt_other_next_ = alt_other_;
        }
        double res = std::numeric_limits<double>::infinity();
        long it = 0;
        while (it < opts_.max_iter) {
            ++it;
            res = 0.0;
            sweep(cur, nxt, &res);
            cur.swap(nxt);
            if (variant_ == Variant::alternating) alt_other_.swap(alt_other_next_);
            if (res < opts_.tol) break;
        }
        field_.values = cur;
        field_.iterations = it;
        field_.residual = res;
        field_.converged = res < opts_.tol;
        return field_;
    }

    const ValueField<D>& grid() const { return field_; }
    const std::vector<long>& interior_nodes() const { return interior_; }

  private:
    void build_grid(double band) {
        const auto [blo, bhi] = domain_.bounding_box();
        const double margin = band + 2.0 * opts_.h_grid;
        field_.spacing = opts_.h_grid;
        field_.eps = eps_;
        field_.variant = variant_;
        long total = 1;
        for (int d = 0; d < D; ++d) {
            field_.origin[d] = blo[d] - margin;
            field_.shape[d] = static_cast<long>(std::ceil((bhi[d] - blo[d] + 2.0 * margin) / opts_.h_grid)) + 2;
            total *= field_.shape[d];
        }
        field_.values.assign(total, 0.0);
        field_.node_kind.assign(total, NodeKind::outside);
    }

    void classify_and_fill(const BoundaryFunction<D>& payoff, double band) {
        const long total = static_cast<long>(field_.values.size());
        vmin_boundary_ = std::numeric_limits<double>::infinity();
        vmax_boundary_ = -vmin_boundary_;
        band_min_.assign(total, 0.0);
        std::array<long, D> idx{};
        for (long f = 0; f < total; ++f) {
            const Vec<D> x = field_.node_point(idx);
            const double dist = domain_.boundary_distance(x);
            if (dist > band) {
                field_.node_kind[f] = NodeKind::interior;
                interior_.push_back(f);
            } else if (dist > 0.0) {
                field_.node_kind[f] = NodeKind::band;
                band_.push_back(f);
                double vmax = -std::numeric_limits<double>::infinity();
                double vmin = std::numeric_limits<double>::infinity();
                for (const auto& y : domain_.exit_candidates(x, band)) {
                    const double v = payoff(y);
                    vmax = std::max(vmax, v);
                    vmin = std::min(vmin, v);
                }
                field_.values[f] = 0.5 * (vmax + vmin);
                if (variant_ == Variant::alternating) field_.values[f] = vmax;
                band_min_[f] = vmin;
                vmin_boundary_ = std::min(vmin_boundary_, vmin);
                vmax_boundary_ = std::max(vmax_boundary_, vmax);
            } else {
                const double v = payoff(domain_.nearest_boundary_point(x));
                field_.values[f] = v;
                band_min_[f] = v;
                vmin_boundary_ = std::min(vmin_boundary_, v);
                vmax_boundary_ = std::max(vmax_boundary_, v);
            }
            for (int d = D - 1; d >= 0; --d) {
                if (++idx[d] < field_.shape[d]) break;
                idx[d] = 0;
            }
        }
        if (!std::isfinite(vmin_boundary_)) vmin_boundary_ = vmax_boundary_ = 0.0;
    }

    // Per move direction, the interpolation stencil of every noise atom with
    // weights folded in: relative flat index + coefficient pairs.
    void build_stencils(const NoiseMeasure<D>& mu) {
        const auto atoms = mu.atom_list();
        const auto dirs = direction_set<D>(opts_.n_dir);
        std::array<long, D> strides;
        strides[D - 1] = 1;
        for (int d = D - 2; d >= 0; --d) strides[d] = strides[d + 1] * field_.shape[d + 1];

        const auto add_offset = [&](std::vector<std::pair<long, double>>& out, const Vec<D>& off, double weight) {
            std::array<long, D> base{};
            std::array<double, D> frac{};
            for (int d = 0; d < D; ++d) {
                const double t = off[d] / field_.spacing;
                const double fl = std::floor(t);
                base[d] = static_cast<long>(fl);
                frac[d] = t - fl;
            }
            for (int corner = 0; corner < (1 << D); ++corner) {
                double w = weight;
                long rel = 0;
                for (int d = 0; d < D; ++d) {
                    const bool hi = corner & (1 << d);
                    w *= hi ? frac[d] : 1.0 - frac[d];
                    rel += (base[d] + (hi ? 1 : 0)) * strides[d];
                }
                if (w != 0.0) out.emplace_back(rel, w);
            }
        };

        move_stencils_.clear();
        for (int i = 0; i <= opts_.n_dir; ++i) {
            const Vec<D> v = i < opts_.n_dir ? Vec<D>(eps_ * dirs[i]) : Vec<D>(Vec<D>::Zero());
            std::vector<std::pair<long, double>> st;
            for (const auto& a : atoms) {
                const Vec<D> z = apply_rotation_scale<D>(v, a.point);
                add_offset(st, v + z, a.weight);
            }
            move_stencils_.push_back(std::move(st));
        }
    }

    void sweep(const std::vector<double>& in, std::vector<double>& out, double* residual) const {
        const std::vector<double>& other = variant_ == Variant::alternating ? alt_other_ : in;
        std::vector<double> chunk_res(opts_.threads, 0.0);
        parallel_for(static_cast<long>(interior_.size()), opts_.threads, [&](int chunk, long lo, long hi) {
            double local = 0.0;
            for (long t = lo; t < hi; ++t) {
                const long i = interior_[t];
                double vmax = -std::numeric_limits<double>::infinity();
                double vmin = std::numeric_limits<double>::infinity();
                for (const auto& st : move_stencils_) {
                    double accA = 0.0, accB = 0.0;
                    for (const auto& [rel, w] : st) {
                        accA += w * in[i + rel];
                        if (variant_ == Variant::alternating) accB += w * other[i + rel];
                    }
                    if (variant_ == Variant::alternating) {
                        vmax = std::max(vmax, accB);  // mover one looks at the other parity
                        vmin = std::min(vmin, accA);
                    } else {
                        vmax = std::max(vmax, accA);
                        vmin = std::min(vmin, accA);
                    }
                }
                double nv;
                if (variant_ == Variant::alternating) {
                    nv = vmax;
                    alt_other_next_[i] = vmin;
                    local = std::max(local, std::abs(alt_other_next_[i] - alt_other_[i]));
                } else {
                    nv = 0.5 * (vmax + vmin);
                }
                out[i] = nv;
                local = std::max(local, std::abs(nv - in[i]));
            }
            chunk_res[chunk] = local;
        });
        if (residual) {
            for (double r : chunk_res) *residual = std::max(*residual, r);
        }
    }

    Domain<D> domain_;
    Variant variant_;
    double eps_;
    DppOptions<D> opts_;
    ValueField<D> field_;
    std::vector<long> interior_, band_;
    std::vector<double> band_min_;
    std::vector<std::vector<std::pair<long, double>>> move_stencils_;
    double vmin_boundary_ = 0.0, vmax_boundary_ = 0.0;
    mutable std::vector<double> alt_other_, alt_other_next_;
};

/// Convenience wrapper matching the operation contract.
template <int D>
ValueField<D> solve_dpp(const Domain<D>& domain, const BoundaryFunction<D>& payoff, const NoiseMeasure<D>& mu,
                        const GameConstants& constants, double eps, Variant variant, DppOptions<D> opts = {}) {
    return DppSolver<D>(domain, payoff, mu, constants, eps, variant, opts).solve();
}

}  // namespace noisytug
