#pragma once

// Domains for the walk engine: half-space, balls, the special graph domains
// bounded by x_d = +/- Gamma(x1) with Gamma(t) = t*l(t), collars D(R), and
// ball intersections. Every domain exposes membership, a certified interior
// ball radius, and a slower scan-based distance oracle with a proven lower
// bound. Domains are immutable and shareable.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/modulus.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

template <int D>
using Point = std::array<double, static_cast<std::size_t>(D)>;

template <std::size_t N>
inline double norm(const std::array<double, N>& p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
}

template <std::size_t N>
inline double dist(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Gamma_l(t) = t*l(t) for t > 0, 0 otherwise.
inline double gamma_ell(const Modulus& ell, double t) {
    if (t <= 0.0 || ell.is_zero()) return 0.0;
    return t * ell(t);
}

// d/dt Gamma_l(t) = l(t) + t l'(t) for t > 0.
inline double gamma_ell_derivative(const Modulus& ell, double t) {
    if (t <= 0.0 || ell.is_zero()) return 0.0;
    return ell(t) + t * ell.derivative(t);
}

struct DistanceBounds {
    double certified_lower = 0.0;  // proven: no boundary point is closer
    double estimate = 0.0;         // distance to the best boundary point found
};

template <int D>
struct FatnessCertificate {
    Point<D> query;
    double scale = 0.0;          // R
    Point<D> witness;            // z with B(z, R/4) inside D and B(x,R)
    double witness_radius = 0.0; // R/4
    double delta_ratio = 0.0;    // measured delta_D(z)/R
    int samples_checked = 0;
};

template <int D>
class Domain {
  public:
    enum class Kind { halfspace, ball, graph, collar, intersect_ball };

    static Domain halfspace() { return Domain(Kind::halfspace); }

    static Domain ball(const Point<D>& center, double radius) {
        if (!(radius > 0.0)) throw config_error("ball domain: radius must be > 0");
        Domain d(Kind::ball);
        d.center_ = center;
        d.radius_ = radius;
        return d;
    }

    // sign +1: x_d > Gamma(x1).  sign -1: x_d > -Gamma(x1).
    static Domain graph(Modulus ell, int sign) {
        if (sign != 1 && sign != -1) throw config_error("graph domain: sign must be +1/-1");
        Domain d(Kind::graph);
        d.ell_ = std::move(ell);
        d.sign_ = sign;
        d.cone_slope_ = (1.0 + d.ell_.regularity_constant());
        return d;
    }

    static Domain collar(Domain base, double width) {
        if (!(width > 0.0)) throw config_error("collar domain: width must be > 0");
        Domain d(Kind::collar);
        d.base_ = std::make_shared<const Domain>(std::move(base));
        d.width_ = width;
        return d;
    }

    static Domain intersect_ball(Domain base, const Point<D>& center, double radius) {
        if (!(radius > 0.0)) throw config_error("intersect_ball: radius must be > 0");
        Domain d(Kind::intersect_ball);
        d.base_ = std::make_shared<const Domain>(std::move(base));
        d.center_ = center;
        d.radius_ = radius;
        return d;
    }

    Kind kind() const { return kind_; }
    const Domain& base() const { return *base_; }
    double collar_width() const { return width_; }
    const Modulus& ell() const { return ell_; }
    int sign() const { return sign_; }
    const Point<D>& center() const { return center_; }
    double radius() const { return radius_; }

    bool contains(const Point<D>& x) const {
        switch (kind_) {
            case Kind::halfspace:
                return x[D - 1] > 0.0;
            case Kind::ball:
                return dist(x, center_) < radius_;
            case Kind::graph:
                return x[D - 1] > wall_height(x[0]);
            case Kind::collar: {
                if (!base_->contains(x)) return false;
                const double up = base_->distance_upper_fast(x);
                if (up < width_) return true;
                const double lo = base_->step_lower(x);
                if (lo >= width_) return false;
                return base_->distance(x).estimate < width_;
            }
            case Kind::intersect_ball:
                return dist(x, center_) < radius_ && base_->contains(x);
        }
        return false;
    }

    // Certified inscribed-ball radius used by the walk engine. Cheap cone/
    // closed-form bounds; falls back to the scan oracle only in the thin band
    // where the fast bounds cannot separate a collar shell.
    double step_radius(const Point<D>& x, double gamma) const {
        return gamma * step_lower(x);
    }

    // gamma * certified lower bound from the scan-quality oracle.
    double inner_radius(const Point<D>& x, double gamma) const {
        if (!(gamma > 0.0) || gamma > 1.0)
            throw config_error("inner_radius: gamma must lie in (0,1]");
        if (!contains(x)) throw geometry_error("inner_radius: point is outside the domain");
        return gamma * distance(x).certified_lower;
    }

    // Scan-based distance oracle: estimate is the distance to the best boundary
    // point found; certified_lower is proven by interval bounds.
    DistanceBounds distance(const Point<D>& x) const {
        if (!contains(x)) throw geometry_error("distance: point is outside the domain");
        return distance_bounds(x, 1e-9, 256);
    }

    // Relaxed-gap variant for the walk engine's shell band; still certified.
    DistanceBounds distance_quick(const Point<D>& x) const {
        return distance_bounds(x, 1e-3, 64);
    }

    // The paper's quadrant witness: z = (x1 -/+ R/4, ^x, x_d + R/4) for the two
    // graph branches, verified by membership sampling on the witness ball.
    FatnessCertificate<D> fat_probe(const Point<D>& x, double R, int samples = 512) const {
        if (!(R > 0.0)) throw config_error("fat_probe: R must be > 0");
        FatnessCertificate<D> cert;
        cert.query = x;
        cert.scale = R;
        cert.witness_radius = 0.25 * R;
        Point<D> z = x;
        switch (kind_) {
            case Kind::halfspace:
                z[D - 1] += 0.25 * R;
                break;
            case Kind::graph:
                z[0] -= sign_ * 0.25 * R;
                z[D - 1] += 0.25 * R;
                break;
            case Kind::ball: {
                const double away = dist(x, center_);
                if (away > 1e-12) {
                    for (int i = 0; i < D; ++i)
                        z[i] += 0.25 * R * (center_[i] - x[i]) / away;
                } else {
                    z[D - 1] += std::min(0.25 * R, 0.5 * radius_);
                }
                break;
            }
            default:
                throw geometry_error("fat_probe: unsupported domain kind");
        }
        cert.witness = z;
        if (!contains(z))
            throw geometry_error("fat_probe: witness center escapes the domain");
        RngStream rng(0x666174ull, static_cast<uint64_t>(samples));
        const double rr = cert.witness_radius * (1.0 - 1e-12);
        for (int s = 0; s < samples; ++s) {
            Point<D> p;
            double n2 = 0.0;
            for (int i = 0; i < D; ++i) {
                p[i] = rng.normal();
                n2 += p[i] * p[i];
            }
            const double scale = rr / std::sqrt(n2);
            for (int i = 0; i < D; ++i) p[i] = z[i] + p[i] * scale;
            if (!contains(p))
                throw geometry_error("fat_probe: witness sphere leaves the domain");
            if (dist(p, x) > R)
                throw geometry_error("fat_probe: witness sphere leaves B(x,R)");
        }
        cert.samples_checked = samples;
        cert.delta_ratio = distance(z).estimate / R;
        return cert;
    }

    // Fast certified lower bound on the distance to the complement.
    double step_lower(const Point<D>& x) const {
        switch (kind_) {
            case Kind::halfspace:
                return std::max(0.0, x[D - 1]);
            case Kind::ball:
                return std::max(0.0, radius_ - dist(x, center_));
            case Kind::graph:
                return step_lower_fast(x);
            case Kind::collar: {
                const double lo = base_->step_lower(x);
                if (lo <= 0.0) return 0.0;
                const double up = base_->distance_upper_fast(x);
                double inner = width_ - up;
                if (lo < width_ && inner <= 0.0) {
                    // ambiguous shell: a relaxed certified scan is enough to step
                    const auto b = base_->distance_quick(x);
                    return std::max(0.0, std::min(b.certified_lower, width_ - b.estimate));
                }
                return std::max(0.0, std::min(lo, inner));
            }
            case Kind::intersect_ball: {
                const double shell = radius_ - dist(x, center_);
                if (shell <= 0.0) return 0.0;
                return std::max(0.0, std::min(base_->step_lower(x), shell));
            }
        }
        return 0.0;
    }

    // Cheap upper bound on the distance to the complement.
    double distance_upper_fast(const Point<D>& x) const {
        switch (kind_) {
            case Kind::halfspace:
                return std::max(0.0, x[D - 1]);
            case Kind::ball:
                return std::max(0.0, radius_ - dist(x, center_));
            case Kind::graph: {
                const double v = clearance(x);
                if (v <= 0.0) return 0.0;
                double up = std::min(v, norm(x));  // the origin lies on the wall
                // one candidate foot near the expected projection tightens it
                const double g = gamma_ell_derivative(ell_, x[0]);
                const double t = x[0] - sign_ * g * v / (1.0 + g * g);
                const double dy = x[D - 1] - sign_ * gamma_ell(ell_, t);
                up = std::min(up, std::hypot(x[0] - t, dy));
                return up;
            }
            case Kind::collar:
                return std::min(base_->distance_upper_fast(x),
                                std::max(0.0, width_ - base_->step_lower(x)));
            case Kind::intersect_ball:
                return std::min(base_->distance_upper_fast(x),
                                std::max(0.0, radius_ - dist(x, center_)));
        }
        return 0.0;
    }

  private:
    explicit Domain(Kind k) : kind_(k) {}

    // vertical clearance above the wall; negative outside
    double clearance(const Point<D>& x) const {
        return x[D - 1] - wall_height(x[0]);
    }

    double wall_height(double t) const { return sign_ * gamma_ell(ell_, t); }

    // Cone bound: within the window |t - x1| < v the wall slope is at most
    // G = (1 + sup u l'/l) * l(x1 + v), so delta >= v / sqrt(1 + G^2).
    double step_lower_fast(const Point<D>& x) const {
        const double v = clearance(x);
        if (v <= 0.0) return 0.0;
        if (ell_.is_zero()) return v;
        const double edge = x[0] + v;
        if (edge <= 0.0) return v;  // wall is flat over the whole window
        const double G = cone_slope_ * ell_(edge);
        return v / std::sqrt(1.0 + G * G);
    }

    DistanceBounds distance_bounds(const Point<D>& x, double gap, int coarse) const {
        switch (kind_) {
            case Kind::halfspace:
                return {x[D - 1] * (1.0 - 1e-9), x[D - 1]};
            case Kind::ball: {
                const double d0 = radius_ - dist(x, center_);
                return {d0 * (1.0 - 1e-9), d0};
            }
            case Kind::graph:
                return graph_distance(x, gap, coarse);
            case Kind::collar: {
                const auto b = base_->distance_bounds(x, gap, coarse);
                return {std::min(b.certified_lower, width_ - b.estimate),
                        std::min(b.estimate, width_ - b.estimate)};
            }
            case Kind::intersect_ball: {
                const auto b = base_->distance_bounds(x, gap, coarse);
                const double shell = radius_ - dist(x, center_);
                return {std::min(b.certified_lower, shell * (1.0 - 1e-9)),
                        std::min(b.estimate, shell)};
            }
        }
        return {};
    }

    DistanceBounds graph_distance(const Point<D>& x, double gap, int coarse) const {
        // 1-d problem in (t, x_d): the transverse coordinates drop out.
        const double x1 = x[0], xd = x[D - 1];
        if (ell_.is_zero()) return {xd * (1.0 - 1e-9), xd};
        const double halfwidth = 2.0 * (std::fabs(xd) + gamma_ell(ell_, std::fabs(x1)) + 1.0);

        auto point_dist = [&](double t) {
            return std::hypot(x1 - t, xd - wall_height(t));
        };

        struct Cell {
            double a, b, wa, wb;  // wall heights at the ends
        };
        const double slope_factor = 1.0 + ell_.regularity_constant();

        // proven lower bound for the distance over one cell: the monotone
        // interval bound plus Lipschitz-cone bounds anchored at both endpoints
        // (second-order tight at tangential minima, which keeps the refinement
        // frontier small)
        auto cone_bound = [&](double anchor_t, double anchor_w, double L, double S,
                              bool rightward) {
            // wall within |w(t) - anchor_w| <= S * u for u = |t - anchor| in [0, L]
            const double h0 = rightward ? (x1 - anchor_t) : (anchor_t - x1);
            const double v0 = std::fabs(xd - anchor_w);
            auto g = [&](double u) {
                const double dv = std::max(0.0, v0 - S * u);
                return std::hypot(h0 - u, dv);
            };
            double bound = std::min(g(0.0), g(L));
            const double kink = (S > 0.0) ? v0 / S : L + 1.0;
            const double ustar = (h0 + S * v0) / (1.0 + S * S);
            for (double cand : {ustar, kink, h0}) {
                if (cand > 0.0 && cand < L) bound = std::min(bound, g(cand));
            }
            return bound;
        };
        auto cell_lower = [&](const Cell& c) {
            const double dh = (x1 < c.a) ? c.a - x1 : (x1 > c.b ? x1 - c.b : 0.0);
            const double wlo = std::min(c.wa, c.wb), whi = std::max(c.wa, c.wb);
            const double dv = (xd < wlo) ? wlo - xd : (xd > whi ? xd - whi : 0.0);
            double lb = std::hypot(dh, dv);
            const double L = c.b - c.a;
            double S = 0.0;
            if (!ell_.is_zero() && c.b > 0.0) S = slope_factor * ell_(c.b);
            lb = std::max(lb, cone_bound(c.a, c.wa, L, S, true));
            lb = std::max(lb, cone_bound(c.b, c.wb, L, S, false));
            return lb;
        };

        // coarse scan seeded with the vertical and cone-foot candidates
        std::vector<Cell> active;
        active.reserve(coarse);
        double best = point_dist(x1);
        {
            const double g = gamma_ell_derivative(ell_, x1);
            const double v = xd - wall_height(x1);
            best = std::min(best, point_dist(x1 - sign_ * g * v / (1.0 + g * g)));
        }
        {
            const double lo = x1 - halfwidth, hi = x1 + halfwidth;
            double ta = lo, wa = wall_height(ta);
            for (int i = 1; i <= coarse; ++i) {
                const double tb = lo + (hi - lo) * i / coarse;
                const double wb = wall_height(tb);
                best = std::min(best, std::hypot(x1 - tb, xd - wb));
                active.push_back({ta, tb, wa, wb});
                ta = tb;
                wa = wb;
            }
        }

        // branch and bound down to a relative certificate of size `gap` (the
        // wall height is monotone, so the per-cell interval bounds are exact)
        const double kGap = gap;
        const double floor_width = 1e-14 * (1.0 + std::fabs(x1) + std::fabs(xd));
        double floor_lb = best;
        std::size_t splits = 0;
        while (!active.empty()) {
            std::vector<Cell> next;
            next.reserve(active.size());
            for (const Cell& c : active) {
                if (cell_lower(c) >= best * (1.0 - kGap)) continue;  // pruned
                const double m = 0.5 * (c.a + c.b);
                const double wm = wall_height(m);
                best = std::min(best, std::hypot(x1 - m, xd - wm));
                if (c.b - c.a < floor_width) {
                    // resolution floor: keep the proven bound, stop splitting
                    floor_lb = std::min(floor_lb, cell_lower(c));
                    continue;
                }
                next.push_back({c.a, m, c.wa, wm});
                next.push_back({m, c.b, wm, c.wb});
                ++splits;
            }
            active.swap(next);
            if (splits > 400000)
                throw geometry_error("graph distance: certificate refinement stalled");
        }
        const double proven = std::min(best * (1.0 - kGap), floor_lb);
        return {proven, best};
    }

    Kind kind_;
    Point<D> center_{};
    double radius_ = 0.0;
    Modulus ell_;
    int sign_ = 1;
    double cone_slope_ = 1.0;
    std::shared_ptr<const Domain> base_;
    double width_ = 0.0;
};

}  // namespace fraclab
