#pragma once

// Walk-on-spheres for the isotropic alpha-stable process. Each step jumps to
// an exact exit position of the largest certified inscribed ball, so the walk
// terminates at an exact draw from the harmonic measure of the domain.
//
// Walks are independent tasks keyed by (seed, walk index); tallies are
// integers merged per thread, so estimates are bitwise independent of the
// thread count.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/rng.hpp"
#include "fraclab/stablelaw.hpp"

namespace fraclab {

struct WalkConfig {
    int max_steps = 100000;
    double gamma = 0.999;  // safety factor on the certified inscribed radius
    int threads = 0;       // 0 = hardware
};

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <int D>
struct WalkOutcome {
    Point<D> exit_point{};
    int steps = 0;
    double max_excursion = 0.0;
    bool truncated = false;
};

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    uint64_t n_walks = 0;
    uint64_t seed = 0;
    double mean_steps = 0.0;
    uint64_t successes = 0;
    uint64_t discarded = 0;
};

template <int D>
WalkOutcome<D> run_walk(const Domain<D>& domain, const StableIndex& idx,
                        const Point<D>& start, RngStream& rng,
                        const WalkConfig& cfg = {}) {
    if (idx.d != D) throw config_error("run_walk: dimension mismatch");
    WalkOutcome<D> out;
    Point<D> x = start;
    for (int step = 0; step < cfg.max_steps; ++step) {
        double r = domain.step_radius(x, cfg.gamma);
        if (!(r > 1e-300)) {
            // either the walker left the domain (exit) or it sits so close to
            // the boundary that the fast bounds vanish; resolve precisely
            if (!domain.contains(x)) {
                if (step == 0)
                    throw geometry_error("run_walk: start point outside the domain");
                out.exit_point = x;
                out.steps = step;
                return out;
            }
            r = domain.inner_radius(x, cfg.gamma);
            if (!(r > 1e-300)) {  // hairline: certified radius underflowed
                out.truncated = true;
                out.steps = step;
                out.exit_point = x;
                return out;
            }
        }
        const Point<D> jump = ball_exit_sample<D>(idx, rng);
        for (int i = 0; i < D; ++i) x[i] += r * jump[i];
        out.max_excursion = std::max(out.max_excursion, dist(x, start));
    }
    out.truncated = true;
    out.steps = cfg.max_steps;
    out.exit_point = x;
    return out;
}

namespace detail {

struct Tally {
    uint64_t successes = 0;
    uint64_t steps = 0;
    uint64_t discarded = 0;
};

// Deterministic data-parallel walk loop: contiguous index ranges per thread,
// integer tallies merged in thread order. Worker exceptions are captured and
// rethrown on the calling thread.
template <class PerWalk>
inline Tally parallel_tally(uint64_t n, int threads, const PerWalk& per_walk) {
    const int T = std::max(1, threads);
    std::vector<Tally> parts(T);
    std::vector<std::exception_ptr> errors(T);
    std::vector<std::thread> pool;
    const uint64_t chunk = (n + T - 1) / T;
    for (int t = 0; t < T; ++t) {
        const uint64_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t]() {
            try {
                Tally local;
                for (uint64_t w = lo; w < hi; ++w) per_walk(w, local);
                parts[t] = local;
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    Tally total;
    for (const auto& p : parts) {
        total.successes += p.successes;
        total.steps += p.steps;
        total.discarded += p.discarded;
    }
    return total;
}

inline Estimate finalize(const Tally& t, uint64_t n, uint64_t seed) {
    if (t.discarded * 1000000 > n)
        throw numeric_error("walk engine: " + std::to_string(t.discarded) + " of " +
                            std::to_string(n) + " walks truncated (limit 1e-6)");
    Estimate e;
    e.n_walks = n;
    e.seed = seed;
    e.successes = t.successes;
    e.discarded = t.discarded;
    const uint64_t kept = n - t.discarded;
    const double p = kept ? static_cast<double>(t.successes) / kept : 0.0;
    e.mean = p;
    e.stderr_ = kept ? std::sqrt(p * (1.0 - p) / kept) : 0.0;
    e.mean_steps = kept ? static_cast<double>(t.steps) / kept : 0.0;
    return e;
}

}  // namespace detail

// Monte Carlo mean of an indicator of the exit position.
template <int D, class Pred>
Estimate harmonic_measure(const Domain<D>& domain, const StableIndex& idx,
                          const Point<D>& start, const Pred& target, uint64_t n,
                          uint64_t seed, const WalkConfig& cfg = {}) {
    if (!domain.contains(start))
        throw geometry_error("harmonic_measure: start must lie inside the domain");
    const auto tally = detail::parallel_tally(
        n, resolve_threads(cfg.threads), [&](uint64_t w, detail::Tally& local) {
            RngStream rng(seed, w);
            const auto out = run_walk(domain, idx, start, rng, cfg);
            if (out.truncated) {
                ++local.discarded;
                return;
            }
            local.steps += static_cast<uint64_t>(out.steps);
            if (target(out.exit_point)) ++local.successes;
        });
    return detail::finalize(tally, n, seed);
}

// Exit-position histogram over a user classifier (bin < 0 = unbinned); one walk
// population shared across bins.
template <int D, class Classifier>
std::vector<Estimate> exit_histogram(const Domain<D>& domain, const StableIndex& idx,
                                     const Point<D>& start, int bins,
                                     const Classifier& classify, uint64_t n, uint64_t seed,
                                     const WalkConfig& cfg = {}) {
    if (!domain.contains(start))
        throw geometry_error("exit_histogram: start must lie inside the domain");
    const int T = resolve_threads(cfg.threads);
    std::vector<std::vector<uint64_t>> counts(T, std::vector<uint64_t>(bins, 0));
    std::vector<uint64_t> discards(T, 0);
    std::vector<std::exception_ptr> errors(T);
    std::vector<std::thread> pool;
    const uint64_t chunk = (n + T - 1) / T;
    for (int t = 0; t < T; ++t) {
        const uint64_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t]() {
            try {
                for (uint64_t w = lo; w < hi; ++w) {
                    RngStream rng(seed, w);
                    const auto out = run_walk(domain, idx, start, rng, cfg);
                    if (out.truncated) {
                        ++discards[t];
                        continue;
                    }
                    const int b = classify(out.exit_point);
                    if (b >= 0 && b < bins) ++counts[t][b];
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    uint64_t discarded = 0;
    for (auto d : discards) discarded += d;
    if (discarded * 1000000 > n)
        throw numeric_error("exit_histogram: truncation fraction above 1e-6");
    const uint64_t kept = n - discarded;
    std::vector<Estimate> out(bins);
    for (int b = 0; b < bins; ++b) {
        uint64_t hits = 0;
        for (int t = 0; t < T; ++t) hits += counts[t][b];
        Estimate e;
        e.n_walks = n;
        e.seed = seed;
        e.successes = hits;
        e.discarded = discarded;
        const double p = kept ? static_cast<double>(hits) / kept : 0.0;
        e.mean = p;
        e.stderr_ = kept ? std::sqrt(p * (1.0 - p) / kept) : 0.0;
        out[b] = e;
    }
    return out;
}

// Survival through the collar: the walker leaves D(R) either into the deep
// interior of D (success) or out of D (failure). An exit point classified as
// still inside the collar indicates a distance-oracle bug and throws.
template <int D>
Estimate collar_survival(const Domain<D>& base, double R, const StableIndex& idx,
                         const Point<D>& start, uint64_t n, uint64_t seed,
                         const WalkConfig& cfg = {}) {
    const auto collar = Domain<D>::collar(base, R);
    if (!collar.contains(start))
        throw geometry_error("collar_survival: start must lie in the collar");
    const auto tally = detail::parallel_tally(
        n, resolve_threads(cfg.threads), [&](uint64_t w, detail::Tally& local) {
            RngStream rng(seed, w);
            const auto out = run_walk(collar, idx, start, rng, cfg);
            if (out.truncated) {
                ++local.discarded;
                return;
            }
            local.steps += static_cast<uint64_t>(out.steps);
            const auto& z = out.exit_point;
            if (!base.contains(z)) return;  // killed
            if (base.step_lower(z) >= R) {
                ++local.successes;  // certified deep interior
                return;
            }
            const double d = base.distance(z).estimate;
            if (d >= R * (1.0 - 1e-9)) {
                ++local.successes;
                return;
            }
            throw geometry_error(
                "collar_survival: exit point classified inside the collar "
                "(delta=" +
                std::to_string(d) + ", R=" + std::to_string(R) + ")");
        });
    return detail::finalize(tally, n, seed);
}

// ------------------------------------------------------------------
// The Theta / Xi functionals
// ------------------------------------------------------------------

enum class ThetaXiVariant { Theta, Xi };

template <int D>
struct ThetaXiGeometry {
    ThetaXiVariant variant;
    double size_constant;   // K = 1 + ell(8) or L = 1 + ell(1)
    double collar_width;    // 32 K R or 8 L R
    double target_height;   // validated: the target ball must clear the collar
    double target_radius;   // R
    bool target_lifted = false;
    Domain<D> collar_domain;
    Point<D> target_center{};
};

// Builds the collar-and-target geometry. The nominal target heights are
// 34 K R (Theta) and 10 L R (Xi); when the wall slope is large the nominal
// Theta target ball intersects the collar and the event would be empty, so the
// height is lifted by the distance oracle until the ball clears the collar.
template <int D>
ThetaXiGeometry<D> make_theta_xi_geometry(ThetaXiVariant variant, const Modulus& ell,
                                          double R) {
    if (!(R > 0.0) || R > 1.0) throw config_error("theta_xi: R must lie in (0,1]");
    ThetaXiGeometry<D> g{variant,
                         0.0,
                         0.0,
                         0.0,
                         R,
                         false,
                         Domain<D>::collar(Domain<D>::halfspace(), 1.0),
                         {}};
    const int sign = (variant == ThetaXiVariant::Theta) ? +1 : -1;
    auto base = Domain<D>::graph(ell, sign);
    if (variant == ThetaXiVariant::Theta) {
        g.size_constant = 1.0 + (ell.is_zero() ? 0.0 : ell(8.0));
        g.collar_width = 32.0 * g.size_constant * R;
        g.target_height = 34.0 * g.size_constant * R;
    } else {
        g.size_constant = 1.0 + (ell.is_zero() ? 0.0 : ell(1.0));
        g.collar_width = 8.0 * g.size_constant * R;
        g.target_height = 10.0 * g.size_constant * R;
    }
    for (int lift = 0; lift < 64; ++lift) {
        Point<D> c{};
        c[D - 1] = g.target_height;
        const double clearance = base.distance(c).certified_lower;
        if (clearance >= g.collar_width + g.target_radius * 1.000001) {
            g.target_center = c;
            break;
        }
        g.target_height *= 1.25;
        g.target_lifted = true;
        if (lift == 63)
            throw geometry_error("theta_xi: could not place the target outside the collar");
    }
    g.collar_domain = Domain<D>::collar(std::move(base), g.collar_width);
    return g;
}

template <int D>
struct ThetaXiEstimate {
    Estimate raw;       // plain exit probability into the target ball
    double scaled;      // (R/r)^{alpha/2} * raw.mean
    double scaled_err;  // same scaling on the binomial stderr
    ThetaXiGeometry<D> geometry;
};

template <int D>
ThetaXiEstimate<D> theta_xi(ThetaXiVariant variant, const Modulus& ell,
                            const StableIndex& idx, double R, double r, uint64_t n,
                            uint64_t seed, const WalkConfig& cfg = {}) {
    if (!(r > 0.0) || r > R) throw std::domain_error("theta_xi: need 0 < r <= R");
    auto g = make_theta_xi_geometry<D>(variant, ell, R);
    Point<D> start{};
    start[D - 1] = r;
    const auto est = harmonic_measure(
        g.collar_domain, idx, start,
        [&g](const Point<D>& z) { return dist(z, g.target_center) < g.target_radius; },
        n, seed, cfg);
    const double scale = std::pow(R / r, 0.5 * idx.alpha);
    return ThetaXiEstimate<D>{est, scale * est.mean, scale * est.stderr_, std::move(g)};
}

}  // namespace fraclab
