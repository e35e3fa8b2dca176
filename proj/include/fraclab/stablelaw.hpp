#pragma once

// Closed-form constants and laws of the isotropic alpha-stable process:
// the kernel constant A_{d,alpha}, the half-space Poisson kernel constant
// C_{d,alpha}, the transverse projection constant kappa_proj, the power-profile
// constant C(d,alpha,p), the exact ball exit law, and the barrier profiles
// Phi/Psi/chi with their derivative closed forms.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "fraclab/errors.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/interp.hpp"
#include "fraclab/modulus.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/rng.hpp"
#include "fraclab/special.hpp"

namespace fraclab {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct StableIndex {
    double alpha;
    int d;
    StableIndex(double alpha_, int d_) : alpha(alpha_), d(d_) {
        if (!(alpha > 0.0) || !(alpha < 2.0))
            throw config_error("StableIndex: alpha must lie in (0,2)");
        if (d < 2) throw config_error("StableIndex: d must be >= 2");
    }
};

struct StableConstants {
    double A;           // jump kernel constant A_{d,alpha}
    double C;           // half-space Poisson kernel constant C_{d,alpha}
    double kappa_proj;  // transverse reduction: pi^{(d-1)/2} G((1+a)/2) / G((d+a)/2)
};

inline StableConstants stable_constants(const StableIndex& idx) {
    const double a = idx.alpha, d = idx.d;
    StableConstants out{};
    out.A = std::pow(2.0, a) * std::exp(std::lgamma(0.5 * (d + a))) /
            (std::pow(kPi, 0.5 * d) * std::exp(std::lgamma(-0.5 * a)));
    // lgamma(-a/2) is log|Gamma|; Gamma(-a/2) < 0 on (0,2), the absolute value
    // is what the constant uses.
    out.C = std::exp(std::lgamma(0.5 * d)) * std::pow(kPi, -0.5 * d - 1.0) *
            std::sin(0.5 * kPi * a);
    out.kappa_proj = std::pow(kPi, 0.5 * (d - 1)) *
                     std::exp(std::lgamma(0.5 * (a + 1.0)) - std::lgamma(0.5 * (d + a)));
    return out;
}

// C(d,alpha,p) normalized so that
//   p.v. int_{R^d_+} (y_d^p - x_d^p) |x-y|^{-d-alpha} dy = C(d,alpha,p) x_d^{p-alpha},
// which forces C(d,alpha,alpha/2) = kappa_proj/alpha (the literature sometimes
// prints twice this constant).
inline double c_dap(const StableIndex& idx, double p) {
    const double a = idx.alpha;
    if (!(p > -1.0) || !(p < a))
        throw std::domain_error("c_dap: p must lie in (-1, alpha)");
    const auto kp = stable_constants(idx).kappa_proj;
    // J(p) = int_0^1 (t^p - 1)(1 - t^{a-p-1}) (1-t)^{-1-a} dt, endpoint-singular
    // at both ends; evaluated against the exact distances to the endpoints.
    const double q = a - p - 1.0;
    const auto J = integrate_tanh_sinh(
        [p, q, a](double t, double t_from0, double t_from1) {
            const double logt = (t_from0 < 0.5) ? std::log(t_from0) : std::log1p(-t_from1);
            const double f1 = std::expm1(p * logt);        // t^p - 1
            const double f2 = -std::expm1(q * logt);       // 1 - t^{a-p-1}
            (void)t;
            return f1 * f2 * std::pow(t_from1, -1.0 - a);
        },
        0.0, 1.0, 1e-13);
    return kp * J.value;
}

// Half-space Poisson kernel P(x,z) = C_{d,alpha} x_d^{a/2} / (|z_d|^{a/2} |x-z|^d).
template <int D>
inline double halfspace_poisson(const StableIndex& idx, const Point<D>& x,
                                const Point<D>& z) {
    if (idx.d != D) throw config_error("halfspace_poisson: dimension mismatch");
    const double xd = x[D - 1], zd = z[D - 1];
    if (!(xd > 0.0) || !(zd < 0.0))
        throw std::domain_error("halfspace_poisson: need x_d > 0 and z_d < 0");
    const double a = idx.alpha;
    const double r = dist(x, z);
    return stable_constants(idx).C * std::pow(xd, 0.5 * a) /
           (std::pow(-zd, 0.5 * a) * std::pow(r, static_cast<double>(D)));
}

// Exact exit law of the unit ball started at the center: radius rho = W^{-1/2}
// with W ~ Beta(a/2, 1-a/2), direction uniform. The radial density is
// proportional to (rho^2-1)^{-a/2} rho^{-1} in every dimension.
inline double ball_exit_radius(double alpha, RngStream& rng) {
    const double a = 0.5 * alpha, b = 1.0 - 0.5 * alpha;
    // Johnk: exact for both shape parameters < 1
    for (;;) {
        const double x = std::pow(rng.uniform(), 1.0 / a);
        const double y = std::pow(rng.uniform(), 1.0 / b);
        const double s = x + y;
        if (s <= 1.0 && s > 0.0) return 1.0 / std::sqrt(x / s);
    }
}

template <int D>
inline Point<D> ball_exit_sample(const StableIndex& idx, RngStream& rng) {
    const double rho = ball_exit_radius(idx.alpha, rng);
    Point<D> dir;
    if constexpr (D == 2) {
        const double t = 2.0 * kPi * rng.uniform();
        dir = {std::cos(t), std::sin(t)};
    } else {
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (int i = 0; i < D; ++i) {
                dir[i] = rng.normal();
                n2 += dir[i] * dir[i];
            }
        } while (n2 == 0.0);
        const double inv = 1.0 / std::sqrt(n2);
        for (int i = 0; i < D; ++i) dir[i] *= inv;
    }
    for (int i = 0; i < D; ++i) dir[i] *= rho;
    return dir;
}

// P(rho <= t) for the radial exit law above.
inline double ball_exit_radial_cdf(double alpha, double t) {
    if (t <= 1.0) return 0.0;
    return 1.0 - reg_inc_beta(0.5 * alpha, 1.0 - 0.5 * alpha, 1.0 / (t * t));
}

// ------------------------------------------------------------------
// Barrier profiles
// ------------------------------------------------------------------

struct BarrierParams {
    double R;        // in (0,1]
    double lambda;   // > 0
    double k;        // > 0
    Modulus ell;
    double theta;    // scaling exponent backing eta
    double c0;       // measured scaling constant
    double eta;      // ((alpha - 2 theta) ^ (2 - alpha)) / 4

    BarrierParams(const StableIndex& idx, double R_, double lambda_, double k_, Modulus ell_,
                  std::optional<double> theta_override = {})
        : R(R_), lambda(lambda_), k(k_), ell(std::move(ell_)) {
        if (!(R > 0.0) || R > 1.0) throw config_error("BarrierParams: R must lie in (0,1]");
        if (!(lambda > 0.0) || !(k > 0.0))
            throw config_error("BarrierParams: lambda and k must be > 0");
        if (theta_override) {
            theta = *theta_override;
            c0 = fit_scaling_c0(theta);
        } else {
            const auto fit = fit_scaling(ell, idx.alpha);
            theta = fit.theta;
            c0 = fit.c0;
        }
        if (!(theta > 0.0) || !(theta < 0.5 * idx.alpha))
            throw config_error("BarrierParams: theta must lie in (0, alpha/2)");
        eta = 0.25 * std::min(idx.alpha - 2.0 * theta, 2.0 - idx.alpha);
    }

    void require_hypothesis() const {
        const double le = ell.is_zero() ? 0.0 : ell(R);
        if (!(lambda * le < eta))
            throw config_error("barrier hypothesis violated: lambda*ell(R) = " +
                               std::to_string(lambda * le) + " must be < eta = " +
                               std::to_string(eta));
    }

  private:
    double fit_scaling_c0(double th) const {
        if (ell.is_zero()) return 1.0;
        double c = 1.0;
        for (int i = 0; i <= 160; ++i)
            for (int j = i; j <= 160; ++j) {
                const double s = std::pow(10.0, -6.0 + 6.0 * i / 160.0);
                const double r = std::pow(10.0, -6.0 + 6.0 * j / 160.0);
                c = std::max(c, (ell(r) / ell(s)) * std::pow(s / r, th));
            }
        return c * 1.005;
    }
};

enum class BarrierVariant { Phi, Psi, Chi };

// Phi_{R,lambda,k}(r) = (r/R)^{a/2} exp(-lambda int_{kr}^R ell(u^R)/u du), Psi the
// +lambda twin, chi the clipped power (r/R)^{a/2+eta}. The exponent integral is
// cached on a geometric grid in log r; above R it has the exact closed form
// -ell(R) log(y/R).
class Barrier {
  public:
    Barrier(const StableIndex& idx, BarrierParams params, BarrierVariant variant)
        : alpha_(idx.alpha), p_(std::move(params)), variant_(variant) {
        if (variant_ != BarrierVariant::Chi) p_.require_hypothesis();
        if (!p_.ell.is_zero() && variant_ != BarrierVariant::Chi) build_cache();
    }

    const BarrierParams& params() const { return p_; }
    double eta() const { return p_.eta; }

    double operator()(double r) const {
        if (r <= 0.0) return 0.0;
        const double base = std::pow(r / p_.R, 0.5 * alpha_);
        switch (variant_) {
            case BarrierVariant::Phi:
                return base * std::exp(-p_.lambda * exponent_integral(p_.k * r));
            case BarrierVariant::Psi:
                return base * std::exp(p_.lambda * exponent_integral(p_.k * r));
            case BarrierVariant::Chi: {
                const double v = std::pow(r / p_.R, 0.5 * alpha_ + p_.eta);
                return std::min(1.0, v);
            }
        }
        return 0.0;
    }

    // log-derivative coefficient a(r): F'(r) = a(r) F(r) / r
    double log_slope(double r) const {
        if (variant_ == BarrierVariant::Chi) return 0.5 * alpha_ + p_.eta;
        const double sign = (variant_ == BarrierVariant::Phi) ? 1.0 : -1.0;
        return 0.5 * alpha_ + sign * p_.lambda * ell_at(p_.k * r);
    }

    double derivative(double r) const {
        if (r <= 0.0) return 0.0;
        return log_slope(r) * (*this)(r) / r;
    }

    double second_derivative(double r) const {
        if (r <= 0.0) return 0.0;
        const double a = log_slope(r);
        const double sign = (variant_ == BarrierVariant::Phi) ? 1.0 : -1.0;
        double dell = 0.0;
        if (variant_ != BarrierVariant::Chi && !p_.ell.is_zero() && p_.k * r < p_.R)
            dell = p_.ell.derivative(p_.k * r);
        const double v = (*this)(r);
        return (a * (a - 1.0) / (r * r) + sign * p_.lambda * p_.k * dell / r) * v;
    }

    // kinks where the profile is only C^1 (quadratures split here)
    std::array<double, 2> kinks() const { return {p_.R / p_.k, 1.0 / p_.k}; }

  private:
    double ell_at(double y) const {
        if (p_.ell.is_zero()) return 0.0;
        return p_.ell(std::min(y, p_.R));
    }

    void build_cache() {
        constexpr int N = 2048;
        const double ymin = 1e-290;
        std::vector<double> lx(N), val(N);
        const double lo = std::log(ymin), hi = std::log(p_.R);
        // E(y) = int_y^R ell(u)/u du built by backward prefix panels in log u
        std::vector<double> nodes(N);
        for (int i = 0; i < N; ++i) nodes[i] = lo + (hi - lo) * i / (N - 1);
        auto panel = [this](double ta, double tb) {
            const double c = 0.5 * (ta + tb), h = 0.5 * (tb - ta);
            double acc = detail::kGK15WK[7] * p_.ell(std::exp(c));
            for (int i = 0; i < 7; ++i) {
                const double dx = h * detail::kGK15X[i];
                acc += detail::kGK15WK[i] *
                       (p_.ell(std::exp(c - dx)) + p_.ell(std::exp(c + dx)));
            }
            return acc * h;
        };
        val[N - 1] = 0.0;
        for (int i = N - 2; i >= 0; --i)
            val[i] = val[i + 1] + panel(nodes[i], nodes[i + 1]);
        for (int i = 0; i < N; ++i) lx[i] = nodes[i];
        // stored as a decreasing function of log y
        cache_ = MonotoneCubic(std::move(lx), flip(val));
        have_cache_ = true;
    }

    static std::vector<double> flip(std::vector<double> v) {
        for (auto& x : v) x = -x;  // store -E so the curve is increasing
        return v;
    }

    double exponent_integral(double y) const {
        if (p_.ell.is_zero() || !have_cache_) return 0.0;
        if (y >= p_.R) return -p_.ell(p_.R) * std::log(y / p_.R);
        if (y < 1e-290) y = 1e-290;
        return -cache_(std::log(y));
    }

    double alpha_;
    BarrierParams p_;
    BarrierVariant variant_;
    MonotoneCubic cache_;
    bool have_cache_ = false;
};

inline double barrier_eval(const StableIndex& idx, const BarrierParams& params, double r,
                           BarrierVariant variant) {
    return Barrier(idx, params, variant)(r);
}

// ------------------------------------------------------------------
// Iteration lemma and Stirling predicate
// ------------------------------------------------------------------

struct IterationCheck {
    double min_over_n;   // min_n c0 n! / b^n
    double lemma_bound;  // e^{3/2} c0 e^{-b/2}
    double max_over_n;   // max_n b^n / (c0 n!)
    double dual_bound;   // e^{-3/2} c0^{-1} e^{b/2}
    bool decay_holds;    // min_over_n <= lemma_bound (1 + 1e-12)
    bool blowup_holds;   // max_over_n >= dual_bound (1 - 1e-12)
};

inline IterationCheck iteration_bound_check(double b, double c0, int n_max) {
    if (!(b > 0.0) || !(c0 > 1.0))
        throw std::domain_error("iteration_bound_check: need b > 0, c0 > 1");
    if (n_max < static_cast<int>(std::ceil(b)) + 2)
        throw std::domain_error("iteration_bound_check: n_max must be >= ceil(b)+2");
    const double logb = std::log(b), logc = std::log(c0);
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_max; ++n)
        best = std::min(best, logc + std::lgamma(n + 1.0) - n * logb);
    IterationCheck out{};
    out.min_over_n = std::exp(best);
    out.lemma_bound = std::exp(1.5 + logc - 0.5 * b);
    out.max_over_n = std::exp(-best);  // the dual expression attains its max at the same n
    out.dual_bound = std::exp(-1.5 - logc + 0.5 * b);
    out.decay_holds = best <= (1.5 + logc - 0.5 * b) + 1e-12;
    out.blowup_holds = -best >= (-1.5 - logc + 0.5 * b) - 1e-12;
    return out;
}

// n! <= e sqrt(n) (n/e)^n, in log space.
inline bool stirling_upper_holds(int n) {
    if (n < 1) throw std::domain_error("stirling_upper_holds: n >= 1");
    const double lhs = std::lgamma(n + 1.0);
    const double rhs = 1.0 + 0.5 * std::log(static_cast<double>(n)) +
                       n * (std::log(static_cast<double>(n)) - 1.0);
    return lhs <= rhs + 1e-12;
}

// Free transition density comparability envelope t^{-d/a} ^ t |x-y|^{-d-a}.
template <int D>
inline std::array<double, 2> free_kernel_envelope(const StableIndex& idx, double t,
                                                  const Point<D>& x, const Point<D>& y) {
    if (!(t > 0.0)) throw std::domain_error("free_kernel_envelope: t must be > 0");
    const double r = dist(x, y);
    const double near = std::pow(t, -static_cast<double>(idx.d) / idx.alpha);
    const double shape =
        (r == 0.0) ? near : std::min(near, t / std::pow(r, idx.d + idx.alpha));
    return {shape, shape};
}

}  // namespace fraclab
