#pragma once

// Moduli of continuity: evaluation, Dini classification, and the double
// integral regularization that smooths a modulus while keeping it comparable.
// Modulus values are immutable after construction (caches are built eagerly),
// so they can be shared freely across concurrent walkers.

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/interp.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

enum class ModulusFamily { constant, power, logpower, table, regularized };

inline const char* family_name(ModulusFamily f) {
    switch (f) {
        case ModulusFamily::constant: return "constant";
        case ModulusFamily::power: return "power";
        case ModulusFamily::logpower: return "logpower";
        case ModulusFamily::table: return "table";
        case ModulusFamily::regularized: return "regularized";
    }
    return "?";
}

namespace detail {

struct ModulusImpl {
    virtual ~ModulusImpl() = default;
    virtual double eval(double r) const = 0;   // r > 0, extension already applied
    virtual double deriv(double r) const = 0;  // one-sided at kinks
    virtual ModulusFamily family() const = 0;
    virtual bool extended() const = 0;
    virtual std::optional<double> analytic_theta() const { return {}; }
    virtual std::optional<bool> analytic_dini() const { return {}; }
    // sup_r r l'(r)/l(r); analytic for closed families, measured otherwise
    virtual double regularity_constant() const = 0;
    virtual std::string describe() const = 0;
};

struct ConstantModulus final : ModulusImpl {
    double c;
    explicit ConstantModulus(double c_) : c(c_) {
        if (c < 0.0) throw config_error("constant modulus: c must be >= 0");
    }
    double eval(double) const override { return c; }
    double deriv(double) const override { return 0.0; }
    ModulusFamily family() const override { return ModulusFamily::constant; }
    bool extended() const override { return true; }
    std::optional<double> analytic_theta() const override { return {}; }
    std::optional<bool> analytic_dini() const override { return c == 0.0; }
    double regularity_constant() const override { return 0.0; }
    std::string describe() const override { return "constant(" + std::to_string(c) + ")"; }
};

struct PowerModulus final : ModulusImpl {
    double lambda, eps;
    bool extend;
    PowerModulus(double l, double e, bool ext) : lambda(l), eps(e), extend(ext) {
        if (!(l > 0.0) || !(e > 0.0) || e > 1.0)
            throw config_error("power modulus: need Lambda > 0 and eps in (0,1]");
    }
    double eval(double r) const override {
        if (extend && r >= 1.0) return lambda;
        return lambda * std::pow(r, eps);
    }
    double deriv(double r) const override {
        if (extend && r >= 1.0) return 0.0;
        return lambda * eps * std::pow(r, eps - 1.0);
    }
    ModulusFamily family() const override { return ModulusFamily::power; }
    bool extended() const override { return extend; }
    std::optional<double> analytic_theta() const override { return eps; }
    std::optional<bool> analytic_dini() const override { return true; }
    double regularity_constant() const override { return eps; }
    std::string describe() const override {
        return "power(" + std::to_string(lambda) + "," + std::to_string(eps) + ")";
    }
};

struct LogPowerModulus final : ModulusImpl {
    double p;
    bool extend;
    LogPowerModulus(double p_, bool ext) : p(p_), extend(ext) {
        if (!(p >= 0.0)) throw config_error("logpower modulus: need p >= 0");
    }
    double eval(double r) const override {
        if (extend && r >= 1.0) return std::pow(std::log(2.0), -p);
        return std::pow(std::log1p(1.0 / r), -p);
    }
    double deriv(double r) const override {
        if (p == 0.0 || (extend && r >= 1.0)) return 0.0;
        const double L = std::log1p(1.0 / r);
        return p * std::pow(L, -p - 1.0) / (r * r + r);
    }
    ModulusFamily family() const override { return ModulusFamily::logpower; }
    bool extended() const override { return extend; }
    std::optional<bool> analytic_dini() const override { return p > 1.0; }
    double regularity_constant() const override {
        // r l'/l = p/((1+r) log(1+1/r)), increasing on (0,1]; sup at r=1
        return p / (2.0 * std::log(2.0));
    }
    std::string describe() const override { return "logpower(" + std::to_string(p) + ")"; }
};

struct TableModulus final : ModulusImpl {
    MonotoneCubic curve;  // over log r
    double rmin, rmax, top;
    bool extend;
    double creg;
    TableModulus(std::vector<double> r, std::vector<double> v, bool ext) : extend(ext) {
        if (r.size() != v.size() || r.size() < 2)
            throw config_error("table modulus: need >= 2 matching samples");
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!(r[i] > 0.0) || !(v[i] >= 0.0))
                throw config_error("table modulus: samples must have r > 0, value >= 0");
            if (i > 0 && (r[i] <= r[i - 1] || v[i] < v[i - 1]))
                throw config_error("table modulus: samples must be increasing");
        }
        rmin = r.front();
        rmax = r.back();
        top = v.back();
        std::vector<double> lx(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) lx[i] = std::log(r[i]);
        curve = MonotoneCubic(std::move(lx), std::move(v));
        double c = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double x = rmin * std::pow(rmax / rmin, i / 400.0);
            const double val = curve(std::log(x));
            if (val > 0.0) c = std::max(c, curve.derivative(std::log(x)) / val);
        }
        creg = 1.25 * c;  // grid measurement with headroom
    }
    void check_range(double r) const {
        if (r < rmin || (!extend && r > rmax))
            throw extrapolation_error("table modulus queried at r=" + std::to_string(r) +
                                      " outside sample range [" + std::to_string(rmin) +
                                      "," + std::to_string(rmax) + "]");
    }
    double eval(double r) const override {
        if (extend && r >= rmax) return top;
        check_range(r);
        return curve(std::log(r));
    }
    double deriv(double r) const override {
        if (extend && r >= rmax) return 0.0;
        check_range(r);
        return curve.derivative(std::log(r)) / r;
    }
    ModulusFamily family() const override { return ModulusFamily::table; }
    bool extended() const override { return extend; }
    double regularity_constant() const override { return creg; }
    std::string describe() const override { return "table[" + std::to_string(rmin) + ".." + std::to_string(rmax) + "]"; }
};

struct RegularizedModulus;  // defined after Modulus

}  // namespace detail

struct ThetaFit {
    double theta = 0.0;
    double c0 = 1.0;   // measured sup (l(r)/l(s)) (s/r)^theta over grid pairs
    bool analytic = false;
};

class Modulus {
  public:
    Modulus() = default;

    static Modulus constant(double c) {
        return Modulus(std::make_shared<detail::ConstantModulus>(c));
    }
    static Modulus zero() { return constant(0.0); }
    static Modulus power(double lambda, double eps, bool extend = true) {
        return Modulus(std::make_shared<detail::PowerModulus>(lambda, eps, extend));
    }
    static Modulus logpower(double p, bool extend = true) {
        return Modulus(std::make_shared<detail::LogPowerModulus>(p, extend));
    }
    static Modulus table(std::vector<double> r, std::vector<double> v, bool extend = true) {
        return Modulus(std::make_shared<detail::TableModulus>(std::move(r), std::move(v), extend));
    }
    static Modulus regularized(const Modulus& inner);

    bool valid() const { return impl_ != nullptr; }

    double operator()(double r) const {
        if (!(r > 0.0)) throw std::domain_error("modulus: r must be > 0");
        return impl_->eval(r);
    }
    double derivative(double r) const {
        if (!(r > 0.0)) throw std::domain_error("modulus: r must be > 0");
        return impl_->deriv(r);
    }

    ModulusFamily family() const { return impl_->family(); }
    bool extended() const { return impl_->extended(); }
    bool is_zero() const {
        return impl_->family() == ModulusFamily::constant && impl_->eval(1.0) == 0.0;
    }
    std::optional<double> analytic_theta() const { return impl_->analytic_theta(); }
    std::optional<bool> analytic_dini() const { return impl_->analytic_dini(); }
    double regularity_constant() const { return impl_->regularity_constant(); }
    std::string describe() const { return impl_->describe(); }
    const Modulus& inner() const;

    // second derivative where the family defines one (regularized only)
    double second_derivative(double r) const;

    const detail::ModulusImpl* raw() const { return impl_.get(); }

  private:
    explicit Modulus(std::shared_ptr<const detail::ModulusImpl> impl,
                     std::shared_ptr<const Modulus> inner = nullptr)
        : impl_(std::move(impl)), inner_(std::move(inner)) {}

    std::shared_ptr<const detail::ModulusImpl> impl_;
    std::shared_ptr<const Modulus> inner_;
};

inline double eval_modulus(const Modulus& m, double r) { return m(r); }

// integral_a^b l(u)/u du, adaptive after the substitution u = e^t.
inline double dini_integral(const Modulus& m, double a, double b, double rel_tol = 1e-10) {
    if (!(a > 0.0)) throw std::domain_error("dini_integral: need a > 0");
    if (!(a <= b)) throw std::domain_error("dini_integral: need a <= b");
    if (a == b || m.is_zero()) return 0.0;
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-300;
    const auto res = integrate_gk([&m](double t) { return m(std::exp(t)); }, std::log(a),
                                  std::log(b), opt);
    return res.value;
}

struct DiniReport {
    bool is_dini = false;
    bool heuristic_is_dini = false;
    std::optional<bool> analytic;            // authoritative when present
    std::vector<std::pair<double, double>> integral_tail;  // (a, I(a,1)), a descending
    double divergence_rate = 0.0;            // d I / d log(1/a) over the last decade
};

inline DiniReport classify_dini(const Modulus& m, double probe_floor) {
    if (!(probe_floor > 0.0) || probe_floor > 1e-3)
        throw std::domain_error("classify_dini: probe_floor must lie in (0, 1e-3]");
    DiniReport rep;
    const int kmax = static_cast<int>(std::ceil(-std::log10(probe_floor)));
    double prev = 0.0;
    for (int k = 1; k <= kmax; ++k) {
        const double a = std::max(std::pow(10.0, -k), probe_floor);
        const double tail = dini_integral(m, a, 1.0);
        rep.integral_tail.emplace_back(a, tail);
        if (k == kmax) rep.divergence_rate = (tail - prev) / std::log(10.0);
        prev = tail;
        if (a == probe_floor) break;
    }
    const double last_increment =
        rep.integral_tail.size() >= 2
            ? rep.integral_tail.back().second -
                  rep.integral_tail[rep.integral_tail.size() - 2].second
            : rep.integral_tail.back().second;
    rep.heuristic_is_dini = last_increment <= 1e-6;
    rep.analytic = m.analytic_dini();
    rep.is_dini = rep.analytic ? *rep.analytic : rep.heuristic_is_dini;
    return rep;
}

// Scaling fit: the smallest usable exponent is existential, so we take a
// proposal (analytic when the family has one, alpha/4 otherwise) and measure
// the constant c0 over grid pairs in [1e-6, 1].
inline ThetaFit fit_scaling(const Modulus& m, double alpha) {
    ThetaFit fit;
    if (auto t = m.analytic_theta(); t && *t < 0.5 * alpha) {
        fit.theta = *t;
        fit.analytic = true;
    } else {
        fit.theta = 0.25 * alpha;
    }
    if (m.is_zero()) return fit;
    constexpr int N = 160;
    std::vector<double> grid(N + 1), val(N + 1);
    for (int i = 0; i <= N; ++i) {
        grid[i] = std::pow(10.0, -6.0 + 6.0 * i / N);
        val[i] = m(grid[i]);
    }
    double c0 = 1.0;
    for (int i = 0; i <= N; ++i)
        for (int j = i; j <= N; ++j)
            if (val[i] > 0.0)
                c0 = std::max(c0, (val[j] / val[i]) * std::pow(grid[i] / grid[j], fit.theta));
    fit.c0 = c0 * 1.005;  // headroom for off-grid pairs
    return fit;
}

namespace detail {

// l_bar(r) = (1/r) int_0^r (1/s) int_0^s l(u) du ds, with closed-form first and
// second derivatives through A(r) = int_0^r l and M(r) = A(r)/r:
//   r l_bar'(r)   = M(r) - l_bar(r)
//   r^2 l_bar''(r) = l(r) - 3 M(r) + 2 l_bar(r)
// Cached on a geometric grid; exact closed form above r = 1 where l is flat.
struct RegularizedModulus final : ModulusImpl {
    static constexpr int kGridSize = 4096;
    static constexpr double kGridMin = 1e-9;

    Modulus base;
    MonotoneCubic lbar_curve, m_curve;  // over log r on [kGridMin, 1]
    double A1 = 0.0, B1 = 0.0, l1 = 0.0;
    double creg = 0.0;
    std::optional<bool> base_dini;

    explicit RegularizedModulus(Modulus inner) : base(std::move(inner)) {
        if (!base.extended())
            throw config_error("regularize: inner modulus must carry the r>=1 extension");
        if (base.is_zero())
            throw config_error("regularize: zero modulus has trivial regularization");
        base_dini = base.analytic_dini();
        build();
    }

    // A(s) for s below the grid floor: l is within [l(eps), l(s)] there, and the
    // table family may not reach; a linear-in-r model below the smallest
    // representable scale keeps the tail contribution bounded by s*l(s).
    double tail_A(double s) const {
        const auto res = integrate_gk(
            [this, s](double v) { return base_eval_clamped(s * v); }, 0.0, 1.0,
            {1e-12, 1e-300, 2000});
        return s * res.value;
    }

    double base_eval_clamped(double u) const {
        if (u <= 0.0) return 0.0;
        if (base.family() == ModulusFamily::table) {
            // below-range linear continuation, only used inside build integrals
            const auto* tab = static_cast<const TableModulus*>(base.raw());
            if (u < tab->rmin) return tab->eval(tab->rmin) * (u / tab->rmin);
        }
        return base(u);
    }

    void build() {
        std::vector<double> r(kGridSize), A(kGridSize), B(kGridSize);
        const double ratio = std::pow(1.0 / kGridMin, 1.0 / (kGridSize - 1));
        for (int i = 0; i < kGridSize; ++i) r[i] = kGridMin * std::pow(ratio, i);
        r[kGridSize - 1] = 1.0;

        auto panel15 = [this](double lo, double hi, auto&& g) {
            const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
            double acc = kGK15WK[7] * g(c);
            for (int i = 0; i < 7; ++i) {
                const double dx = h * kGK15X[i];
                acc += kGK15WK[i] * (g(c - dx) + g(c + dx));
            }
            return acc * h;
        };

        A[0] = tail_A(r[0]);
        for (int i = 0; i + 1 < kGridSize; ++i)
            A[i + 1] = A[i] + panel15(r[i], r[i + 1],
                                      [this](double u) { return base_eval_clamped(u); });

        // B panels evaluate M(s) = (A_i + int_{r_i}^s l)/s with a short fixed rule
        B[0] = integrate_gk(
                   [this](double s) {
                       return s > 0.0 ? tail_A(s) / s : 0.0;
                   },
                   0.0, r[0], {1e-10, 1e-300, 800})
                   .value;
        for (int i = 0; i + 1 < kGridSize; ++i) {
            const double ri = r[i], Ai = A[i];
            auto M = [&](double s) {
                return (Ai + panel15(ri, s, [this](double u) { return base_eval_clamped(u); })) / s;
            };
            B[i + 1] = B[i] + panel15(ri, r[i + 1], M);
        }

        std::vector<double> lx(kGridSize), lbar(kGridSize), mvals(kGridSize);
        for (int i = 0; i < kGridSize; ++i) {
            lx[i] = std::log(r[i]);
            lbar[i] = B[i] / r[i];
            mvals[i] = A[i] / r[i];
        }
        A1 = A.back();
        B1 = B.back();
        l1 = base(1.0);

        double c = 0.0;
        for (int i = 0; i < kGridSize; ++i) {
            const double v = lbar[i];
            if (v > 0.0) c = std::max(c, (mvals[i] - v) / v);
        }
        creg = 1.25 * c;

        lbar_curve = MonotoneCubic(lx, lbar);
        m_curve = MonotoneCubic(std::move(lx), std::move(mvals));
    }

    double M_of(double r) const {
        if (r >= 1.0) return l1 + (A1 - l1) / r;
        if (r >= kGridMin) return m_curve(std::log(r));
        return tail_A(r) / r;
    }

    double eval(double r) const override {
        if (r >= 1.0) return (B1 + l1 * (r - 1.0) + (A1 - l1) * std::log(r)) / r;
        if (r >= kGridMin) return lbar_curve(std::log(r));
        // slow path below the cache: nested adaptive quadrature
        const auto res = integrate_gk(
            [this, r](double v) {
                const double s = r * v;
                return s > 0.0 ? tail_A(s) / s : 0.0;
            },
            0.0, 1.0, {1e-10, 1e-300, 2000});
        return res.value;
    }

    double deriv(double r) const override { return (M_of(r) - eval(r)) / r; }

    double second(double r) const {
        return (base_eval_clamped(r) - 3.0 * M_of(r) + 2.0 * eval(r)) / (r * r);
    }

    ModulusFamily family() const override { return ModulusFamily::regularized; }
    bool extended() const override { return true; }
    std::optional<bool> analytic_dini() const override { return base_dini; }
    double regularity_constant() const override { return creg; }
    std::string describe() const override { return "regularized(" + base.describe() + ")"; }
};

}  // namespace detail

inline Modulus Modulus::regularized(const Modulus& inner) {
    auto impl = std::make_shared<detail::RegularizedModulus>(inner);
    return Modulus(std::move(impl), std::make_shared<const Modulus>(inner));
}

inline const Modulus& Modulus::inner() const {
    if (!inner_) throw std::logic_error("Modulus::inner: not a regularized modulus");
    return *inner_;
}

inline double Modulus::second_derivative(double r) const {
    if (!(r > 0.0)) throw std::domain_error("modulus: r must be > 0");
    if (auto* reg = dynamic_cast<const detail::RegularizedModulus*>(impl_.get()))
        return reg->second(r);
    throw std::logic_error("second_derivative: only the regularized family exposes one");
}

inline Modulus regularize(const Modulus& m) { return Modulus::regularized(m); }

}  // namespace fraclab
