#pragma once

// Monotone cubic interpolation (Fritsch-Carlson). Shape-preserving: monotone
// data stays monotone between nodes, which the modulus caches rely on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fraclab {

class MonotoneCubic {
  public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("MonotoneCubic: need >= 2 matching nodes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1]))
                throw std::invalid_argument("MonotoneCubic: x must be strictly increasing");
        d_.assign(n, 0.0);
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (delta[i - 1] * delta[i] <= 0.0) {
                    d_[i] = 0.0;
                } else {
                    const double w1 = 2.0 * h[i] + h[i - 1];
                    const double w2 = h[i] + 2.0 * h[i - 1];
                    d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d_[0] = edge_derivative(h[0], h[1], delta[0], delta[1]);
            d_[n - 1] = edge_derivative(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
    }

    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

    double operator()(double x) const {
        const auto [i, t, h] = locate(x);
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
    }

    double derivative(double x) const {
        const auto [i, t, h] = locate(x);
        const double t2 = t * t;
        const double g00 = (6 * t2 - 6 * t) / h, g10 = 3 * t2 - 4 * t + 1;
        const double g01 = (-6 * t2 + 6 * t) / h, g11 = 3 * t2 - 2 * t;
        return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
    }

  private:
    struct Loc {
        std::size_t i;
        double t, h;
    };

    Loc locate(double x) const {
        // clamp to the node range; out-of-range policy is the caller's business
        std::size_t i;
        if (x <= x_.front()) {
            i = 0;
        } else if (x >= x_.back()) {
            i = x_.size() - 2;
        } else {
            i = static_cast<std::size_t>(
                    std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) -
                1;
        }
        const double h = x_[i + 1] - x_[i];
        return {i, (x - x_[i]) / h, h};
    }

    static double edge_derivative(double h0, double h1, double del0, double del1) {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0) return 0.0;
        if (del0 * del1 < 0.0 && std::fabs(d) > 3.0 * std::fabs(del0))
            return 3.0 * del0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

}  // namespace fraclab
