#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/modulus.hpp"
#include "fraclab/rng.hpp"
#include "fraclab/stablelaw.hpp"

using namespace fraclab;

namespace {

// dense-grid brute-force distance to the wall x_d = sign*Gamma(t), refined
// around the best coarse cell
double brute_graph_dist(const Modulus& ell, int sign, const Point<2>& x,
                        int coarse = 400000) {
    const double W = 2.0 * (std::fabs(x[1]) + gamma_ell(ell, std::fabs(x[0])) + 1.0);
    auto d = [&](double t) {
        return std::hypot(x[0] - t, x[1] - sign * gamma_ell(ell, t));
    };
    double best = d(x[0]), best_t = x[0];
    const double lo = x[0] - W, hi = x[0] + W;
    for (int i = 0; i <= coarse; ++i) {
        const double t = lo + (hi - lo) * i / coarse;
        const double v = d(t);
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    const double cell = (hi - lo) / coarse;
    for (int i = 0; i <= 20000; ++i) {
        const double t = best_t - cell + 2.0 * cell * i / 20000.0;
        best = std::min(best, d(t));
    }
    return best;
}

}  // namespace

TEST_CASE("gamma_ell: zero for nonpositive arguments") {
    auto m = Modulus::power(1.0, 1.0);
    REQUIRE(gamma_ell(m, -3.0) == 0.0);
    REQUIRE(gamma_ell(m, 0.0) == 0.0);
    REQUIRE(gamma_ell(m, 0.5) == Catch::Approx(0.25));
}

TEST_CASE("gamma_ell derivative is Holder with constant C * ell") {
    auto m = Modulus::logpower(1.0);
    RngStream rng(11, 0);
    double C = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform() * 2.0 - 0.5;
        const double b = rng.uniform() * 2.0 - 0.5;
        const double gap = std::fabs(a - b);
        if (gap < 1e-12) continue;
        const double dd = std::fabs(gamma_ell_derivative(m, a) - gamma_ell_derivative(m, b));
        C = std::max(C, dd / m(gap));
    }
    INFO("measured gradient-Holder constant C = " << C);
    REQUIRE(std::isfinite(C));
    REQUIRE(C < 50.0);
}

TEST_CASE("halfspace distance is the height") {
    auto H = Domain<2>::halfspace();
    Point<2> x{3.0, 0.7};
    REQUIRE(H.contains(x));
    const auto b = H.distance(x);
    REQUIRE(b.estimate == Catch::Approx(0.7));
    REQUIRE(b.certified_lower <= b.estimate);
    REQUIRE(b.certified_lower == Catch::Approx(0.7).epsilon(1e-8));
    REQUIRE_THROWS_AS(H.distance(Point<2>{0.0, -0.1}), geometry_error);
}

TEST_CASE("graph with zero modulus reduces to the halfspace") {
    auto G = Domain<2>::graph(Modulus::zero(), +1);
    Point<2> x{-5.0, 1.3};
    REQUIRE(G.contains(x));
    REQUIRE(G.distance(x).estimate == Catch::Approx(1.3));
    REQUIRE(G.step_lower(x) == Catch::Approx(1.3));
}

TEST_CASE("graph distance vs dense brute-force oracle") {
    auto m = Modulus::power(1.0, 1.0);
    struct Case {
        int sign;
        Point<2> x;
    };
    std::vector<Case> cases = {{+1, {-1.0, 1.0}}, {+1, {0.5, 1.2}},  {+1, {2.0, 2.5}},
                               {-1, {-1.0, 1.0}}, {-1, {0.5, 0.01}}, {-1, {1.5, -1.0}}};
    for (const auto& c : cases) {
        auto G = Domain<2>::graph(m, c.sign);
        REQUIRE(G.contains(c.x));
        const auto b = G.distance(c.x);
        const double truth = brute_graph_dist(m, c.sign, c.x);
        INFO("sign " << c.sign << " x=(" << c.x[0] << "," << c.x[1] << ")");
        REQUIRE(b.estimate == Catch::Approx(truth).margin(1e-6));
        REQUIRE(b.certified_lower <= truth * (1.0 + 1e-9));
        REQUIRE(b.certified_lower >= truth * (1.0 - 1e-6));
        // the fast cone bound is a valid lower bound too
        REQUIRE(G.step_lower(c.x) <= truth * (1.0 + 1e-9));
        REQUIRE(G.step_lower(c.x) > 0.0);
    }
}

TEST_CASE("graph distance in d=3 drops the transverse coordinate") {
    auto m = Modulus::logpower(1.0);
    auto G2 = Domain<2>::graph(m, +1);
    auto G3 = Domain<3>::graph(m, +1);
    Point<2> x2{0.4, 0.9};
    Point<3> x3{0.4, 77.0, 0.9};
    REQUIRE(G3.contains(x3));
    REQUIRE(G3.distance(x3).estimate ==
            Catch::Approx(G2.distance(x2).estimate).epsilon(1e-12));
}

TEST_CASE("inner radius: ball center and collar closed forms") {
    auto B = Domain<2>::ball({0.0, 0.0}, 1.0);
    REQUIRE(B.inner_radius({0.0, 0.0}, 1.0) == Catch::Approx(1.0).epsilon(1e-8));
    auto C = Domain<2>::collar(Domain<2>::halfspace(), 1.0);
    REQUIRE(C.distance({0.0, 0.3}).estimate == Catch::Approx(0.3));
    REQUIRE(C.distance({0.0, 0.8}).estimate == Catch::Approx(0.2));
    REQUIRE_THROWS_AS(C.inner_radius({0.0, 0.3}, 1.5), config_error);
}

TEST_CASE("collar membership trichotomy") {
    auto base = Domain<2>::graph(Modulus::logpower(1.0), -1);
    auto C = Domain<2>::collar(base, 0.5);
    RngStream rng(5, 0);
    for (int i = 0; i < 2000; ++i) {
        Point<2> x{rng.uniform() * 8.0 - 4.0, rng.uniform() * 4.0 - 2.0};
        if (!base.contains(x)) {
            REQUIRE_FALSE(C.contains(x));
            continue;
        }
        const double delta = base.distance(x).estimate;
        if (std::fabs(delta - 0.5) < 1e-9) continue;  // hairline
        REQUIRE(C.contains(x) == (delta < 0.5));
    }
}

TEST_CASE("monotone inclusion D_ell subset halfspace subset D_{-ell}") {
    auto m = Modulus::logpower(1.0);
    auto Dp = Domain<2>::graph(m, +1);
    auto H = Domain<2>::halfspace();
    auto Dm = Domain<2>::graph(m, -1);
    RngStream rng(6, 0);
    for (int i = 0; i < 5000; ++i) {
        Point<2> x{rng.uniform() * 16.0 - 8.0, rng.uniform() * 16.0 - 8.0};
        if (Dp.contains(x)) REQUIRE(H.contains(x));
        if (H.contains(x)) REQUIRE(Dm.contains(x));
    }
}

TEST_CASE("upper halfspace cap is inside D_{-ell} cap") {
    auto Dm = Domain<2>::graph(Modulus::logpower(2.0), -1);
    RngStream rng(7, 0);
    for (int i = 0; i < 5000; ++i) {
        const double r = 8.0 * rng.uniform();
        const double t = 2.0 * kPi * rng.uniform();
        Point<2> x{r * std::cos(t), std::fabs(r * std::sin(t))};
        if (x[1] > 0.0 && norm(x) < 8.0) REQUIRE(Dm.contains(x));
    }
}

TEST_CASE("ball containment under rejection sampling (all kinds)") {
    auto m = regularize(Modulus::logpower(1.0));
    std::vector<Domain<2>> domains = {
        Domain<2>::halfspace(),
        Domain<2>::ball({0.5, 0.5}, 2.0),
        Domain<2>::graph(m, +1),
        Domain<2>::graph(m, -1),
        Domain<2>::collar(Domain<2>::graph(m, -1), 0.7),
        Domain<2>::intersect_ball(Domain<2>::graph(m, +1), {0.0, 0.0}, 3.0)};
    RngStream rng(8, 0);
    for (const auto& dom : domains) {
        int tested = 0;
        while (tested < 120) {
            Point<2> x{rng.uniform() * 6.0 - 3.0, rng.uniform() * 6.0 - 3.0};
            if (!dom.contains(x)) continue;
            ++tested;
            for (double gamma : {0.999, 1.0}) {
                const double r_step = dom.step_radius(x, gamma);
                const double r_scan = dom.inner_radius(x, gamma);
                for (double rr : {r_step, r_scan}) {
                    if (rr <= 0.0) continue;
                    for (int s = 0; s < 60; ++s) {
                        const double ang = 2.0 * kPi * rng.uniform();
                        Point<2> p{x[0] + rr * (1.0 - 1e-12) * std::cos(ang),
                                   x[1] + rr * (1.0 - 1e-12) * std::sin(ang)};
                        REQUIRE(dom.contains(p));
                    }
                }
            }
        }
    }
}

TEST_CASE("fat probe: the paper witnesses for the special domains") {
    auto m = Modulus::logpower(1.0);
    auto Dp = Domain<2>::graph(m, +1);
    auto cert = Dp.fat_probe({0.0, 0.0}, 1.0);
    REQUIRE(cert.witness[0] == Catch::Approx(-0.25));
    REQUIRE(cert.witness[1] == Catch::Approx(0.25));
    REQUIRE(cert.witness_radius == Catch::Approx(0.25));
    REQUIRE(cert.delta_ratio > 0.0);

    auto Dm = Domain<2>::graph(m, -1);
    auto cert2 = Dm.fat_probe({0.0, 0.0}, 1.0);
    REQUIRE(cert2.witness[0] == Catch::Approx(0.25));
    REQUIRE(cert2.witness[1] == Catch::Approx(0.25));

    auto H = Domain<2>::halfspace();
    auto cert3 = H.fat_probe({0.0, 0.0}, 1.0);
    REQUIRE(cert3.witness[1] == Catch::Approx(0.25));
    REQUIRE(cert3.delta_ratio == Catch::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("fat probe holds across scales on D_{-ell}") {
    auto Dm = Domain<2>::graph(regularize(Modulus::logpower(1.0)), -1);
    for (double R : {0.125, 0.5, 1.0, 4.0}) {
        auto cert = Dm.fat_probe({0.3, -gamma_ell(Dm.ell(), 0.3) + 1e-12}, R);
        REQUIRE(cert.witness_radius == Catch::Approx(0.25 * R));
        REQUIRE(cert.samples_checked > 0);
    }
}
