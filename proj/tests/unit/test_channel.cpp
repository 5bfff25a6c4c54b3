#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "urllc/channel.hpp"
#include "urllc/random.hpp"

using namespace urllc;
using namespace urllc::channel;

TEST_CASE("path loss at 10 m for A1 LOS at 3 GHz") {
    PathLossParams p;
    CHECK(path_loss_db(p, 10.0) == doctest::Approx(61.063).epsilon(1e-4));
    CHECK(std::abs(path_loss_db(p, 10.0) - 61.06) < 0.01);
}

TEST_CASE("path loss clamps below the minimum distance") {
    PathLossParams p;
    CHECK(path_loss_db(p, p.min_distance_m) == path_loss_db(p, p.min_distance_m / 2));
    CHECK(path_loss_db(p, 0.0) == path_loss_db(p, p.min_distance_m));
}

TEST_CASE("one decade of distance adds the slope coefficient") {
    PathLossParams p;
    CHECK(path_loss_db(p, 100.0) - path_loss_db(p, 10.0) == doctest::Approx(18.7).epsilon(1e-12));
}

TEST_CASE("path loss is monotone in distance") {
    PathLossParams p;
    double prev = path_loss_db(p, p.min_distance_m);
    for (double d = p.min_distance_m; d < 80.0; d += 0.37) {
        const double v = path_loss_db(p, d);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("path loss parameter validation") {
    PathLossParams p;
    p.carrier_freq_ghz = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.min_distance_m = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    ShadowingParams s{-1.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    NoiseModel n;
    n.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(n.validate(), std::invalid_argument);
}

TEST_CASE("zero shadowing std always yields zero") {
    auto rng = make_stream(1, "t");
    for (int i = 0; i < 100; ++i) CHECK(draw_shadowing_db({0.0}, rng) == 0.0);
}

TEST_CASE("shadowing moments at 3 dB") {
    auto rng = make_stream(42, "shadow");
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = draw_shadowing_db({3.0}, rng);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(mean > -0.03);
    CHECK(mean < 0.03);
    CHECK(sd > 2.94);
    CHECK(sd < 3.06);
}

TEST_CASE("identical seeds give identical shadowing sequences") {
    auto a = make_stream(9, "shadow", {3, 4});
    auto b = make_stream(9, "shadow", {3, 4});
    for (int i = 0; i < 50; ++i) CHECK(draw_shadowing_db({3.0}, a) == draw_shadowing_db({3.0}, b));
}

TEST_CASE("different labels or indices give different streams") {
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a", {1}) != derive_seed(1, "a", {2}));
    CHECK(derive_seed(1, "a", {1, 2}) != derive_seed(1, "a", {2, 1}));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("Rayleigh power is unit-mean exponential") {
    auto rng = make_stream(5, "rayleigh");
    const int n = 100000;
    std::vector<double> xs(n);
    double sum = 0.0;
    int above_median = 0;
    for (double& x : xs) {
        x = draw_rayleigh_power(rng);
        CHECK_MESSAGE(x > 0.0, "non-positive fading sample");
        sum += x;
        if (x > std::log(2.0)) ++above_median;
    }
    CHECK(sum / n > 0.98);
    CHECK(sum / n < 1.02);
    CHECK(std::abs(above_median / double(n) - 0.5) < 0.01);

    // Kolmogorov-Smirnov statistic against 1 - exp(-x).
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = 1.0 - std::exp(-xs[i]);
        ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("noise power") {
    CHECK(noise_power_dbm({-169.0, 5.0, 1e6}) == doctest::Approx(-104.0).epsilon(1e-12));
    CHECK(noise_power_dbm({-169.0, 0.0, 1.0}) == doctest::Approx(-169.0).epsilon(1e-12));
    CHECK(noise_power_dbm({-169.0, 5.0, 2e6}) - noise_power_dbm({-169.0, 5.0, 1e6}) ==
          doctest::Approx(3.0103).epsilon(1e-4));
}

TEST_CASE("composite link gain") {
    const auto g = composite_link_gain(60.0, 0.0, {1.0, 1.0});
    CHECK(g.large_scale_linear == doctest::Approx(1e-6).epsilon(1e-15));
    CHECK(g.small_scale_linear.size() == 2);
    CHECK(composite_link_gain(60.0, -10.0, {1.0}).large_scale_linear == doctest::Approx(1e-5).epsilon(1e-15));

    // 30 dBm through -104 dB -> -74 dBm.
    const auto h = composite_link_gain(104.0, 0.0, {1.0});
    CHECK(watts_to_dbm(dbm_to_watts(30.0) * h.composite(0)) == doctest::Approx(-74.0).epsilon(1e-12));
}

TEST_CASE("composite gain in dB equals -(pl + shadow) + 10 log10 g") {
    auto rng = make_stream(3, "cg");
    for (int i = 0; i < 200; ++i) {
        const double pl = 40.0 + 60.0 * uniform01(rng);
        const double sh = draw_shadowing_db({3.0}, rng);
        std::vector<double> fad{draw_rayleigh_power(rng), draw_rayleigh_power(rng)};
        const auto g = composite_link_gain(pl, sh, fad);
        for (std::size_t m = 0; m < 2; ++m) {
            const double expected = -(pl + sh) + 10.0 * std::log10(fad[m]);
            CHECK(std::abs(g.composite_db(m) - expected) <= 1e-9 * std::abs(expected));
        }
    }
}

TEST_CASE("composite gain rejects bad inputs") {
    CHECK_THROWS_AS(composite_link_gain(std::nan(""), 0.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(composite_link_gain(60.0, INFINITY, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(composite_link_gain(60.0, 0.0, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(composite_link_gain(60.0, 0.0, {-1.0}), std::invalid_argument);
}

TEST_CASE("uniform helpers stay in range") {
    auto rng = make_stream(11, "u");
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const double u = uniform01(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = uniform_open01(rng);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        ++counts[uniform_index(rng, 7)];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}
