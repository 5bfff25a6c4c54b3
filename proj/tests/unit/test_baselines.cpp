#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "urllc/baselines.hpp"
#include "urllc/oracles.hpp"

using namespace urllc;
using namespace urllc::baselines;

namespace {

SumRateProblem problem_for(const ChannelSnapshot& snap, std::vector<int> serving, int subbands) {
    SumRateProblem pb;
    pb.gains = &snap;
    pb.serving_ap = std::move(serving);
    pb.power_levels_dbm = {-100, 20, 25, 30};
    pb.num_subbands = subbands;
    pb.noise_w = channel::dbm_to_watts(-104.0);
    pb.bandwidth_hz = 1e6;
    return pb;
}

}  // namespace

TEST_CASE("policy names and parsing") {
    for (auto k : {PolicyKind::random_nearest, PolicyKind::centralized_exhaustive, PolicyKind::greedy_single,
                   PolicyKind::greedy_multi, PolicyKind::marl_single, PolicyKind::marl_multi}) {
        CHECK(parse_policy(cli_name(k)) == k);
        CHECK(parse_policy(policy_name(k)) == k);
    }
    CHECK_FALSE(parse_policy("nope").has_value());
    CHECK(is_learned(PolicyKind::marl_multi));
    CHECK_FALSE(is_learned(PolicyKind::greedy_multi));
    CHECK_THROWS_AS(make_baseline(PolicyKind::marl_single), std::invalid_argument);
    CHECK(make_baseline(PolicyKind::greedy_multi)->name() == "greedy_multi");
}

TEST_CASE("random_nearest uses the nearest AP and uniform sub-bands") {
    FactoryEnv env(EnvConfig{}, 1);
    env.reset_episode(0, 60.0);
    auto rng = make_stream(1, "rn");
    std::vector<int> sub(2, 0);
    std::vector<int> pw(4, 0);
    const int draws = 100000 / 4;
    for (int i = 0; i < draws; ++i) {
        const auto a = random_nearest(env, rng);
        for (int n = 0; n < 4; ++n) {
            CHECK(a[n].aps.second == -1);
            CHECK(a[n].aps.first == env.nearest_ap(n));
            ++sub[a[n].subband];
            const auto& lv = env.config().power_levels_dbm;
            ++pw[std::find(lv.begin(), lv.end(), a[n].power_dbm) - lv.begin()];
        }
    }
    for (int s : sub) CHECK(std::abs(s / 1e5 - 0.5) < 0.01);
    for (int p : pw) CHECK(std::abs(p / 1e5 - 0.25) < 0.01);
}

TEST_CASE("greedy_single picks the best link at max power") {
    FactoryEnv env(EnvConfig{}, 2);
    for (int e = 0; e < 20; ++e) {
        env.reset_episode(e, 60.0);
        const auto a = greedy_single(env);
        for (int n = 0; n < 4; ++n) {
            CHECK(a[n].power_dbm == 30.0);
            CHECK(a[n].aps.second == -1);
            const double chosen = env.gains().gain(a[n].aps.first, n, a[n].subband);
            for (int k = 0; k < 4; ++k)
                for (int m = 0; m < 2; ++m) CHECK(env.gains().gain(k, n, m) <= chosen);
        }
    }
}

TEST_CASE("greedy_single on one AP and one sub-band is random_nearest at max power") {
    EnvConfig c;
    c.ap_positions = {{20, 20}};
    c.num_clusters = 2;
    c.num_subbands = 1;
    FactoryEnv env(c, 3);
    env.reset_episode(0, 20.0);
    auto rng = make_stream(1, "x");
    const auto g = greedy_single(env);
    const auto r = random_nearest(env, rng);
    for (int n = 0; n < 2; ++n) {
        CHECK(g[n].aps == r[n].aps);
        CHECK(g[n].subband == r[n].subband);
    }
}

TEST_CASE("greedy_multi picks the top pair on the best sub-band") {
    FactoryEnv env(EnvConfig{}, 4);
    for (int e = 0; e < 20; ++e) {
        env.reset_episode(e, 60.0);
        const auto a = greedy_multi(env);
        for (int n = 0; n < 4; ++n) {
            CHECK(a[n].aps.size() == 2);
            CHECK(a[n].power_dbm == 30.0);
            const double chosen =
                env.gains().gain(a[n].aps.first, n, a[n].subband) + env.gains().gain(a[n].aps.second, n, a[n].subband);
            for (int m = 0; m < 2; ++m)
                for (int i = 0; i < 4; ++i)
                    for (int j = i + 1; j < 4; ++j)
                        CHECK(env.gains().gain(i, n, m) + env.gains().gain(j, n, m) <= chosen);
        }
    }
}

TEST_CASE("greedy policies depend only on the leader's own gains") {
    FactoryEnv env(EnvConfig{}, 5);
    env.reset_episode(0, 60.0);
    const auto g1 = greedy_single(env);
    const auto g2 = greedy_multi(env);
    // Each leader's choice must equal the choice made from its gains alone.
    for (int n = 0; n < 4; ++n) {
        double best = -1.0;
        LeaderAction expected{};
        for (int k = 0; k < 4; ++k)
            for (int m = 0; m < 2; ++m)
                if (env.gains().gain(k, n, m) > best) {
                    best = env.gains().gain(k, n, m);
                    expected = {{k, -1}, m, 30.0};
                }
        CHECK(g1[n] == expected);
        CHECK(g2[n].aps.size() == 2);
    }
}

TEST_CASE("centralized enumeration matches the independent brute force exactly") {
    auto rng = make_stream(8, "test/central");
    for (int t = 0; t < 100; ++t) {
        const auto snap = oracle::random_snapshot(4, 4, 2, rng);
        std::vector<int> serving(4);
        for (int& s : serving) s = static_cast<int>(uniform_index(rng, 4));
        const auto pb = problem_for(snap, serving, 2);
        const auto fast = centralized_search(pb, rng);
        CHECK(fast.exhaustive);
        const auto slow = oracle::brute_force_max_sum_rate(pb);
        CHECK(fast.choices == slow.choices);
        CHECK(oracle::sum_rate(pb, fast.choices) == slow.sum_rate_bps);
    }
}

TEST_CASE("single leader picks its best sub-band at max power") {
    auto rng = make_stream(9, "test/one");
    for (int t = 0; t < 20; ++t) {
        const auto snap = oracle::random_snapshot(4, 1, 2, rng);
        const auto pb = problem_for(snap, {2}, 2);
        const auto res = centralized_search(pb, rng);
        const int best_m = snap.gain(2, 0, 0) >= snap.gain(2, 0, 1) ? 0 : 1;
        CHECK(res.actions[0].subband == best_m);
        CHECK(res.actions[0].power_dbm == 30.0);
        CHECK(res.actions[0].aps == ApSubset{2, -1});
    }
}

TEST_CASE("large instances fall back to a best-response fixed point") {
    auto rng = make_stream(10, "test/br");
    const auto snap = oracle::random_snapshot(4, 8, 4, rng);
    std::vector<int> serving(8);
    for (int& s : serving) s = static_cast<int>(uniform_index(rng, 4));
    const auto pb = problem_for(snap, serving, 4);
    const auto res = centralized_search(pb, rng);
    CHECK_FALSE(res.exhaustive);
    CHECK(res.sweeps <= 50);
    if (res.sweeps < 50) {
        const double value = profile_sum_rate(pb, res.choices);
        for (int n = 0; n < 8; ++n) {
            auto alt = res.choices;
            for (int c = 0; c < 16; ++c) {
                alt[n] = c;
                CHECK(profile_sum_rate(pb, alt) <= value * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("centralized policy pins leaders to their nearest AP") {
    FactoryEnv env(EnvConfig{}, 6);
    env.reset_episode(0, 60.0);
    CentralizedPolicy p;
    auto rng = make_stream(1, "c");
    const auto a = p.act(env, rng);
    for (int n = 0; n < 4; ++n) CHECK(a[n].aps == ApSubset{env.nearest_ap(n), -1});
}

TEST_CASE("policies are reproducible under fixed seeds") {
    FactoryEnv env(EnvConfig{}, 7);
    env.reset_episode(0, 60.0);
    for (auto kind : {PolicyKind::random_nearest, PolicyKind::centralized_exhaustive, PolicyKind::greedy_single,
                      PolicyKind::greedy_multi}) {
        auto p = make_baseline(kind);
        auto r1 = make_stream(5, "p");
        auto r2 = make_stream(5, "p");
        CHECK(p->act(env, r1) == p->act(env, r2));
    }
}
