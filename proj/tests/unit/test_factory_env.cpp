#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "urllc/factory_env.hpp"
#include "urllc/oracles.hpp"

using namespace urllc;

namespace {

// Snapshot with every gain set to g (linear) on every sub-band.
ChannelSnapshot flat_snapshot(int k, int n, int m, double g) {
    ChannelSnapshot s{k, n, m, {}};
    for (int i = 0; i < k * n; ++i) s.ap_leader.push_back({g, std::vector<double>(m, 1.0)});
    return s;
}

std::vector<LeaderAction> all_off(int n) { return std::vector<LeaderAction>(n, LeaderAction{{0, -1}, 0, -100.0}); }

}  // namespace

TEST_CASE("timing yields 4 Phase-I and 2 Phase-II slots of 1/6 ms") {
    TimingConfig t;
    CHECK(t.slot_s() == doctest::Approx(1e-3 / 6));
    CHECK(t.phase1_slots() == 4);
    CHECK(t.phase2_slots() == 2);
    CHECK(std::abs(t.phase1_slots() * t.slot_s() - t.phase1_s) <= t.slot_s());
    CHECK(std::abs(t.phase2_slots() * t.slot_s() - t.phase2_s) <= t.slot_s());
}

TEST_CASE("configuration enforces the spectrum-sharing regime") {
    EnvConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.resolved_subbands() == 2);
    c.num_clusters = 5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.num_clusters = 4;
    c.num_subbands = 3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.allow_subband_override = true;
    CHECK_NOTHROW(c.validate());
    EnvConfig outside;
    outside.ap_positions.push_back({50.0, 5.0});
    CHECK_THROWS_AS(outside.validate(), std::invalid_argument);
}

TEST_CASE("reset sets the cluster payload and keeps members close") {
    EnvConfig c;
    FactoryEnv env(c, 1);
    env.reset_episode(0, 100.0);
    CHECK(env.initial_bits() == 4000.0);
    for (int n = 0; n < 4; ++n) CHECK(env.remaining_bits(n) == 4000.0);
    CHECK(env.slot() == 0);
    CHECK_FALSE(env.done());
    for (const auto& cl : env.clusters()) {
        CHECK(cl.members.size() == 4);
        for (const auto& m : cl.members) CHECK(distance(cl.leader, m) <= 3.0 + 1e-12);
    }
}

TEST_CASE("same seed and episode give identical realizations") {
    EnvConfig c;
    FactoryEnv a(c, 77);
    FactoryEnv b(c, 77);
    for (int e = 0; e < 3; ++e) {
        a.reset_episode(e, 60.0);
        b.reset_episode(e, 60.0);
    }
    for (int n = 0; n < 4; ++n) {
        CHECK(a.clusters()[n].leader.x == b.clusters()[n].leader.x);
        CHECK(a.clusters()[n].leader.y == b.clusters()[n].leader.y);
        for (int k = 0; k < 4; ++k) {
            CHECK(a.gains().gain(k, n, 0) == b.gains().gain(k, n, 0));
            CHECK(a.gains().gain(k, n, 1) == b.gains().gain(k, n, 1));
        }
    }
    FactoryEnv other(c, 78);
    other.reset_episode(0, 60.0);
    FactoryEnv first(c, 77);
    first.reset_episode(0, 60.0);
    CHECK(other.gains().gain(0, 0, 0) != first.gains().gain(0, 0, 0));
}

TEST_CASE("mobility keeps every cluster on the floor with members within d") {
    EnvConfig c;
    c.speed_mps = 4000.0;  // 4 m per 1 ms episode exercises the boundary
    FactoryEnv env(c, 3);
    for (int e = 0; e < 400; ++e) {
        env.reset_episode(e, 20.0);
        for (const auto& cl : env.clusters()) {
            CHECK(cl.leader.x >= 0.0);
            CHECK(cl.leader.x <= 40.0);
            CHECK(cl.leader.y >= 0.0);
            CHECK(cl.leader.y <= 40.0);
            for (const auto& m : cl.members) {
                CHECK(distance(cl.leader, m) <= 3.0 + 1e-12);
                CHECK(m.x >= 0.0);
                CHECK(m.x <= 40.0);
                CHECK(m.y >= 0.0);
                CHECK(m.y <= 40.0);
            }
        }
    }
}

TEST_CASE("single uninterfered leader at 30 dBm through -104 dB sees 30 dB SINR") {
    const auto snap = flat_snapshot(4, 1, 2, std::pow(10.0, -10.4));
    const std::vector<LeaderAction> a{{{0, -1}, 0, 30.0}};
    const double noise = channel::dbm_to_watts(-104.0);
    const auto s = phase1_sinr(a, snap, noise);
    CHECK(s[0] == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("the -100 dBm level acts as off") {
    const auto snap = flat_snapshot(4, 1, 2, 1e-6);
    const std::vector<LeaderAction> a{{{0, -1}, 0, -100.0}};
    const auto s = phase1_sinr(a, snap, channel::dbm_to_watts(-104.0));
    CHECK(s[0] <= std::pow(10.0, -16.0 + 10.4));
    CHECK(shannon_rate_bps(1e6, s[0]) < 10.0);  // bits/s
}

TEST_CASE("symmetric geometry gives equal SINRs") {
    const auto snap = flat_snapshot(2, 2, 1, 1e-7);
    const std::vector<LeaderAction> a{{{0, -1}, 0, 25.0}, {{1, -1}, 0, 25.0}};
    const auto s = phase1_sinr(a, snap, channel::dbm_to_watts(-104.0));
    CHECK(s[0] == s[1]);
}

TEST_CASE("SINR matches the brute-force oracle on random instances") {
    auto rng = make_stream(1, "test/sinr");
    const std::vector<double> levels{-100, 20, 25, 30};
    for (int t = 0; t < 1000; ++t) {
        const int n = 1 + static_cast<int>(uniform_index(rng, 3));
        const auto snap = oracle::random_snapshot(4, n, 2, rng);
        std::vector<LeaderAction> actions;
        for (int j = 0; j < n; ++j) {
            LeaderAction a;
            a.aps.first = static_cast<int>(uniform_index(rng, 4));
            if (uniform01(rng) < 0.5) {
                do a.aps.second = static_cast<int>(uniform_index(rng, 4));
                while (a.aps.second == a.aps.first);
            }
            a.subband = static_cast<int>(uniform_index(rng, 2));
            a.power_dbm = levels[uniform_index(rng, 4)];
            actions.push_back(a);
        }
        const double noise = channel::dbm_to_watts(-104.0);
        const auto fast = phase1_sinr(actions, snap, noise);
        const auto slow = oracle::brute_force_sinr(actions, snap, noise);
        for (int j = 0; j < n; ++j) CHECK(std::abs(fast[j] - slow[j]) <= 1e-9 * std::abs(slow[j]));
    }
}

TEST_CASE("adding an interferer never raises SINR; no interferers gives SNR") {
    auto rng = make_stream(2, "test/mono");
    const double noise = channel::dbm_to_watts(-104.0);
    for (int t = 0; t < 200; ++t) {
        const auto snap = oracle::random_snapshot(4, 3, 2, rng);
        std::vector<LeaderAction> a{{{0, -1}, 0, 30.0}, {{1, 2}, 0, 25.0}, {{3, -1}, 1, 20.0}};
        auto before = phase1_sinr(a, snap, noise);
        a[2].subband = 0;
        auto after = phase1_sinr(a, snap, noise);
        CHECK(after[0] <= before[0]);
        CHECK(after[1] <= before[1]);

        std::vector<LeaderAction> alone{{{0, -1}, 0, 30.0}};
        ChannelSnapshot one = oracle::random_snapshot(4, 1, 2, rng);
        const double snr = channel::dbm_to_watts(30.0) * one.gain(0, 0, 0) / noise;
        CHECK(phase1_sinr(alone, one, noise)[0] == doctest::Approx(snr).epsilon(1e-12));
    }
}

TEST_CASE("dual connectivity dominates either single AP at fixed interference") {
    auto rng = make_stream(3, "test/dual");
    const double noise = channel::dbm_to_watts(-104.0);
    for (int t = 0; t < 200; ++t) {
        const auto snap = oracle::random_snapshot(4, 2, 2, rng);
        const LeaderAction other{{3, -1}, 0, 30.0};
        const std::vector<LeaderAction> single{{{0, -1}, 0, 25.0}, other};
        const std::vector<LeaderAction> dual{{{0, 1}, 0, 25.0}, other};
        CHECK(phase1_sinr(dual, snap, noise)[0] >= phase1_sinr(single, snap, noise)[0]);
    }
}

TEST_CASE("both serving links of a dual-connected leader interfere") {
    auto snap = flat_snapshot(3, 2, 1, 1e-8);
    const double noise = channel::dbm_to_watts(-104.0);
    const std::vector<LeaderAction> a{{{0, -1}, 0, 30.0}, {{1, 2}, 0, 30.0}};
    const auto ipn = interference_plus_noise(a, snap, noise);
    CHECK(ipn[0] == doctest::Approx(noise + 2 * 1.0 * 1e-8).epsilon(1e-12));
    const auto s = phase1_sinr(a, snap, noise);
    CHECK(s[0] == doctest::Approx(1e-8 / ipn[0]).epsilon(1e-12));
}

TEST_CASE("Shannon rate") {
    CHECK(shannon_rate_bps(1e6, 1.0) == doctest::Approx(1e6));
    // 6 Mbps for four 1/6 ms slots is exactly the 4000-bit cluster payload.
    CHECK(6e6 * 4 * (1e-3 / 6) == doctest::Approx(4000.0));
}

TEST_CASE("phase1_step ledger arithmetic and payload conservation") {
    EnvConfig c;
    FactoryEnv env(c, 5);
    env.reset_episode(0, 100.0);
    const std::vector<LeaderAction> a{
        {{0, -1}, 0, 30.0}, {{1, 3}, 1, 25.0}, {{2, -1}, 0, 20.0}, {{3, -1}, 1, 30.0}};
    std::vector<double> delivered(4, 0.0);
    while (!env.done()) {
        std::vector<double> before(4);
        for (int n = 0; n < 4; ++n) before[n] = env.remaining_bits(n);
        const auto out = env.phase1_step(a);
        for (int n = 0; n < 4; ++n) {
            CHECK(out.rate_bps[n] == shannon_rate_bps(1e6, out.sinr[n]));
            CHECK(out.delivered_bits[n] == doctest::Approx(env.slot_seconds() * out.rate_bps[n]).epsilon(1e-15));
            CHECK(out.remaining_before[n] == before[n]);
            CHECK(out.remaining_after[n] == before[n] - out.delivered_bits[n]);
            CHECK(env.remaining_bits(n) <= before[n]);
            delivered[n] += out.delivered_bits[n];
        }
    }
    CHECK(env.slot() == 4);
    for (int n = 0; n < 4; ++n) {
        CHECK(delivered[n] == doctest::Approx(env.initial_bits() - env.remaining_bits(n)).epsilon(1e-12));
        CHECK(env.delivered_total(n) == doctest::Approx(delivered[n]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(env.phase1_step(a), std::logic_error);
}

TEST_CASE("phase1_step validates actions") {
    FactoryEnv env(EnvConfig{}, 5);
    env.reset_episode(0, 100.0);
    CHECK_THROWS_AS(env.phase1_step(all_off(3)), std::invalid_argument);
    auto a = all_off(4);
    a[0].subband = 2;
    CHECK_THROWS_AS(env.phase1_step(a), std::invalid_argument);
    a = all_off(4);
    a[1].aps = {4, -1};
    CHECK_THROWS_AS(env.phase1_step(a), std::invalid_argument);
    a = all_off(4);
    a[1].aps = {2, 2};
    CHECK_THROWS_AS(env.phase1_step(a), std::invalid_argument);
    a = all_off(4);
    a[2].power_dbm = 23.0;
    CHECK_THROWS_AS(env.phase1_step(a), std::invalid_argument);
}

TEST_CASE("first observation sees noise only on every sub-band") {
    FactoryEnv env(EnvConfig{}, 5);
    env.reset_episode(0, 100.0);
    for (int n = 0; n < 4; ++n) {
        for (double w : env.last_interference(n)) CHECK(w == env.noise_watts());
    }
    const std::vector<LeaderAction> a{
        {{0, -1}, 0, 30.0}, {{1, -1}, 0, 30.0}, {{2, -1}, 1, 30.0}, {{3, -1}, 1, 30.0}};
    const auto out = env.phase1_step(a);
    for (int n = 0; n < 4; ++n) {
        for (int m = 0; m < 2; ++m) CHECK(env.last_interference(n)[m] == out.ipn(n, m));
    }
}

TEST_CASE("Phase-II schedule") {
    const auto s = phase2_schedule(4, 2, 2);
    REQUIRE(s.size() == 4);
    CHECK(s[0] == Phase2Assignment{0, 0});
    CHECK(s[1] == Phase2Assignment{0, 1});
    CHECK(s[2] == Phase2Assignment{1, 0});
    CHECK(s[3] == Phase2Assignment{1, 1});
    const auto one = phase2_schedule(1, 1, 2);
    CHECK(one[0] == Phase2Assignment{0, 0});
    for (int n : {2, 4, 6, 8}) {
        std::set<std::pair<int, int>> used;
        for (const auto& a : phase2_schedule(n, n / 2, 2)) {
            CHECK(a.slot < 2);
            CHECK(a.subband < n / 2);
            CHECK(used.insert({a.slot, a.subband}).second);
        }
    }
    CHECK_THROWS_AS(phase2_schedule(5, 2, 2), std::invalid_argument);
}

TEST_CASE("member at -80 dB with 20 dBm fails the 4000-bit payload") {
    const double sinr = channel::dbm_to_watts(20.0) * 1e-8 / channel::dbm_to_watts(-104.0);
    CHECK(sinr == doctest::Approx(std::pow(10.0, 4.4)).epsilon(1e-12));
    const double rate = shannon_rate_bps(1e6, sinr);
    CHECK(rate == doctest::Approx(14.62e6).epsilon(1e-3));
    CHECK(rate * (1e-3 / 6) == doctest::Approx(2437).epsilon(1e-3));
    CHECK(rate * (1e-3 / 6) < 4000.0);
}

TEST_CASE("Phase II is interference-free and requires leader success") {
    EnvConfig c;
    FactoryEnv env(c, 9);
    env.reset_episode(0, 20.0);
    CHECK_THROWS_AS(env.run_phase2(), std::logic_error);
    // Leader 0 transmits alone on sub-band 0, leader 1 stays off; 2 and 3 share sub-band 1.
    const std::vector<LeaderAction> a{
        {{env.nearest_ap(0), -1}, 0, 30.0}, {{0, -1}, 0, -100.0}, {{0, -1}, 1, 30.0}, {{1, -1}, 1, 30.0}};
    while (!env.done()) env.phase1_step(a);
    const auto p2 = env.run_phase2();
    for (double w : p2.interference_w) CHECK(w == 0.0);
    const auto out = env.delivery_outcome();
    CHECK_FALSE(out.leader_success[1]);
    for (int m = 0; m < 4; ++m) CHECK_FALSE(out.member_success[1 * 4 + m]);
    for (std::size_t i = 0; i < p2.success.size(); ++i) {
        const int cluster = static_cast<int>(i / 4);
        const double needed = env.initial_bits();
        const bool expected = out.leader_success[cluster] && env.slot_seconds() * p2.rate_bps[i] >= needed;
        CHECK(p2.success[i] == expected);
        CHECK(p2.sinr[i] == doctest::Approx(channel::dbm_to_watts(20.0) *
                                            env.d2d_gains()[i].composite(phase2_schedule(4, 2, 2)[cluster].subband) /
                                            env.noise_watts())
                                .epsilon(1e-12));
    }
}

TEST_CASE("delivery fraction counting") {
    const std::vector<bool> all(4, true);
    CHECK(delivery_fraction(all, std::vector<bool>(16, true), false) == 1.0);
    std::vector<bool> leaders{true, false, true, true};
    std::vector<bool> members(16, true);
    for (int m = 4; m < 8; ++m) members[m] = false;
    CHECK(delivery_fraction(leaders, members, false) == doctest::Approx(0.75));
    CHECK(delivery_fraction(leaders, members, true) == doctest::Approx(0.75));
}

TEST_CASE("zero payload delivers everyone") {
    FactoryEnv env(EnvConfig{}, 4);
    env.reset_episode(0, 0.0);
    while (!env.done()) env.phase1_step(all_off(4));
    env.run_phase2();
    CHECK(env.delivery_outcome().probability == 1.0);
}

TEST_CASE("nearest AP uses Euclidean distance, lowest index on ties") {
    EnvConfig c;
    c.num_clusters = 2;
    FactoryEnv env(c, 1);
    env.reset_episode(0, 20.0);
    for (int n = 0; n < 2; ++n) {
        const Point p = env.clusters()[n].leader;
        int best = 0;
        for (int k = 1; k < 4; ++k)
            if (distance(p, c.ap_positions[k]) < distance(p, c.ap_positions[best])) best = k;
        CHECK(env.nearest_ap(n) == best);
    }
}

TEST_CASE("nearest AP on the default grid") {
    const EnvConfig c;
    CHECK(nearest_ap(c.ap_positions, {10.0, 10.1}) == 0);
    CHECK(nearest_ap(c.ap_positions, {20.0, 20.0}) == 0);  // four-way tie
    CHECK(nearest_ap(c.ap_positions, {31.0, 29.0}) == 3);
    CHECK(nearest_ap(c.ap_positions, {30.0, 20.0}) == 2);  // tie between 2 and 3
}

TEST_CASE("members-only switch changes the metric denominator") {
    EnvConfig c;
    c.members_only_metric = true;
    FactoryEnv env(c, 4);
    env.reset_episode(0, 0.0);
    while (!env.done()) env.phase1_step(all_off(4));
    env.run_phase2();
    CHECK(env.delivery_outcome().probability == 1.0);
}
