#include <doctest.h>

#include <algorithm>
#include <string>

#include "urllc/config.hpp"

using namespace urllc;

TEST_CASE("defaults reproduce the simulation table") {
    const ExperimentConfig c;
    CHECK(c.env.path_loss.carrier_freq_ghz == 3.0);
    CHECK(c.env.noise.bandwidth_hz == 1e6);
    CHECK(c.env.floor_width_m == 40.0);
    CHECK(c.env.floor_height_m == 40.0);
    CHECK(c.env.num_clusters == 4);
    CHECK(c.cluster_sweep == std::vector<int>{4, 6, 8});
    CHECK(c.env.members_per_cluster == 4);
    CHECK(c.env.speed_mps == 1.0);
    CHECK(c.env.power_levels_dbm == std::vector<double>{-100, 20, 25, 30});
    CHECK(c.env.noise.noise_figure_db == 5.0);
    CHECK(c.env.noise.psd_dbm_per_hz == -169.0);
    CHECK(c.env.timing.frame_s == 1e-3);
    CHECK(c.env.timing.phase1_s == 0.667e-3);
    CHECK(c.env.timing.phase2_s == 0.333e-3);
    CHECK(c.payload_bytes.front() == 20.0);
    CHECK(c.payload_bytes.back() == 100.0);
    CHECK(c.env.max_member_distance_m == 3.0);
    CHECK(c.env.shadowing.std_db == 3.0);
    CHECK(c.rl.episodes == 6000);
    CHECK(c.rl.learning_rate == 1e-3);
    CHECK(c.rl.gamma == 0.9);
    CHECK(c.rl.hidden == std::vector<int>{83, 41, 20});
    CHECK(c.rl.reward_u == 40.0);
    CHECK(c.eval_episodes == 1000);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("emitted config re-parses to an identical config") {
    ExperimentConfig c;
    apply_override(c, "rl.gamma", "0.75");
    apply_override(c, "payload.bytes", "[20, 55.5]");
    apply_override(c, "topology.ap_positions", "[[1, 2], [3.25, 4]]");
    apply_override(c, "output.trace", "true");
    apply_override(c, "policy", "greedy1");
    const std::string text = emit_config(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(emit_config(back) == text);
    CHECK(back.env.ap_positions.size() == 2);
    CHECK(back.env.ap_positions[1].x == 3.25);
    CHECK(back.payload_bytes == std::vector<double>{20, 55.5});
    CHECK(back.write_trace);
    CHECK(back.policy == "greedy1");
}

TEST_CASE("every registered key survives a round trip") {
    const ExperimentConfig c;
    const auto keys = config_keys();
    CHECK(keys.size() > 40);
    CHECK(std::find(keys.begin(), keys.end(), "rl.gamma") != keys.end());
    const std::string text = emit_config(c);
    CHECK(parse_config(text) == c);
}

TEST_CASE("hash changes iff the resolved config changes") {
    ExperimentConfig a;
    ExperimentConfig b;
    CHECK(config_hash(a) == config_hash(b));
    apply_override(b, "--rl.lr=0.002");
    CHECK(config_hash(a) != config_hash(b));
    apply_override(b, "rl.lr=0.001");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(hash_hex(0x1fULL) == "000000000000001f");
}

TEST_CASE("unknown keys are rejected by name") {
    ExperimentConfig c;
    CHECK_THROWS_WITH_AS(apply_override(c, "rl.gama", "0.9"), doctest::Contains("rl.gama"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("rl:\n  bogus: 3\n"), doctest::Contains("rl.bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("nonsense: 1\n"), doctest::Contains("nonsense"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "rl.episodes=abc"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "no_equals_sign"), ConfigError);
}

TEST_CASE("nested YAML and dotted overrides are equivalent") {
    const auto a = parse_config("rl:\n  episodes: 10\ntopology:\n  num_clusters: 6\n");
    ExperimentConfig b;
    apply_override(b, "--rl.episodes=10");
    apply_override(b, "--topology.num_clusters=6");
    CHECK(a == b);
    CHECK(a.rl.episodes == 10);
    CHECK(a.env.resolved_subbands() == 3);
}

TEST_CASE("a scalar payload is a one-point sweep") {
    ExperimentConfig c;
    apply_override(c, "payload.bytes", "60");
    CHECK(c.payload_bytes == std::vector<double>{60});
}

TEST_CASE("validation reports inconsistent values") {
    ExperimentConfig c;
    c.env.num_clusters = 5;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.rl.gamma = 1.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.payload_bytes.clear();
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.eval_episodes = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("training and evaluation configs carry the resolved values") {
    ExperimentConfig c;
    apply_override(c, "rl.episodes", "123");
    apply_override(c, "rl.target_sync", "7");
    apply_override(c, "seed", "99");
    const auto t = make_train_config(c, 1);
    CHECK(t.episodes == 123);
    CHECK(t.hp.target_sync_interval == 7);
    CHECK(t.max_aps == 1);
    CHECK(t.seed == 99);
    CHECK(t.payload_bytes == 100.0);
    CHECK(t.config_hash == training_hash(c));
    ExperimentConfig moved = c;
    apply_override(moved, "output.dir", "elsewhere");
    CHECK(training_hash(moved) == training_hash(c));
    CHECK(config_hash(moved) != config_hash(c));
    const auto e = make_eval_config(c, 40.0);
    CHECK(e.payload_bytes == 40.0);
    CHECK(e.episodes == 1000);
    CHECK(e.seed == 99);
    const auto f = test_features(c);
    CHECK(f.episode_fraction == 1.0);
    CHECK(f.epsilon == 0.02);
}
