#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "urllc/factory_env.hpp"
#include "urllc/marl.hpp"

namespace urllc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RlConfig {
    std::int64_t episodes = 6000;
    double learning_rate = 1e-3;
    double gamma = 0.9;
    double eps_start = 1.0;
    double eps_end = 0.02;
    double anneal_fraction = 0.8;
    std::int64_t replay_capacity = 50000;
    std::int64_t batch_size = 256;
    int target_sync = 100;
    std::vector<int> hidden{83, 41, 20};
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    double reward_u = 40.0;
    double train_payload_bytes = 100.0;
    int episode_slots = 0;  // 0 = Phase-I slot count
    // Values of the episode and epsilon state features at test time.
    double test_episode_feature = 1.0;
    double test_epsilon_feature = 0.02;
};

// Resolved experiment configuration. Defaults reproduce the factory
// scenario: 40x40 m floor, 4 APs, N=4 clusters of 4 members, 1 MHz
// sub-bands at 3 GHz, 1 ms frame split 0.667/0.333 ms.
struct ExperimentConfig {
    EnvConfig env;
    std::vector<double> payload_bytes{20, 40, 60, 80, 100};
    std::vector<int> cluster_sweep{4, 6, 8};
    RlConfig rl;
    std::int64_t eval_episodes = 1000;
    std::string policy = "marl2";
    std::uint64_t seed = 1;
    std::string output_dir = "runs/default";
    std::string checkpoint_dir;
    bool write_trace = false;

    bool operator==(const ExperimentConfig& other) const;
};

// Every dotted key accepted in config files and --key=value overrides.
std::vector<std::string> config_keys();

// YAML text. Unknown keys throw ConfigError naming the key.
ExperimentConfig parse_config(std::string_view yaml_text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// "rl.gamma", "0.9"; the value is parsed as a YAML scalar or flow sequence.
void apply_override(ExperimentConfig& cfg, std::string_view key, std::string_view value);
// Accepts "--rl.gamma=0.9" or "rl.gamma=0.9".
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

// Throws ConfigError when the resolved values are inconsistent.
void validate(const ExperimentConfig& cfg);

// Canonical YAML; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);
// Same as config_hash with output paths blanked; stamped into checkpoints.
std::uint64_t training_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t hash);

marl::TrainConfig make_train_config(const ExperimentConfig& cfg, int max_aps);
marl::EvalConfig make_eval_config(const ExperimentConfig& cfg, double payload_bytes);
marl::ObservationFeatures test_features(const ExperimentConfig& cfg);

}  // namespace urllc
