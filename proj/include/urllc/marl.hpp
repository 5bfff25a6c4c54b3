#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/checkpoint.hpp"
#include "urllc/dqn.hpp"
#include "urllc/factory_env.hpp"
#include "urllc/policy.hpp"

namespace urllc::marl {

// Enumerates (AP subset, sub-band, power level) triples. Subsets are all
// singletons {0}..{K-1} followed, in dual-connectivity mode, by all pairs in
// lexicographic order. index = (subset * M + subband) * P + power.
class ActionCodec {
public:
    ActionCodec(int num_aps, int num_subbands, std::vector<double> power_levels_dbm, int max_aps = 2);

    std::size_t size() const { return subsets_.size() * static_cast<std::size_t>(subbands_) * powers_.size(); }
    // Throws std::out_of_range.
    LeaderAction decode(int index) const;
    // Throws std::invalid_argument for actions outside the codec.
    int encode(const LeaderAction& action) const;

    const std::vector<ApSubset>& subsets() const { return subsets_; }
    int num_aps() const { return aps_; }
    int num_subbands() const { return subbands_; }
    int max_aps() const { return max_aps_; }
    const std::vector<double>& power_levels_dbm() const { return powers_; }

    dqn::ActionSpaceDescriptor descriptor() const;

private:
    int aps_;
    int subbands_;
    int max_aps_;
    std::vector<double> powers_;
    std::vector<ApSubset> subsets_;
};

// Feature layout: [direct gain dB per AP (K) | interference+noise dBm per
// sub-band (M) | remaining payload fraction | remaining time fraction |
// episode fraction | epsilon].
inline int observation_dim(int num_aps, int num_subbands) { return num_aps + num_subbands + 4; }

struct ObservationFeatures {
    double episode_fraction = 1.0;
    double epsilon = 0.02;
};

// Unnormalized features for one leader. Direct gains are taken on
// last_subband at the current slot; interference is last slot's measurement.
std::vector<double> raw_observation(const FactoryEnv& env, int leader, int last_subband,
                                    const ObservationFeatures& features);

dqn::ObservationTransform default_observation_transform(int num_aps, int num_subbands);

std::vector<double> encode_observation(const FactoryEnv& env, int leader, int last_subband,
                                       const ObservationFeatures& features,
                                       const dqn::ObservationTransform& transform);

struct RewardConfig {
    double bonus_u = 40.0;
    double rate_unit_bps = 1e6;
};

// Sum over leaders of rate (in rate units) while payload is outstanding,
// or the bonus U once it has been fully delivered in an earlier slot.
double common_reward(const SlotOutcome& outcome, const RewardConfig& cfg);

struct TrainConfig {
    EnvConfig env;
    dqn::HyperParams hp;
    std::int64_t episodes = 6000;
    double eps_start = 1.0;
    double eps_end = 0.02;
    double anneal_fraction = 0.8;
    double payload_bytes = 100.0;
    int episode_slots = 0;  // 0 = Phase-I slot count
    int max_aps = 2;
    RewardConfig reward;
    std::uint64_t seed = 1;
    std::uint64_t config_hash = 0;
};

struct TrainingMetrics {
    std::int64_t episode = 0;
    double mean_loss = 0.0;
    double sum_reward = 0.0;
    double epsilon = 0.0;
    double wall_ms = 0.0;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(const std::string& what, std::int64_t episode, int agent)
        : std::runtime_error(what), episode(episode), agent(agent) {}
    std::int64_t episode;
    int agent;
};

// Distributed deep Q-learning with a common reward: one DqnAgent per
// cluster leader, one mini-batch update per agent at the end of each episode.
class MarlTrainer {
public:
    explicit MarlTrainer(TrainConfig cfg);

    // Runs episodes [next_episode(), end). Throws TrainingDiverged on a
    // non-finite loss; the agents keep their pre-failure parameters.
    void run(std::int64_t end, const std::function<void(const TrainingMetrics&)>& on_episode = {});

    // Restores networks (for resume). Replay memories start empty.
    void restore(const std::vector<dqn::Checkpoint>& checkpoints);

    std::vector<dqn::Checkpoint> checkpoints() const;
    std::int64_t next_episode() const { return next_episode_; }
    const std::vector<dqn::DqnAgent>& agents() const { return agents_; }
    const ActionCodec& codec() const { return codec_; }
    const dqn::EpsilonSchedule& schedule() const { return schedule_; }
    // Common reward of every slot of the last episode, as handed to each agent.
    const std::vector<std::vector<double>>& last_rewards() const { return last_rewards_; }

private:
    TrainConfig cfg_;
    FactoryEnv env_;
    ActionCodec codec_;
    dqn::EpsilonSchedule schedule_;
    dqn::ObservationTransform transform_;
    std::vector<dqn::DqnAgent> agents_;
    std::int64_t next_episode_ = 0;
    std::vector<std::vector<double>> last_rewards_;  // [slot][agent]
};

struct TrainResult {
    std::vector<dqn::Checkpoint> checkpoints;
    std::vector<TrainingMetrics> metrics;
};

TrainResult train(const TrainConfig& cfg, const std::function<void(const TrainingMetrics&)>& on_episode = {});

// Greedy per-agent policy over trained networks.
class MarlPolicy : public Policy {
public:
    // Throws std::invalid_argument when the checkpoints do not fit env_cfg.
    MarlPolicy(std::vector<dqn::Checkpoint> checkpoints, const EnvConfig& env_cfg,
               ObservationFeatures features = {});

    std::string name() const override { return codec_.max_aps() == 1 ? "marl_single" : "marl_multi"; }
    void begin_episode(const FactoryEnv& env) override;
    std::vector<LeaderAction> act(const FactoryEnv& env, RandomStream& rng) override;

    const ActionCodec& codec() const { return codec_; }

private:
    std::vector<dqn::Checkpoint> ckpts_;
    ActionCodec codec_;
    ObservationFeatures features_;
    std::vector<int> last_subband_;
};

struct EvalConfig {
    EnvConfig env;
    double payload_bytes = 100.0;
    std::int64_t episodes = 1000;
    std::uint64_t seed = 1;
};

struct EpisodeMetrics {
    std::int64_t episode = 0;
    double delivery_fraction = 0.0;
    double leader_fraction = 0.0;
    std::vector<bool> leader_success;
    std::vector<bool> member_success;
};

struct TraceRow {
    std::int64_t episode = 0;
    int slot = 0;
    int leader = 0;
    ApSubset aps;
    int subband = 0;
    double power_dbm = 0.0;
    double sinr_db = 0.0;
    double rate_mbps = 0.0;
    double remaining_bits = 0.0;
};

struct EvalSummary {
    double payload_bytes = 0.0;
    int n_clusters = 0;
    std::string policy_name;
    double delivery_probability = 0.0;
    std::int64_t n_episodes = 0;
    std::uint64_t seed = 0;
    double leader_probability = 0.0;
};

// Phase I with the policy, then the fixed Phase-II schedule, per episode.
EvalSummary evaluate(Policy& policy, const EvalConfig& cfg,
                     const std::function<void(const EpisodeMetrics&)>& on_episode = {},
                     const std::function<void(const TraceRow&)>& on_trace = {});

}  // namespace urllc::marl
