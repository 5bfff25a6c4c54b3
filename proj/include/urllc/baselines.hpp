#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urllc/factory_env.hpp"
#include "urllc/policy.hpp"

namespace urllc::baselines {

enum class PolicyKind { random_nearest, centralized_exhaustive, greedy_single, greedy_multi, marl_single, marl_multi };

// Short CLI spelling: random | central | greedy1 | greedy2 | marl1 | marl2.
std::string_view cli_name(PolicyKind kind);
// Name written to result files, e.g. "greedy_single".
std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view text);
bool is_learned(PolicyKind kind);

std::vector<LeaderAction> random_nearest(const FactoryEnv& env, RandomStream& rng);
std::vector<LeaderAction> greedy_single(const FactoryEnv& env);
std::vector<LeaderAction> greedy_multi(const FactoryEnv& env);

// Joint sub-band/power allocation with every leader pinned to one AP.
struct SumRateProblem {
    const ChannelSnapshot* gains = nullptr;
    std::vector<int> serving_ap;  // per leader
    std::vector<double> power_levels_dbm;
    int num_subbands = 0;
    double noise_w = 0.0;
    double bandwidth_hz = 0.0;

    static SumRateProblem from_env(const FactoryEnv& env);
    std::size_t choices_per_leader() const { return static_cast<std::size_t>(num_subbands) * power_levels_dbm.size(); }
    // choice = subband * P + power_index
    LeaderAction action(int leader, int choice) const;
};

struct CentralizedResult {
    std::vector<LeaderAction> actions;
    std::vector<int> choices;
    double sum_rate_bps = 0.0;
    bool exhaustive = true;
    int sweeps = 0;
};

// Exact enumeration when (M*P)^N <= enumeration_limit, first maximizer in
// enumeration order (leader N-1 varies fastest). Otherwise best-response
// sweeps from a random profile until no single leader can raise the sum-rate
// or max_sweeps is reached.
CentralizedResult centralized_search(const SumRateProblem& problem, RandomStream& rng,
                                     double enumeration_limit = 1e6, int max_sweeps = 50);

double profile_sum_rate(const SumRateProblem& problem, const std::vector<int>& choices);

class RandomNearestPolicy : public Policy {
public:
    std::string name() const override { return "random_nearest"; }
    std::vector<LeaderAction> act(const FactoryEnv& env, RandomStream& rng) override { return random_nearest(env, rng); }
};

class CentralizedPolicy : public Policy {
public:
    std::string name() const override { return "centralized_exhaustive"; }
    std::vector<LeaderAction> act(const FactoryEnv& env, RandomStream& rng) override;
};

class GreedySinglePolicy : public Policy {
public:
    std::string name() const override { return "greedy_single"; }
    std::vector<LeaderAction> act(const FactoryEnv& env, RandomStream&) override { return greedy_single(env); }
};

class GreedyMultiPolicy : public Policy {
public:
    std::string name() const override { return "greedy_multi"; }
    std::vector<LeaderAction> act(const FactoryEnv& env, RandomStream&) override { return greedy_multi(env); }
};

// Hand-crafted policies only; learned ones are built from checkpoints.
std::unique_ptr<Policy> make_baseline(PolicyKind kind);

}  // namespace urllc::baselines
