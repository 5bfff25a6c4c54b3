#include "urllc/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace urllc::baselines {

namespace {

struct KindName {
    PolicyKind kind;
    std::string_view cli;
    std::string_view name;
};

constexpr std::array<KindName, 6> kKinds{{
    {PolicyKind::random_nearest, "random", "random_nearest"},
    {PolicyKind::centralized_exhaustive, "central", "centralized_exhaustive"},
    {PolicyKind::greedy_single, "greedy1", "greedy_single"},
    {PolicyKind::greedy_multi, "greedy2", "greedy_multi"},
    {PolicyKind::marl_single, "marl1", "marl_single"},
    {PolicyKind::marl_multi, "marl2", "marl_multi"},
}};

double max_power(const FactoryEnv& env) {
    const auto& levels = env.config().power_levels_dbm;
    return *std::max_element(levels.begin(), levels.end());
}

}  // namespace

std::string_view cli_name(PolicyKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.cli;
    }
    return "?";
}

std::string_view policy_name(PolicyKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.name;
    }
    return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view text) {
    for (const auto& k : kKinds) {
        if (k.cli == text || k.name == text) return k.kind;
    }
    return std::nullopt;
}

bool is_learned(PolicyKind kind) { return kind == PolicyKind::marl_single || kind == PolicyKind::marl_multi; }

std::vector<LeaderAction> random_nearest(const FactoryEnv& env, RandomStream& rng) {
    const auto& levels = env.config().power_levels_dbm;
    std::vector<LeaderAction> out(env.num_leaders());
    for (int n = 0; n < env.num_leaders(); ++n) {
        out[n].aps = {env.nearest_ap(n), -1};
        out[n].subband = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(env.num_subbands())));
        out[n].power_dbm = levels[uniform_index(rng, levels.size())];
    }
    return out;
}

std::vector<LeaderAction> greedy_single(const FactoryEnv& env) {
    const double p = max_power(env);
    std::vector<LeaderAction> out(env.num_leaders());
    for (int n = 0; n < env.num_leaders(); ++n) {
        int best_k = 0;
        int best_m = 0;
        double best = env.gains().gain(0, n, 0);
        for (int k = 0; k < env.num_aps(); ++k) {
            for (int m = 0; m < env.num_subbands(); ++m) {
                const double g = env.gains().gain(k, n, m);
                if (g > best) {
                    best = g;
                    best_k = k;
                    best_m = m;
                }
            }
        }
        out[n] = {{best_k, -1}, best_m, p};
    }
    return out;
}

std::vector<LeaderAction> greedy_multi(const FactoryEnv& env) {
    if (env.num_aps() < 2) return greedy_single(env);
    const double p = max_power(env);
    std::vector<LeaderAction> out(env.num_leaders());
    for (int n = 0; n < env.num_leaders(); ++n) {
        double best_sum = -1.0;
        for (int m = 0; m < env.num_subbands(); ++m) {
            // Top two APs on this sub-band, lowest index first among equals.
            int a = -1;
            int b = -1;
            for (int k = 0; k < env.num_aps(); ++k) {
                const double g = env.gains().gain(k, n, m);
                if (a < 0 || g > env.gains().gain(a, n, m)) {
                    b = a;
                    a = k;
                } else if (b < 0 || g > env.gains().gain(b, n, m)) {
                    b = k;
                }
            }
            const double sum = env.gains().gain(a, n, m) + env.gains().gain(b, n, m);
            if (sum > best_sum) {
                best_sum = sum;
                out[n] = {{std::min(a, b), std::max(a, b)}, m, p};
            }
        }
    }
    return out;
}

SumRateProblem SumRateProblem::from_env(const FactoryEnv& env) {
    SumRateProblem p;
    p.gains = &env.gains();
    for (int n = 0; n < env.num_leaders(); ++n) p.serving_ap.push_back(env.nearest_ap(n));
    p.power_levels_dbm = env.config().power_levels_dbm;
    p.num_subbands = env.num_subbands();
    p.noise_w = env.noise_watts();
    p.bandwidth_hz = env.config().noise.bandwidth_hz;
    return p;
}

LeaderAction SumRateProblem::action(int leader, int choice) const {
    const int n_p = static_cast<int>(power_levels_dbm.size());
    return {{serving_ap[leader], -1}, choice / n_p, power_levels_dbm[choice % n_p]};
}

namespace {

// rx[(n * N + j) * C + c]: power received at leader n from the AP serving
// leader j when j takes choice c.
class RxTable {
public:
    explicit RxTable(const SumRateProblem& pb)
        : n_(static_cast<int>(pb.serving_ap.size())), c_(static_cast<int>(pb.choices_per_leader())), pb_(pb) {
        const int n_p = static_cast<int>(pb.power_levels_dbm.size());
        rx_.resize(static_cast<std::size_t>(n_) * n_ * c_);
        for (int n = 0; n < n_; ++n) {
            for (int j = 0; j < n_; ++j) {
                for (int c = 0; c < c_; ++c) {
                    const double p = channel::dbm_to_watts(pb.power_levels_dbm[c % n_p]);
                    rx_[(static_cast<std::size_t>(n) * n_ + j) * c_ + c] = p * pb.gains->gain(pb.serving_ap[j], n, c / n_p);
                }
            }
        }
        subband_of_.resize(c_);
        for (int c = 0; c < c_; ++c) subband_of_[c] = c / n_p;
    }

    double log_sum(const std::vector<int>& choice) const {
        double total = 0.0;
        for (int n = 0; n < n_; ++n) {
            const int m = subband_of_[choice[n]];
            double interference = pb_.noise_w;
            for (int j = 0; j < n_; ++j) {
                if (j != n && subband_of_[choice[j]] == m) interference += at(n, j, choice[j]);
            }
            total += std::log2(1.0 + at(n, n, choice[n]) / interference);
        }
        return total;
    }

private:
    double at(int n, int j, int c) const { return rx_[(static_cast<std::size_t>(n) * n_ + j) * c_ + c]; }

    int n_;
    int c_;
    const SumRateProblem& pb_;
    std::vector<double> rx_;
    std::vector<int> subband_of_;
};

}  // namespace

double profile_sum_rate(const SumRateProblem& problem, const std::vector<int>& choices) {
    std::vector<LeaderAction> actions;
    for (std::size_t n = 0; n < choices.size(); ++n) actions.push_back(problem.action(static_cast<int>(n), choices[n]));
    double total = 0.0;
    for (double s : phase1_sinr(actions, *problem.gains, problem.noise_w)) total += shannon_rate_bps(problem.bandwidth_hz, s);
    return total;
}

CentralizedResult centralized_search(const SumRateProblem& problem, RandomStream& rng, double enumeration_limit,
                                     int max_sweeps) {
    if (problem.gains == nullptr) throw std::invalid_argument("centralized_search: no channel");
    const int n = static_cast<int>(problem.serving_ap.size());
    const int c = static_cast<int>(problem.choices_per_leader());
    const RxTable table(problem);
    CentralizedResult res;

    if (std::pow(static_cast<double>(c), n) <= enumeration_limit) {
        std::vector<int> choice(n, 0);
        std::vector<int> best = choice;
        double best_value = table.log_sum(choice);
        while (true) {
            int pos = n - 1;
            while (pos >= 0 && ++choice[pos] == c) choice[pos--] = 0;
            if (pos < 0) break;
            const double v = table.log_sum(choice);
            if (v > best_value) {
                best_value = v;
                best = choice;
            }
        }
        res.choices = best;
        res.exhaustive = true;
    } else {
        std::vector<int> choice(n);
        for (int& x : choice) x = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(c)));
        double value = table.log_sum(choice);
        res.exhaustive = false;
        for (res.sweeps = 0; res.sweeps < max_sweeps;) {
            ++res.sweeps;
            bool changed = false;
            for (int leader = 0; leader < n; ++leader) {
                const int current = choice[leader];
                int best_c = current;
                double best_v = value;
                for (int alt = 0; alt < c; ++alt) {
                    if (alt == current) continue;
                    choice[leader] = alt;
                    const double v = table.log_sum(choice);
                    if (v > best_v) {
                        best_v = v;
                        best_c = alt;
                    }
                }
                choice[leader] = best_c;
                if (best_c != current) {
                    value = best_v;
                    changed = true;
                }
            }
            if (!changed) break;
        }
        res.choices = choice;
    }
    for (int leader = 0; leader < n; ++leader) res.actions.push_back(problem.action(leader, res.choices[leader]));
    res.sum_rate_bps = profile_sum_rate(problem, res.choices);
    return res;
}

std::vector<LeaderAction> CentralizedPolicy::act(const FactoryEnv& env, RandomStream& rng) {
    return centralized_search(SumRateProblem::from_env(env), rng).actions;
}

std::unique_ptr<Policy> make_baseline(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::random_nearest: return std::make_unique<RandomNearestPolicy>();
        case PolicyKind::centralized_exhaustive: return std::make_unique<CentralizedPolicy>();
        case PolicyKind::greedy_single: return std::make_unique<GreedySinglePolicy>();
        case PolicyKind::greedy_multi: return std::make_unique<GreedyMultiPolicy>();
        default: break;
    }
    throw std::invalid_argument("make_baseline: " + std::string(policy_name(kind)) + " needs checkpoints");
}

}  // namespace urllc::baselines
