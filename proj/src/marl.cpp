#include "urllc/marl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace urllc::marl {

ActionCodec::ActionCodec(int num_aps, int num_subbands, std::vector<double> power_levels_dbm, int max_aps)
    : aps_(num_aps), subbands_(num_subbands), max_aps_(max_aps), powers_(std::move(power_levels_dbm)) {
    if (aps_ <= 0 || subbands_ <= 0 || powers_.empty())
        throw std::invalid_argument("ActionCodec: empty action space");
    if (max_aps_ != 1 && max_aps_ != 2) throw std::invalid_argument("ActionCodec: max_aps must be 1 or 2");
    for (int k = 0; k < aps_; ++k) subsets_.push_back({k, -1});
    if (max_aps_ == 2) {
        for (int a = 0; a < aps_; ++a) {
            for (int b = a + 1; b < aps_; ++b) subsets_.push_back({a, b});
        }
    }
}

LeaderAction ActionCodec::decode(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= size())
        throw std::out_of_range("ActionCodec::decode: index " + std::to_string(index) + " outside [0, " +
                                std::to_string(size()) + ")");
    const int p_count = static_cast<int>(powers_.size());
    const int power = index % p_count;
    const int rest = index / p_count;
    return LeaderAction{subsets_[static_cast<std::size_t>(rest / subbands_)], rest % subbands_, powers_[power]};
}

int ActionCodec::encode(const LeaderAction& action) const {
    ApSubset key = action.aps;
    if (key.second >= 0 && key.second < key.first) std::swap(key.first, key.second);
    const auto s = std::find(subsets_.begin(), subsets_.end(), key);
    const auto p = std::find(powers_.begin(), powers_.end(), action.power_dbm);
    if (s == subsets_.end() || p == powers_.end() || action.subband < 0 || action.subband >= subbands_)
        throw std::invalid_argument("ActionCodec::encode: action not representable");
    const auto s_idx = static_cast<int>(s - subsets_.begin());
    const auto p_idx = static_cast<int>(p - powers_.begin());
    return (s_idx * subbands_ + action.subband) * static_cast<int>(powers_.size()) + p_idx;
}

dqn::ActionSpaceDescriptor ActionCodec::descriptor() const {
    return {static_cast<std::uint32_t>(aps_), static_cast<std::uint32_t>(subbands_),
            static_cast<std::uint32_t>(max_aps_), powers_};
}

std::vector<double> raw_observation(const FactoryEnv& env, int leader, int last_subband,
                                    const ObservationFeatures& features) {
    const int k_count = env.num_aps();
    const int m_count = env.num_subbands();
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(observation_dim(k_count, m_count)));
    for (int k = 0; k < k_count; ++k) x.push_back(env.gains().link(k, leader).composite_db(last_subband));
    for (double w : env.last_interference(leader)) x.push_back(channel::watts_to_dbm(w));
    const double payload = env.initial_bits() > 0.0 ? env.remaining_bits(leader) / env.initial_bits() : 0.0;
    x.push_back(std::clamp(payload, -1.0, 1.0));
    x.push_back(static_cast<double>(env.episode_slots() - env.slot()) / env.episode_slots());
    x.push_back(features.episode_fraction);
    x.push_back(features.epsilon);
    return x;
}

dqn::ObservationTransform default_observation_transform(int num_aps, int num_subbands) {
    dqn::ObservationTransform t;
    // Direct gains span roughly -100..-45 dB on a 40 m floor.
    for (int k = 0; k < num_aps; ++k) {
        t.offset.push_back(-70.0);
        t.scale.push_back(1.0 / 20.0);
    }
    // Interference is measured relative to the -104 dBm noise floor.
    for (int m = 0; m < num_subbands; ++m) {
        t.offset.push_back(-104.0);
        t.scale.push_back(1.0 / 30.0);
    }
    for (int i = 0; i < 4; ++i) {
        t.offset.push_back(0.0);
        t.scale.push_back(1.0);
    }
    return t;
}

std::vector<double> encode_observation(const FactoryEnv& env, int leader, int last_subband,
                                       const ObservationFeatures& features,
                                       const dqn::ObservationTransform& transform) {
    return transform.apply(raw_observation(env, leader, last_subband, features));
}

double common_reward(const SlotOutcome& outcome, const RewardConfig& cfg) {
    double r = 0.0;
    for (std::size_t n = 0; n < outcome.rate_bps.size(); ++n)
        r += outcome.remaining_before[n] > 0.0 ? outcome.rate_bps[n] / cfg.rate_unit_bps : cfg.bonus_u;
    return r;
}

namespace {

dqn::EpsilonSchedule make_schedule(const TrainConfig& cfg) {
    return {cfg.eps_start, cfg.eps_end, cfg.anneal_fraction, cfg.episodes};
}

}  // namespace

MarlTrainer::MarlTrainer(TrainConfig cfg)
    : cfg_(std::move(cfg)),
      env_(cfg_.env, cfg_.seed, "train"),
      codec_(env_.num_aps(), env_.num_subbands(), cfg_.env.power_levels_dbm, cfg_.max_aps),
      schedule_(make_schedule(cfg_)),
      transform_(default_observation_transform(env_.num_aps(), env_.num_subbands())) {
    if (cfg_.episodes <= 0) throw std::invalid_argument("train: episodes must be positive");
    const int dim = observation_dim(env_.num_aps(), env_.num_subbands());
    for (int n = 0; n < env_.num_leaders(); ++n)
        agents_.emplace_back(dim, static_cast<int>(codec_.size()), cfg_.hp, cfg_.seed, static_cast<std::uint64_t>(n));
}

void MarlTrainer::run(std::int64_t end, const std::function<void(const TrainingMetrics&)>& on_episode) {
    const int n_agents = env_.num_leaders();
    std::vector<std::vector<double>> obs(n_agents);
    std::vector<std::vector<double>> next_obs(n_agents);
    std::vector<int> chosen(n_agents);
    std::vector<int> last_subband(n_agents);
    std::vector<LeaderAction> actions(n_agents);

    for (; next_episode_ < end; ++next_episode_) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::int64_t e = next_episode_;
        env_.reset_episode(e, cfg_.payload_bytes, cfg_.episode_slots);
        const double eps = schedule_.at(e);
        const ObservationFeatures features{static_cast<double>(e) / static_cast<double>(cfg_.episodes), eps};

        std::fill(last_subband.begin(), last_subband.end(), 0);
        for (int n = 0; n < n_agents; ++n) obs[n] = encode_observation(env_, n, last_subband[n], features, transform_);

        double reward_sum = 0.0;
        last_rewards_.clear();
        while (!env_.done()) {
            for (int n = 0; n < n_agents; ++n) {
                chosen[n] = agents_[n].act(obs[n], eps);
                actions[n] = codec_.decode(chosen[n]);
                last_subband[n] = actions[n].subband;
            }
            const SlotOutcome outcome = env_.phase1_step(actions);
            const double r = common_reward(outcome, cfg_.reward);
            reward_sum += r;
            last_rewards_.emplace_back(n_agents, r);
            const bool terminal = env_.done();
            for (int n = 0; n < n_agents; ++n) {
                next_obs[n] = encode_observation(env_, n, last_subband[n], features, transform_);
                agents_[n].remember({obs[n], chosen[n], r, next_obs[n], terminal});
            }
            std::swap(obs, next_obs);
        }

        double loss_sum = 0.0;
        for (int n = 0; n < n_agents; ++n) {
            try {
                loss_sum += agents_[n].train();
            } catch (const std::runtime_error& err) {
                throw TrainingDiverged(std::string(err.what()) + " at episode " + std::to_string(e) + ", agent " +
                                           std::to_string(n),
                                       e, n);
            }
        }

        if (on_episode) {
            const auto t1 = std::chrono::steady_clock::now();
            on_episode({e, loss_sum / n_agents, reward_sum, eps,
                        std::chrono::duration<double, std::milli>(t1 - t0).count()});
        }
    }
}

void MarlTrainer::restore(const std::vector<dqn::Checkpoint>& checkpoints) {
    if (checkpoints.size() != agents_.size()) throw std::invalid_argument("restore: checkpoint count != agent count");
    for (std::size_t n = 0; n < agents_.size(); ++n) {
        if (!(checkpoints[n].actions == codec_.descriptor()))
            throw std::invalid_argument("restore: checkpoint action space does not match configuration");
        agents_[n].load(checkpoints[n].network);
    }
    next_episode_ = static_cast<std::int64_t>(checkpoints.front().training_episodes);
}

std::vector<dqn::Checkpoint> MarlTrainer::checkpoints() const {
    std::vector<dqn::Checkpoint> out;
    for (const auto& agent : agents_) {
        out.push_back({agent.online(), transform_, codec_.descriptor(), static_cast<std::uint64_t>(next_episode_),
                       cfg_.config_hash});
    }
    return out;
}

TrainResult train(const TrainConfig& cfg, const std::function<void(const TrainingMetrics&)>& on_episode) {
    MarlTrainer trainer(cfg);
    TrainResult result;
    result.metrics.reserve(static_cast<std::size_t>(cfg.episodes));
    trainer.run(cfg.episodes, [&](const TrainingMetrics& m) {
        result.metrics.push_back(m);
        if (on_episode) on_episode(m);
    });
    result.checkpoints = trainer.checkpoints();
    return result;
}

namespace {

int max_aps_of(const std::vector<dqn::Checkpoint>& ckpts) {
    if (ckpts.empty()) throw std::invalid_argument("MarlPolicy: no checkpoints");
    return static_cast<int>(ckpts.front().actions.max_aps);
}

}  // namespace

MarlPolicy::MarlPolicy(std::vector<dqn::Checkpoint> checkpoints, const EnvConfig& env_cfg, ObservationFeatures features)
    : ckpts_(std::move(checkpoints)),
      codec_(env_cfg.num_aps(), env_cfg.resolved_subbands(), env_cfg.power_levels_dbm, max_aps_of(ckpts_)),
      features_(features) {
    if (static_cast<int>(ckpts_.size()) != env_cfg.num_clusters)
        throw std::invalid_argument("MarlPolicy: " + std::to_string(ckpts_.size()) + " checkpoints for " +
                                    std::to_string(env_cfg.num_clusters) + " clusters");
    const int dim = observation_dim(env_cfg.num_aps(), env_cfg.resolved_subbands());
    for (const auto& ck : ckpts_) {
        if (!(ck.actions == codec_.descriptor()))
            throw std::invalid_argument("MarlPolicy: checkpoint action space does not match topology");
        if (ck.network.input_dim() != dim || ck.network.output_dim() != static_cast<int>(codec_.size()) ||
            ck.transform.size() != static_cast<std::size_t>(dim))
            throw std::invalid_argument("MarlPolicy: checkpoint network dimensions do not match topology");
    }
}

void MarlPolicy::begin_episode(const FactoryEnv& env) { last_subband_.assign(env.num_leaders(), 0); }

std::vector<LeaderAction> MarlPolicy::act(const FactoryEnv& env, RandomStream& /*rng*/) {
    std::vector<LeaderAction> actions(env.num_leaders());
    for (int n = 0; n < env.num_leaders(); ++n) {
        const auto obs = encode_observation(env, n, last_subband_[n], features_, ckpts_[n].transform);
        actions[n] = codec_.decode(dqn::argmax(ckpts_[n].network.forward(obs)));
        last_subband_[n] = actions[n].subband;
    }
    return actions;
}

EvalSummary evaluate(Policy& policy, const EvalConfig& cfg, const std::function<void(const EpisodeMetrics&)>& on_episode,
                     const std::function<void(const TraceRow&)>& on_trace) {
    if (cfg.episodes <= 0) throw std::invalid_argument("evaluate: episodes must be positive");
    FactoryEnv env(cfg.env, cfg.seed, "eval");
    double prob_sum = 0.0;
    double leader_sum = 0.0;
    for (std::int64_t e = 0; e < cfg.episodes; ++e) {
        env.reset_episode(e, cfg.payload_bytes);
        policy.begin_episode(env);
        while (!env.done()) {
            RandomStream rng = make_stream(cfg.seed, "eval/policy",
                                           {static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(env.slot())});
            const int slot = env.slot();
            const std::vector<LeaderAction> actions = policy.act(env, rng);
            const SlotOutcome out = env.phase1_step(actions);
            if (on_trace) {
                for (int n = 0; n < env.num_leaders(); ++n) {
                    on_trace({e, slot, n, actions[n].aps, actions[n].subband, actions[n].power_dbm,
                              channel::linear_to_db(out.sinr[n]), out.rate_bps[n] / 1e6, out.remaining_after[n]});
                }
            }
        }
        env.run_phase2();
        const DeliveryOutcome d = env.delivery_outcome();
        prob_sum += d.probability;
        leader_sum += d.leader_probability;
        if (on_episode) on_episode({e, d.probability, d.leader_probability, d.leader_success, d.member_success});
    }
    const auto n = static_cast<double>(cfg.episodes);
    return {cfg.payload_bytes, cfg.env.num_clusters, policy.name(), prob_sum / n, cfg.episodes, cfg.seed, leader_sum / n};
}

}  // namespace urllc::marl
