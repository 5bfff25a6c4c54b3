#include "urllc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "urllc/random.hpp"

namespace urllc {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

YAML::Node scalar(double v) { return YAML::Node(fmt_double(v)); }
YAML::Node scalar(std::int64_t v) { return YAML::Node(std::to_string(v)); }
YAML::Node scalar(bool v) { return YAML::Node(v ? "true" : "false"); }

YAML::Node flow_list(const std::vector<double>& xs) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (double x : xs) n.push_back(scalar(x));
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
}

YAML::Node flow_list(const std::vector<int>& xs) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (int x : xs) n.push_back(scalar(static_cast<std::int64_t>(x)));
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
}

template <typename T>
T as(const YAML::Node& node, const std::string& key) {
    try {
        if (!node.IsScalar()) throw ConfigError("");
        return node.as<T>();
    } catch (const std::exception&) {
        throw ConfigError("invalid value for config key '" + key + "'");
    }
}

template <typename T>
std::vector<T> as_list(const YAML::Node& node, const std::string& key) {
    std::vector<T> out;
    if (node.IsScalar()) {
        out.push_back(as<T>(node, key));
        return out;
    }
    if (!node.IsSequence()) throw ConfigError("config key '" + key + "' expects a list");
    for (const auto& item : node) out.push_back(as<T>(item, key));
    return out;
}

struct Field {
    std::string key;
    std::function<YAML::Node(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const YAML::Node&, const std::string&)> set;
};

#define URLLC_FIELD(KEY, TYPE, MEMBER)                                                                              \
    Field {                                                                                                        \
        KEY, [](const ExperimentConfig& c) { return scalar(static_cast<TYPE>(c.MEMBER)); },                        \
            [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {                                   \
                c.MEMBER = static_cast<decltype(c.MEMBER)>(as<TYPE>(n, k));                                        \
            }                                                                                                      \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> kFields = {
        URLLC_FIELD("topology.floor_width_m", double, env.floor_width_m),
        URLLC_FIELD("topology.floor_height_m", double, env.floor_height_m),
        Field{"topology.ap_positions",
              [](const ExperimentConfig& c) {
                  YAML::Node n(YAML::NodeType::Sequence);
                  for (const Point& p : c.env.ap_positions) n.push_back(flow_list(std::vector<double>{p.x, p.y}));
                  n.SetStyle(YAML::EmitterStyle::Flow);
                  return n;
              },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {
                  if (!n.IsSequence()) throw ConfigError("config key '" + k + "' expects a list of [x, y]");
                  c.env.ap_positions.clear();
                  for (const auto& item : n) {
                      const auto xy = as_list<double>(item, k);
                      if (xy.size() != 2) throw ConfigError("config key '" + k + "' expects [x, y] pairs");
                      c.env.ap_positions.push_back({xy[0], xy[1]});
                  }
              }},
        URLLC_FIELD("topology.num_clusters", std::int64_t, env.num_clusters),
        URLLC_FIELD("topology.members_per_cluster", std::int64_t, env.members_per_cluster),
        URLLC_FIELD("topology.num_subbands", std::int64_t, env.num_subbands),
        URLLC_FIELD("topology.max_member_distance_m", double, env.max_member_distance_m),
        URLLC_FIELD("topology.speed_mps", double, env.speed_mps),
        URLLC_FIELD("topology.allow_subband_override", bool, env.allow_subband_override),
        URLLC_FIELD("channel.carrier_freq_ghz", double, env.path_loss.carrier_freq_ghz),
        URLLC_FIELD("channel.pathloss_a", double, env.path_loss.a_coeff),
        URLLC_FIELD("channel.pathloss_b", double, env.path_loss.b_coeff),
        URLLC_FIELD("channel.pathloss_c", double, env.path_loss.c_coeff),
        URLLC_FIELD("channel.min_distance_m", double, env.path_loss.min_distance_m),
        URLLC_FIELD("channel.shadowing_std_db", double, env.shadowing.std_db),
        URLLC_FIELD("channel.noise_psd_dbm_per_hz", double, env.noise.psd_dbm_per_hz),
        URLLC_FIELD("channel.noise_figure_db", double, env.noise.noise_figure_db),
        URLLC_FIELD("channel.bandwidth_hz", double, env.noise.bandwidth_hz),
        Field{"timing.frame_ms", [](const ExperimentConfig& c) { return scalar(c.env.timing.frame_s * 1e3); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.env.timing.frame_s = as<double>(n, k) / 1e3; }},
        Field{"timing.phase1_ms", [](const ExperimentConfig& c) { return scalar(c.env.timing.phase1_s * 1e3); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.env.timing.phase1_s = as<double>(n, k) / 1e3; }},
        Field{"timing.phase2_ms", [](const ExperimentConfig& c) { return scalar(c.env.timing.phase2_s * 1e3); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.env.timing.phase2_s = as<double>(n, k) / 1e3; }},
        URLLC_FIELD("timing.slots_per_frame", std::int64_t, env.timing.slots_per_frame),
        Field{"power.levels_dbm", [](const ExperimentConfig& c) { return flow_list(c.env.power_levels_dbm); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.env.power_levels_dbm = as_list<double>(n, k); }},
        URLLC_FIELD("power.d2d_dbm", double, env.d2d_power_dbm),
        Field{"payload.bytes", [](const ExperimentConfig& c) { return flow_list(c.payload_bytes); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.payload_bytes = as_list<double>(n, k); }},
        URLLC_FIELD("payload.member_needs_combined", bool, env.member_needs_combined_payload),
        URLLC_FIELD("metric.members_only", bool, env.members_only_metric),
        URLLC_FIELD("rl.episodes", std::int64_t, rl.episodes),
        URLLC_FIELD("rl.lr", double, rl.learning_rate),
        URLLC_FIELD("rl.gamma", double, rl.gamma),
        URLLC_FIELD("rl.eps_start", double, rl.eps_start),
        URLLC_FIELD("rl.eps_end", double, rl.eps_end),
        URLLC_FIELD("rl.anneal_fraction", double, rl.anneal_fraction),
        URLLC_FIELD("rl.replay_capacity", std::int64_t, rl.replay_capacity),
        URLLC_FIELD("rl.batch_size", std::int64_t, rl.batch_size),
        URLLC_FIELD("rl.target_sync", std::int64_t, rl.target_sync),
        Field{"rl.hidden", [](const ExperimentConfig& c) { return flow_list(c.rl.hidden); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.rl.hidden = as_list<int>(n, k); }},
        URLLC_FIELD("rl.rmsprop_decay", double, rl.rmsprop_decay),
        URLLC_FIELD("rl.rmsprop_epsilon", double, rl.rmsprop_epsilon),
        URLLC_FIELD("rl.reward_u", double, rl.reward_u),
        URLLC_FIELD("rl.train_payload_bytes", double, rl.train_payload_bytes),
        URLLC_FIELD("rl.episode_slots", std::int64_t, rl.episode_slots),
        URLLC_FIELD("rl.test_episode_feature", double, rl.test_episode_feature),
        URLLC_FIELD("rl.test_epsilon_feature", double, rl.test_epsilon_feature),
        URLLC_FIELD("eval.episodes", std::int64_t, eval_episodes),
        Field{"sweep.clusters", [](const ExperimentConfig& c) { return flow_list(c.cluster_sweep); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.cluster_sweep = as_list<int>(n, k); }},
        Field{"policy", [](const ExperimentConfig& c) { return YAML::Node(c.policy); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.policy = as<std::string>(n, k); }},
        Field{"seed", [](const ExperimentConfig& c) { return YAML::Node(std::to_string(c.seed)); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.seed = as<std::uint64_t>(n, k); }},
        Field{"output.dir", [](const ExperimentConfig& c) { return YAML::Node(c.output_dir); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.output_dir = as<std::string>(n, k); }},
        Field{"output.checkpoint_dir", [](const ExperimentConfig& c) { return YAML::Node(c.checkpoint_dir); },
              [](ExperimentConfig& c, const YAML::Node& n, const std::string& k) { c.checkpoint_dir = as<std::string>(n, k); }},
        URLLC_FIELD("output.trace", bool, write_trace),
    };
    return kFields;
}

#undef URLLC_FIELD

const Field* find_field(std::string_view key) {
    for (const Field& f : fields()) {
        if (f.key == key) return &f;
    }
    return nullptr;
}

bool is_prefix_of_field(const std::string& prefix) {
    for (const Field& f : fields()) {
        if (f.key.size() > prefix.size() && f.key.compare(0, prefix.size(), prefix) == 0 && f.key[prefix.size()] == '.')
            return true;
    }
    return false;
}

void walk(ExperimentConfig& cfg, const YAML::Node& node, const std::string& prefix) {
    for (const auto& kv : node) {
        const std::string name = kv.first.as<std::string>();
        const std::string key = prefix.empty() ? name : prefix + "." + name;
        if (const Field* f = find_field(key)) {
            f->set(cfg, kv.second, key);
        } else if (kv.second.IsMap() && is_prefix_of_field(key)) {
            walk(cfg, kv.second, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const { return emit_config(*this) == emit_config(other); }

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Field& f : fields()) keys.push_back(f.key);
    return keys;
}

ExperimentConfig parse_config(std::string_view yaml_text, ExperimentConfig base) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (root.IsNull()) return base;
    if (!root.IsMap()) throw ConfigError("config root must be a mapping");
    walk(base, root, "");
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    const Field* f = find_field(key);
    if (f == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
    YAML::Node node;
    try {
        node = YAML::Load(std::string(value));
    } catch (const YAML::Exception&) {
        throw ConfigError("invalid value for config key '" + std::string(key) + "'");
    }
    if (node.IsNull()) node = YAML::Node(std::string(value));
    f->set(cfg, node, std::string(key));
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    while (!assignment.empty() && assignment.front() == '-') assignment.remove_prefix(1);
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    apply_override(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void validate(const ExperimentConfig& cfg) {
    try {
        cfg.env.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.payload_bytes.empty()) throw ConfigError("payload.bytes: empty sweep");
    for (double b : cfg.payload_bytes) {
        if (!(b >= 0.0)) throw ConfigError("payload.bytes: payloads must be >= 0");
    }
    for (int n : cfg.cluster_sweep) {
        if (n <= 0) throw ConfigError("sweep.clusters: cluster counts must be positive");
    }
    const RlConfig& rl = cfg.rl;
    if (rl.episodes <= 0) throw ConfigError("rl.episodes must be positive");
    if (!(rl.learning_rate > 0.0)) throw ConfigError("rl.lr must be positive");
    if (!(rl.gamma >= 0.0 && rl.gamma <= 1.0)) throw ConfigError("rl.gamma must lie in [0, 1]");
    if (!(rl.eps_start >= 0.0 && rl.eps_start <= 1.0 && rl.eps_end >= 0.0 && rl.eps_end <= 1.0))
        throw ConfigError("rl.eps_start and rl.eps_end must lie in [0, 1]");
    if (!(rl.anneal_fraction > 0.0 && rl.anneal_fraction <= 1.0)) throw ConfigError("rl.anneal_fraction must lie in (0, 1]");
    if (rl.replay_capacity <= 0) throw ConfigError("rl.replay_capacity must be positive");
    if (rl.batch_size <= 0) throw ConfigError("rl.batch_size must be positive");
    if (rl.target_sync < 0) throw ConfigError("rl.target_sync must be >= 0");
    for (int h : rl.hidden) {
        if (h <= 0) throw ConfigError("rl.hidden: layer sizes must be positive");
    }
    if (!(rl.reward_u > 0.0)) throw ConfigError("rl.reward_u must be positive");
    if (rl.episode_slots < 0) throw ConfigError("rl.episode_slots must be >= 0");
    if (cfg.eval_episodes <= 0) throw ConfigError("eval.episodes must be positive");
}

std::string emit_config(const ExperimentConfig& cfg) {
    YAML::Node root(YAML::NodeType::Map);
    for (const Field& f : fields()) {
        const auto dot = f.key.find('.');
        if (dot == std::string::npos) {
            root[f.key] = f.get(cfg);
        } else {
            root[f.key.substr(0, dot)][f.key.substr(dot + 1)] = f.get(cfg);
        }
    }
    YAML::Emitter out;
    out << root;
    return std::string(out.c_str()) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(emit_config(cfg)); }

std::uint64_t training_hash(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.output_dir.clear();
    c.checkpoint_dir.clear();
    c.write_trace = false;
    return config_hash(c);
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

marl::TrainConfig make_train_config(const ExperimentConfig& cfg, int max_aps) {
    marl::TrainConfig t;
    t.env = cfg.env;
    t.hp.learning_rate = cfg.rl.learning_rate;
    t.hp.gamma = cfg.rl.gamma;
    t.hp.rmsprop_decay = cfg.rl.rmsprop_decay;
    t.hp.rmsprop_epsilon = cfg.rl.rmsprop_epsilon;
    t.hp.replay_capacity = static_cast<std::size_t>(cfg.rl.replay_capacity);
    t.hp.batch_size = static_cast<std::size_t>(cfg.rl.batch_size);
    t.hp.target_sync_interval = cfg.rl.target_sync;
    t.hp.hidden = cfg.rl.hidden;
    t.episodes = cfg.rl.episodes;
    t.eps_start = cfg.rl.eps_start;
    t.eps_end = cfg.rl.eps_end;
    t.anneal_fraction = cfg.rl.anneal_fraction;
    t.payload_bytes = cfg.rl.train_payload_bytes;
    t.episode_slots = cfg.rl.episode_slots;
    t.max_aps = max_aps;
    t.reward.bonus_u = cfg.rl.reward_u;
    t.seed = cfg.seed;
    t.config_hash = training_hash(cfg);
    return t;
}

marl::EvalConfig make_eval_config(const ExperimentConfig& cfg, double payload_bytes) {
    return {cfg.env, payload_bytes, cfg.eval_episodes, cfg.seed};
}

marl::ObservationFeatures test_features(const ExperimentConfig& cfg) {
    return {cfg.rl.test_episode_feature, cfg.rl.test_epsilon_feature};
}

}  // namespace urllc
