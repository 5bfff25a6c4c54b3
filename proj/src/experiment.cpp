#include "urllc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "urllc/oracles.hpp"

namespace urllc::experiment {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::out | mode);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

int max_aps_for(baselines::PolicyKind kind) { return kind == baselines::PolicyKind::marl_single ? 1 : 2; }

baselines::PolicyKind policy_from_config(const ExperimentConfig& cfg) {
    const auto kind = baselines::parse_policy(cfg.policy);
    if (!kind) throw ConfigError("unknown policy '" + cfg.policy + "'");
    return *kind;
}

fs::path checkpoint_dir_for(const ExperimentConfig& cfg) {
    return cfg.checkpoint_dir.empty() ? fs::path(cfg.output_dir) / "checkpoints" : fs::path(cfg.checkpoint_dir);
}

RunManifest start_manifest(const std::string& command, const ExperimentConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.config_hash = hash_hex(config_hash(cfg));
    m.seed = cfg.seed;
    m.started_at = utc_now();
    return m;
}

std::string aps_text(const ApSubset& s) {
    return s.second < 0 ? std::to_string(s.first) : std::to_string(s.first) + "+" + std::to_string(s.second);
}

// Runs job(i) for i in [0, n) on a bounded set of threads; rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, F&& job) {
    const std::size_t workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string payload_label(double payload) {
    return format_number(payload);
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_manifest(const fs::path& path, const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["artifacts"] = m.artifacts;
    j["code_version"] = m.code_version;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

fs::path write_resolved_config(const fs::path& dir, const ExperimentConfig& cfg) {
    const fs::path path = dir / "config.resolved.yaml";
    auto f = open_out(path);
    f << emit_config(cfg);
    return path;
}

void save_checkpoint_dir(const fs::path& dir, const std::vector<dqn::Checkpoint>& ckpts) {
    fs::create_directories(dir);
    for (std::size_t n = 0; n < ckpts.size(); ++n) {
        dqn::save_checkpoint(dir / ("agent_" + std::to_string(n) + ".qnet"), ckpts[n]);
    }
}

std::vector<dqn::Checkpoint> load_checkpoint_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw dqn::CheckpointError("checkpoint directory not found: " + dir.string());
    std::vector<dqn::Checkpoint> out;
    for (int n = 0;; ++n) {
        const fs::path p = dir / ("agent_" + std::to_string(n) + ".qnet");
        if (!fs::exists(p)) break;
        out.push_back(dqn::load_checkpoint(p));
    }
    if (out.empty()) throw dqn::CheckpointError("no agent_<n>.qnet files in " + dir.string());
    return out;
}

std::string format_result_row(const marl::EvalSummary& s) {
    std::ostringstream os;
    os << format_number(s.payload_bytes) << ',' << s.n_clusters << ',' << s.policy_name << ','
       << format_number(s.delivery_probability) << ',' << s.n_episodes << ',' << s.seed;
    return os.str();
}

std::string format_metrics_row(const marl::TrainingMetrics& m) {
    std::ostringstream os;
    os << m.episode << ',' << format_number(m.mean_loss) << ',' << format_number(m.sum_reward) << ','
       << format_number(m.epsilon) << ',' << std::fixed << std::setprecision(3) << m.wall_ms;
    return os.str();
}

std::string format_trace_row(const marl::TraceRow& r) {
    std::ostringstream os;
    os << r.episode << ',' << r.slot << ',' << r.leader << ',' << aps_text(r.aps) << ',' << r.subband << ','
       << format_number(r.power_dbm) << ',' << format_number(r.sinr_db) << ',' << format_number(r.rate_mbps) << ','
       << format_number(r.remaining_bits);
    return os.str();
}

void append_results(const fs::path& path, const std::vector<marl::EvalSummary>& rows) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    auto f = open_out(path, std::ios::app);
    if (fresh) f << kResultsHeader << '\n';
    for (const auto& r : rows) f << format_result_row(r) << '\n';
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<marl::EvalSummary> read_results(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != kResultsHeader) throw std::runtime_error("bad results header in " + path.string());
    std::vector<marl::EvalSummary> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() != 6) throw std::runtime_error("malformed results row: " + line);
        marl::EvalSummary s;
        s.payload_bytes = std::stod(cells[0]);
        s.n_clusters = std::stoi(cells[1]);
        s.policy_name = cells[2];
        s.delivery_probability = std::stod(cells[3]);
        s.n_episodes = std::stoll(cells[4]);
        s.seed = std::stoull(cells[5]);
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

// Later rows win; empty cells where a policy has no value.
void write_pivot(const fs::path& path, const std::vector<marl::EvalSummary>& rows, bool with_clusters) {
    std::vector<std::string> policies;
    std::map<std::pair<int, double>, std::map<std::string, double>> table;
    for (const auto& r : rows) {
        if (std::find(policies.begin(), policies.end(), r.policy_name) == policies.end()) policies.push_back(r.policy_name);
        table[{with_clusters ? r.n_clusters : 0, r.payload_bytes}][r.policy_name] = r.delivery_probability;
    }
    auto f = open_out(path);
    if (with_clusters) f << "n_clusters,";
    f << "payload_bytes";
    for (const auto& p : policies) f << ',' << p;
    f << '\n';
    for (const auto& [key, vals] : table) {
        if (with_clusters) f << key.first << ',';
        f << format_number(key.second);
        for (const auto& p : policies) {
            f << ',';
            if (auto it = vals.find(p); it != vals.end()) f << format_number(it->second);
        }
        f << '\n';
    }
}

}  // namespace

void write_payload_plot(const fs::path& path, const std::vector<marl::EvalSummary>& rows) {
    write_pivot(path, rows, false);
}

void write_cluster_plot(const fs::path& path, const std::vector<marl::EvalSummary>& rows) {
    write_pivot(path, rows, true);
}

std::size_t worker_count(std::size_t jobs) {
    std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("URLLC_MAX_WORKERS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) cap = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(cap, jobs));
}

std::vector<marl::EvalSummary> evaluate_payloads(const ExperimentConfig& cfg, baselines::PolicyKind kind,
                                                 const std::vector<dqn::Checkpoint>* checkpoints,
                                                 const std::optional<fs::path>& trace_dir) {
    if (baselines::is_learned(kind) && checkpoints == nullptr) {
        throw ConfigError(std::string(baselines::policy_name(kind)) + " requires a checkpoint directory");
    }
    std::vector<marl::EvalSummary> out(cfg.payload_bytes.size());
    parallel_for(cfg.payload_bytes.size(), [&](std::size_t i) {
        std::unique_ptr<Policy> policy;
        if (baselines::is_learned(kind)) {
            policy = std::make_unique<marl::MarlPolicy>(*checkpoints, cfg.env, test_features(cfg));
        } else {
            policy = baselines::make_baseline(kind);
        }
        std::function<void(const marl::TraceRow&)> on_trace;
        std::ofstream trace;
        if (trace_dir) {
            trace = open_out(*trace_dir / ("trace_" + policy->name() + "_N" + std::to_string(cfg.env.num_clusters) +
                                           "_B" + payload_label(cfg.payload_bytes[i]) + ".csv"));
            trace << kTraceHeader << '\n';
            on_trace = [&trace](const marl::TraceRow& r) { trace << format_trace_row(r) << '\n'; };
        }
        out[i] = marl::evaluate(*policy, make_eval_config(cfg, cfg.payload_bytes[i]), {}, on_trace);
    });
    return out;
}

namespace {

void report(std::ostream& out, const std::vector<marl::EvalSummary>& rows) {
    for (const auto& r : rows) {
        out << r.policy_name << " N=" << r.n_clusters << " B=" << format_number(r.payload_bytes)
            << " delivery=" << std::fixed << std::setprecision(5) << r.delivery_probability
            << " leaders=" << r.leader_probability << std::defaultfloat << '\n';
    }
}

// Trains one MARL system and writes checkpoints plus metrics into out_dir.
// Returns the final checkpoints; throws TrainingDiverged after dumping state.
std::vector<dqn::Checkpoint> train_into(const ExperimentConfig& cfg, int max_aps, const fs::path& out_dir,
                                        const fs::path& ckpt_dir, bool resume, std::vector<std::string>& artifacts,
                                        std::ostream& out) {
    marl::MarlTrainer trainer(make_train_config(cfg, max_aps));
    const fs::path metrics_path = out_dir / "train_metrics.csv";
    std::ios::openmode mode = std::ios::trunc;
    if (resume) {
        trainer.restore(load_checkpoint_dir(ckpt_dir));
        out << "resuming at episode " << trainer.next_episode() << '\n';
        if (fs::exists(metrics_path)) mode = std::ios::app;
    }
    const bool header = mode == std::ios::trunc;
    auto metrics = open_out(metrics_path, mode);
    if (header) metrics << kMetricsHeader << '\n';
    const std::int64_t total = cfg.rl.episodes;
    const std::int64_t every = std::max<std::int64_t>(1, total / 10);
    try {
        trainer.run(total, [&](const marl::TrainingMetrics& m) {
            metrics << format_metrics_row(m) << '\n';
            if ((m.episode + 1) % every == 0 || m.episode + 1 == total) {
                out << "episode " << m.episode + 1 << "/" << total << " loss=" << format_number(m.mean_loss)
                    << " reward=" << format_number(m.sum_reward) << " eps=" << format_number(m.epsilon) << '\n';
            }
        });
    } catch (const marl::TrainingDiverged& e) {
        metrics.flush();
        const fs::path dump = out_dir / "divergence_dump";
        save_checkpoint_dir(dump, trainer.checkpoints());
        auto f = open_out(dump / "state.txt");
        f << "error: " << e.what() << "\nepisode: " << e.episode << "\nagent: " << e.agent << '\n';
        for (std::size_t n = 0; n < trainer.agents().size(); ++n) {
            f << "agent " << n << " train_steps=" << trainer.agents()[n].train_steps()
              << " replay_size=" << trainer.agents()[n].replay().size() << '\n';
        }
        throw;
    }
    auto ckpts = trainer.checkpoints();
    save_checkpoint_dir(ckpt_dir, ckpts);
    artifacts.push_back(metrics_path.string());
    for (std::size_t n = 0; n < ckpts.size(); ++n) {
        artifacts.push_back((ckpt_dir / ("agent_" + std::to_string(n) + ".qnet")).string());
    }
    return ckpts;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const marl::TrainingDiverged& e) {
        err << "training diverged at episode " << e.episode << " (agent " << e.agent << "): " << e.what() << '\n';
        return kRuntimeFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg, bool resume, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        validate(cfg);
        const auto kind = policy_from_config(cfg);
        if (!baselines::is_learned(kind)) throw ConfigError("train needs policy marl1 or marl2, got '" + cfg.policy + "'");
        RunManifest manifest = start_manifest("train", cfg);
        const fs::path out_dir(cfg.output_dir);
        fs::create_directories(out_dir);
        manifest.artifacts.push_back(write_resolved_config(out_dir, cfg).string());
        train_into(cfg, max_aps_for(kind), out_dir, checkpoint_dir_for(cfg), resume, manifest.artifacts, out);
        manifest.finished_at = utc_now();
        write_manifest(out_dir / "manifest.json", manifest);
        return int{kOk};
    });
}

namespace {

int run_eval(const ExperimentConfig& cfg, baselines::PolicyKind kind, const std::string& command, std::ostream& out) {
    validate(cfg);
    RunManifest manifest = start_manifest(command, cfg);
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    manifest.artifacts.push_back(write_resolved_config(out_dir, cfg).string());

    std::optional<std::vector<dqn::Checkpoint>> ckpts;
    if (baselines::is_learned(kind)) {
        if (cfg.checkpoint_dir.empty()) {
            throw ConfigError(std::string(baselines::policy_name(kind)) + " requires --checkpoint-dir");
        }
        ckpts = load_checkpoint_dir(cfg.checkpoint_dir);
        // The checkpoint decides single vs dual connectivity.
        if (!ckpts->empty()) {
            kind = ckpts->front().actions.max_aps == 1 ? baselines::PolicyKind::marl_single
                                                       : baselines::PolicyKind::marl_multi;
        }
    }
    std::optional<fs::path> trace_dir;
    if (cfg.write_trace) trace_dir = out_dir;
    const auto rows = evaluate_payloads(cfg, kind, ckpts ? &*ckpts : nullptr, trace_dir);
    report(out, rows);

    const fs::path results = out_dir / "results.csv";
    append_results(results, rows);
    std::vector<marl::EvalSummary> same_n;
    for (auto& r : read_results(results)) {
        if (r.n_clusters == cfg.env.num_clusters) same_n.push_back(std::move(r));
    }
    write_payload_plot(out_dir / "plot_payload.csv", same_n);
    manifest.artifacts.push_back(results.string());
    manifest.artifacts.push_back((out_dir / "plot_payload.csv").string());
    manifest.finished_at = utc_now();
    write_manifest(out_dir / "manifest.json", manifest);
    return int{kOk};
}

}  // namespace

int cmd_eval(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto kind = policy_from_config(cfg);
        if (!baselines::is_learned(kind)) kind = baselines::PolicyKind::marl_multi;
        ExperimentConfig c = cfg;
        if (c.checkpoint_dir.empty()) c.checkpoint_dir = (fs::path(cfg.output_dir) / "checkpoints").string();
        return run_eval(c, kind, "eval", out);
    });
}

int cmd_baseline(const ExperimentConfig& cfg, baselines::PolicyKind kind, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] { return run_eval(cfg, kind, "baseline", out); });
}

int cmd_sweep(const ExperimentConfig& cfg, baselines::PolicyKind kind, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        validate(cfg);
        RunManifest manifest = start_manifest("sweep", cfg);
        const fs::path out_dir(cfg.output_dir);
        fs::create_directories(out_dir);
        manifest.artifacts.push_back(write_resolved_config(out_dir, cfg).string());

        std::vector<marl::EvalSummary> all;
        for (int n : cfg.cluster_sweep) {
            ExperimentConfig c = cfg;
            c.env.num_clusters = n;
            if (!c.env.allow_subband_override) c.env.num_subbands = 0;
            validate(c);
            const fs::path n_dir = out_dir / ("N" + std::to_string(n));
            std::optional<std::vector<dqn::Checkpoint>> ckpts;
            if (baselines::is_learned(kind)) {
                const fs::path given = cfg.checkpoint_dir.empty() ? fs::path() : fs::path(cfg.checkpoint_dir) / ("N" + std::to_string(n));
                if (!given.empty() && fs::is_directory(given)) {
                    ckpts = load_checkpoint_dir(given);
                } else {
                    out << "training " << baselines::policy_name(kind) << " for N=" << n << '\n';
                    fs::create_directories(n_dir);
                    ckpts = train_into(c, max_aps_for(kind), n_dir, n_dir / "checkpoints", false, manifest.artifacts, out);
                }
            }
            auto rows = evaluate_payloads(c, kind, ckpts ? &*ckpts : nullptr,
                                          cfg.write_trace ? std::optional<fs::path>(n_dir) : std::nullopt);
            report(out, rows);
            all.insert(all.end(), rows.begin(), rows.end());
        }
        const fs::path results = out_dir / "results.csv";
        append_results(results, all);
        write_cluster_plot(out_dir / "plot_clusters.csv", read_results(results));
        manifest.artifacts.push_back(results.string());
        manifest.artifacts.push_back((out_dir / "plot_clusters.csv").string());
        manifest.finished_at = utc_now();
        write_manifest(out_dir / "manifest.json", manifest);
        return int{kOk};
    });
}

// ---- selfcheck ----

namespace {

template <class F>
SelfcheckRow timed(std::string name, F&& body) {
    SelfcheckRow row;
    row.name = std::move(name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::tie(row.pass, row.detail) = body();
    } catch (const std::exception& e) {
        row.pass = false;
        row.detail = std::string("exception: ") + e.what();
    }
    row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

std::pair<bool, std::string> check_sinr() {
    RandomStream rng = make_stream(7, "selfcheck/sinr");
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 4, n = 4 + 2 * static_cast<int>(uniform_index(rng, 3)), m = n / 2;
        const auto snap = oracle::random_snapshot(k, n, m, rng);
        const std::vector<double> levels{-100, 20, 25, 30};
        marl::ActionCodec codec(k, m, levels, 2);
        std::vector<LeaderAction> actions;
        for (int j = 0; j < n; ++j) actions.push_back(codec.decode(static_cast<int>(uniform_index(rng, codec.size()))));
        const double noise = channel::dbm_to_watts(-104.0);
        const auto a = phase1_sinr(actions, snap, noise);
        const auto b = oracle::brute_force_sinr(actions, snap, noise);
        for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(a[j] - b[j]) / std::max(std::abs(b[j]), 1e-300));
    }
    return {worst <= 1e-9, "max rel err " + sci(worst)};
}

std::pair<bool, std::string> check_gradient() {
    RandomStream rng = make_stream(7, "selfcheck/grad");
    dqn::QNetwork net({10, 12, 8, 6});
    net.init_uniform(rng);
    // Nudge biases away from zero so no ReLU sits on its kink.
    for (auto& b : net.biases()) {
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 + 0.05 * uniform01(rng);
    }
    Eigen::MatrixXd x(10, 16);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * uniform01(rng) - 1.0;
    std::vector<int> actions(16);
    std::vector<double> targets(16);
    for (int i = 0; i < 16; ++i) {
        actions[i] = static_cast<int>(uniform_index(rng, 6));
        targets[i] = 2.0 * uniform01(rng);
    }
    dqn::Gradients g;
    net.loss(x, actions, targets, &g);
    const auto numeric = oracle::finite_difference_gradient(net, x, actions, targets);
    const double err = oracle::max_relative_error(oracle::flatten(g), numeric);
    return {err <= 1e-4, "max rel err " + sci(err)};
}

std::pair<bool, std::string> check_codec() {
    const std::vector<double> levels{-100, 20, 25, 30};
    std::ostringstream detail;
    bool ok = true;
    for (int max_aps : {1, 2}) {
        marl::ActionCodec codec(4, 2, levels, max_aps);
        std::set<std::tuple<int, int, int, double>> seen;
        for (int i = 0; i < static_cast<int>(codec.size()); ++i) {
            const auto a = codec.decode(i);
            ok = ok && codec.encode(a) == i;
            seen.insert({a.aps.first, a.aps.second, a.subband, a.power_dbm});
        }
        ok = ok && seen.size() == codec.size();
        detail << (max_aps == 1 ? "single " : " dual ") << codec.size();
    }
    return {ok, detail.str()};
}

std::pair<bool, std::string> check_schedule() {
    bool ok = true;
    for (int n : {2, 4, 6, 8}) {
        const auto sched = phase2_schedule(n, n / 2, 2);
        std::set<std::pair<int, int>> used;
        for (const auto& a : sched) ok = ok && used.insert({a.slot, a.subband}).second;
        ok = ok && static_cast<int>(sched.size()) == n;
    }
    return {ok, "N in {2,4,6,8}, M=N/2, 2 slots"};
}

std::pair<bool, std::string> check_centralized() {
    RandomStream rng = make_stream(7, "selfcheck/central");
    int mismatches = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto snap = oracle::random_snapshot(4, 3, 2, rng);
        baselines::SumRateProblem pb;
        pb.gains = &snap;
        for (int j = 0; j < 3; ++j) pb.serving_ap.push_back(static_cast<int>(uniform_index(rng, 4)));
        pb.power_levels_dbm = {-100, 20, 25, 30};
        pb.num_subbands = 2;
        pb.noise_w = channel::dbm_to_watts(-104.0);
        pb.bandwidth_hz = 1e6;
        const auto fast = baselines::centralized_search(pb, rng);
        const auto slow = oracle::brute_force_max_sum_rate(pb);
        if (std::abs(fast.sum_rate_bps - slow.sum_rate_bps) > 1e-9 * std::max(1.0, slow.sum_rate_bps)) ++mismatches;
    }
    return {mismatches == 0, std::to_string(trials - mismatches) + "/" + std::to_string(trials) + " optimal"};
}

std::pair<bool, std::string> check_roundtrip() {
    RandomStream rng = make_stream(7, "selfcheck/ckpt");
    dqn::Checkpoint c;
    c.network = dqn::QNetwork({10, 83, 41, 20, 80});
    c.network.init_uniform(rng);
    c.transform = marl::default_observation_transform(4, 2);
    c.actions = marl::ActionCodec(4, 2, {-100, 20, 25, 30}, 2).descriptor();
    c.training_episodes = 123;
    c.config_hash = 0xabcdef;
    const fs::path tmp = fs::temp_directory_path() / ("urllc_selfcheck_" + std::to_string(::getpid()) + ".qnet");
    dqn::save_checkpoint(tmp, c);
    const auto back = dqn::load_checkpoint(tmp, c.network.dims());
    fs::remove(tmp);
    std::vector<double> obs(10);
    for (double& v : obs) v = uniform01(rng);
    const bool same = back.network.forward(obs) == c.network.forward(obs) && back.transform == c.transform &&
                      back.actions == c.actions && back.training_episodes == 123 && back.config_hash == 0xabcdef;
    return {same, "bit-exact forward pass"};
}

}  // namespace

std::vector<SelfcheckRow> run_selfcheck(const std::optional<fs::path>& checkpoint_dir) {
    std::vector<SelfcheckRow> rows;
    rows.push_back(timed("sinr_vs_bruteforce", check_sinr));
    rows.push_back(timed("gradient_finite_difference", check_gradient));
    rows.push_back(timed("action_codec_bijection", check_codec));
    rows.push_back(timed("phase2_orthogonality", check_schedule));
    rows.push_back(timed("centralized_vs_bruteforce", check_centralized));
    rows.push_back(timed("checkpoint_roundtrip", check_roundtrip));
    if (checkpoint_dir) {
        std::vector<fs::path> files;
        if (fs::is_directory(*checkpoint_dir)) {
            for (const auto& e : fs::directory_iterator(*checkpoint_dir)) {
                if (e.path().extension() == ".qnet") files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            rows.push_back({"checkpoint_dir", false, "no .qnet files in " + checkpoint_dir->string(), 0.0});
        }
        for (const auto& p : files) {
            rows.push_back(timed("load " + p.filename().string(), [&] {
                const auto c = dqn::load_checkpoint(p);
                return std::pair<bool, std::string>{true, std::to_string(c.network.parameter_count()) + " params"};
            }));
        }
    }
    return rows;
}

int cmd_selfcheck(const std::optional<fs::path>& checkpoint_dir, std::ostream& out) {
    const auto rows = run_selfcheck(checkpoint_dir);
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    bool all = true;
    out << std::left << std::setw(static_cast<int>(width)) << "check" << "  result  " << std::setw(10) << "ms"
        << "detail\n";
    for (const auto& r : rows) {
        all = all && r.pass;
        out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << (r.pass ? "PASS  " : "FAIL  ")
            << "  " << std::setw(10) << std::fixed << std::setprecision(1) << r.ms << std::defaultfloat << r.detail
            << '\n';
    }
    out << (all ? "selfcheck passed\n" : "selfcheck FAILED\n");
    return all ? int{kOk} : int{kSelfcheckFailure};
}

}  // namespace urllc::experiment
