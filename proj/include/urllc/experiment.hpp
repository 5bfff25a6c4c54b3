#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "urllc/baselines.hpp"
#include "urllc/checkpoint.hpp"
#include "urllc/config.hpp"
#include "urllc/marl.hpp"

namespace urllc::experiment {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kRuntimeFailure = 2,
    kSelfcheckFailure = 3,
};

inline constexpr const char* kResultsHeader = "payload_bytes,n_clusters,policy_name,delivery_probability,n_episodes,seed";
inline constexpr const char* kMetricsHeader = "episode,mean_loss,sum_reward,epsilon,wall_ms";
inline constexpr const char* kTraceHeader = "episode,slot,leader,aps,subband,power_dbm,sinr_db,rate_mbps,remaining_bits";

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> artifacts;
    std::string code_version = URLLC_VERSION;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
// Writes config.resolved.yaml into dir and returns its path.
std::filesystem::path write_resolved_config(const std::filesystem::path& dir, const ExperimentConfig& cfg);

// agent_<n>.qnet files, n = 0..N-1.
void save_checkpoint_dir(const std::filesystem::path& dir, const std::vector<dqn::Checkpoint>& ckpts);
std::vector<dqn::Checkpoint> load_checkpoint_dir(const std::filesystem::path& dir);

std::string format_number(double v);
std::string format_result_row(const marl::EvalSummary& s);
std::string format_metrics_row(const marl::TrainingMetrics& m);
std::string format_trace_row(const marl::TraceRow& r);

// Appends rows, writing the header when the file is new.
void append_results(const std::filesystem::path& path, const std::vector<marl::EvalSummary>& rows);
std::vector<marl::EvalSummary> read_results(const std::filesystem::path& path);
// payload_bytes, then one delivery-probability column per policy (N fixed).
void write_payload_plot(const std::filesystem::path& path, const std::vector<marl::EvalSummary>& rows);
// n_clusters, payload_bytes, then one column per policy.
void write_cluster_plot(const std::filesystem::path& path, const std::vector<marl::EvalSummary>& rows);

// Worker count for independent jobs: min(jobs, URLLC_MAX_WORKERS or hardware threads).
std::size_t worker_count(std::size_t jobs);

// One summary per payload in cfg.payload_bytes, in sweep order. Learned
// policies need checkpoints. trace_dir, when set, receives one trace CSV per payload.
std::vector<marl::EvalSummary> evaluate_payloads(const ExperimentConfig& cfg, baselines::PolicyKind kind,
                                                 const std::vector<dqn::Checkpoint>* checkpoints,
                                                 const std::optional<std::filesystem::path>& trace_dir = std::nullopt);

int cmd_train(const ExperimentConfig& cfg, bool resume, std::ostream& out, std::ostream& err);
int cmd_eval(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_baseline(const ExperimentConfig& cfg, baselines::PolicyKind kind, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, baselines::PolicyKind kind, std::ostream& out, std::ostream& err);

struct SelfcheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
    double ms = 0.0;
};

std::vector<SelfcheckRow> run_selfcheck(const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);
int cmd_selfcheck(const std::optional<std::filesystem::path>& checkpoint_dir, std::ostream& out);

}  // namespace urllc::experiment
