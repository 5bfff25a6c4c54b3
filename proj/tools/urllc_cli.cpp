#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urllc/baselines.hpp"
#include "urllc/config.hpp"
#include "urllc/experiment.hpp"

namespace {

using urllc::ExperimentConfig;
namespace ex = urllc::experiment;

struct Common {
    std::string config;
    std::string out;
    std::string checkpoint_dir;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "YAML config file");
    sub->add_option("--out", c.out, "output directory (overrides output.dir)");
    sub->add_option("--checkpoint-dir", c.checkpoint_dir, "directory of agent_<n>.qnet files");
    sub->allow_extras();
}

// Config file, then --key=value overrides, then explicit flags.
ExperimentConfig resolve(const Common& c, const std::vector<std::string>& extras) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : urllc::load_config(c.config);
    for (const auto& e : extras) {
        if (e.rfind("--", 0) != 0 || e.find('=') == std::string::npos) {
            throw urllc::ConfigError("unexpected argument '" + e + "' (overrides use --key=value)");
        }
        urllc::apply_override(cfg, e);
    }
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (!c.checkpoint_dir.empty()) cfg.checkpoint_dir = c.checkpoint_dir;
    urllc::validate(cfg);
    return cfg;
}

urllc::baselines::PolicyKind resolve_policy(const std::string& text) {
    const auto kind = urllc::baselines::parse_policy(text);
    if (!kind) throw urllc::ConfigError("unknown policy '" + text + "'");
    return *kind;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factory URLLC resource allocation with multi-agent deep Q-learning"};
    app.set_version_flag("--version", std::string(URLLC_VERSION));
    app.require_subcommand(1);

    Common c;
    bool resume = false;
    std::string policy;

    auto* train = app.add_subcommand("train", "train one DQN agent per cluster leader");
    add_common(train, c);
    train->add_flag("--resume", resume, "continue from the checkpoints in the checkpoint directory");
    train->add_option("--policy", policy, "marl1 | marl2");

    auto* eval = app.add_subcommand("eval", "evaluate trained agents over the payload sweep");
    add_common(eval, c);

    auto* baseline = app.add_subcommand("baseline", "evaluate a baseline over the payload sweep");
    add_common(baseline, c);
    baseline->add_option("--policy", policy, "random | central | greedy1 | greedy2 | marl1 | marl2")->required();

    auto* sweep = app.add_subcommand("sweep", "cluster-count sweep (trains learned policies per N)");
    add_common(sweep, c);
    sweep->add_option("--policy", policy, "policy to sweep");

    auto* selfcheck = app.add_subcommand("selfcheck", "run built-in correctness checks");
    selfcheck->add_option("--checkpoint-dir", c.checkpoint_dir, "also verify these checkpoint files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ex::kConfigError;
    }

    if (selfcheck->parsed()) {
        std::optional<std::filesystem::path> dir;
        if (!c.checkpoint_dir.empty()) dir = c.checkpoint_dir;
        return ex::cmd_selfcheck(dir, std::cout);
    }

    CLI::App* active = app.get_subcommands().front();
    ExperimentConfig cfg;
    urllc::baselines::PolicyKind kind{};
    try {
        cfg = resolve(c, active->remaining());
        if (!policy.empty()) cfg.policy = policy;
        kind = resolve_policy(cfg.policy);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ex::kConfigError;
    }

    if (train->parsed()) return ex::cmd_train(cfg, resume, std::cout, std::cerr);
    if (eval->parsed()) return ex::cmd_eval(cfg, std::cout, std::cerr);
    if (baseline->parsed()) return ex::cmd_baseline(cfg, kind, std::cout, std::cerr);
    return ex::cmd_sweep(cfg, kind, std::cout, std::cerr);
}
