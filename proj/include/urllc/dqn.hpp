#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "urllc/random.hpp"

namespace urllc::dqn {

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Fully connected Q-network: ReLU on hidden layers, identity output.
// Weights of layer l have shape (dims[l+1], dims[l]).
class QNetwork {
public:
    QNetwork() = default;
    // dims = {input, hidden..., output}; throws std::invalid_argument on
    // fewer than two entries or non-positive sizes.
    explicit QNetwork(std::vector<int> dims);

    // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    void init_uniform(RandomStream& rng);

    const std::vector<int>& dims() const { return dims_; }
    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    std::size_t num_layers() const { return weights_.size(); }
    std::size_t parameter_count() const;

    // Throws std::invalid_argument on dimension mismatch.
    Eigen::VectorXd forward(std::span<const double> obs) const;
    // One sample per column.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

    // Mean squared error between Q(s_i, a_i) and targets[i]; only the taken
    // action of each sample contributes. Fills grads when non-null.
    double loss(const Eigen::MatrixXd& inputs, std::span<const int> actions, std::span<const double> targets,
                Gradients* grads = nullptr) const;

    std::vector<Eigen::MatrixXd>& weights() { return weights_; }
    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    std::vector<Eigen::VectorXd>& biases() { return biases_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

    // Flat view over all parameters, layer by layer: W row-major, then b.
    double& parameter(std::size_t index);

private:
    std::vector<int> dims_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

class RmsProp {
public:
    RmsProp(double learning_rate = 1e-3, double decay = 0.9, double epsilon = 1e-8)
        : lr_(learning_rate), decay_(decay), eps_(epsilon) {}

    void apply(QNetwork& net, const Gradients& grads);

private:
    double lr_;
    double decay_;
    double eps_;
    std::vector<Eigen::MatrixXd> w_cache_;
    std::vector<Eigen::VectorXd> b_cache_;
};

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

// Fixed-capacity ring buffer; the oldest transition is evicted first.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    // i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const;
    // Uniform with replacement; returns min(batch, size()) samples.
    std::vector<Transition> sample(std::size_t batch, RandomStream& rng) const;

private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;  // next write position
    std::vector<Transition> buf_;
};

struct EpsilonSchedule {
    double eps_start = 1.0;
    double eps_end = 0.02;
    double anneal_fraction = 0.8;
    std::int64_t total_episodes = 6000;

    double at(std::int64_t episode) const;
};

// r + gamma * max_a' Q_target(s', a'), or r for terminal transitions.
std::vector<double> td_targets(std::span<const Transition> batch, const QNetwork& target_net, double gamma);

// One optimizer step on the batch against targets from target_net. Returns
// the pre-update loss; throws std::runtime_error if it is not finite.
double train_step(QNetwork& net, const QNetwork& target_net, std::span<const Transition> batch,
                  RmsProp& optimizer, double gamma);

// Epsilon-greedy; greedy ties resolve to the lowest index. Always consumes
// one uniform draw, plus one more when exploring.
int select_action(const QNetwork& net, std::span<const double> obs, double epsilon, RandomStream& rng);

int argmax(const Eigen::VectorXd& q);

// x_normalized = (x - offset) * scale, per feature.
struct ObservationTransform {
    std::vector<double> offset;
    std::vector<double> scale;

    std::size_t size() const { return offset.size(); }
    std::vector<double> apply(std::span<const double> raw) const;
    friend bool operator==(const ObservationTransform&, const ObservationTransform&) = default;
};

struct HyperParams {
    double learning_rate = 1e-3;
    double gamma = 0.9;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    std::size_t replay_capacity = 50000;
    std::size_t batch_size = 256;
    int target_sync_interval = 100;
    std::vector<int> hidden{83, 41, 20};
};

// Online and target network, optimizer and replay memory of one learner.
class DqnAgent {
public:
    DqnAgent(int input_dim, int num_actions, const HyperParams& hp, std::uint64_t seed, std::uint64_t agent_id);

    int act(std::span<const double> obs, double epsilon);
    void remember(Transition t) { replay_.push(std::move(t)); }
    // One mini-batch update; returns the loss, or 0 with an empty replay memory.
    double train();

    // Replaces both online and target networks.
    void load(QNetwork net);

    const QNetwork& online() const { return online_; }
    const QNetwork& target() const { return target_; }
    const ReplayMemory& replay() const { return replay_; }
    std::int64_t train_steps() const { return train_steps_; }

private:
    HyperParams hp_;
    QNetwork online_;
    QNetwork target_;
    RmsProp optimizer_;
    ReplayMemory replay_;
    RandomStream explore_rng_;
    RandomStream replay_rng_;
    std::int64_t train_steps_ = 0;
};

}  // namespace urllc::dqn
