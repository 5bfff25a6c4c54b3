#include "urllc/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace urllc::dqn {

QNetwork::QNetwork(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("QNetwork: need input and output dimensions");
    for (int d : dims_) {
        if (d <= 0) throw std::invalid_argument("QNetwork: layer sizes must be positive");
    }
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        weights_.emplace_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
        biases_.emplace_back(Eigen::VectorXd::Zero(dims_[l + 1]));
    }
}

void QNetwork::init_uniform(RandomStream& rng) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd& w = weights_[l];
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
        }
        biases_[l].setZero();
    }
}

std::size_t QNetwork::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

double& QNetwork::parameter(std::size_t index) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd& w = weights_[l];
        const auto nw = static_cast<std::size_t>(w.size());
        if (index < nw) return w(static_cast<Eigen::Index>(index / w.cols()), static_cast<Eigen::Index>(index % w.cols()));
        index -= nw;
        const auto nb = static_cast<std::size_t>(biases_[l].size());
        if (index < nb) return biases_[l](static_cast<Eigen::Index>(index));
        index -= nb;
    }
    throw std::out_of_range("QNetwork::parameter: index out of range");
}

Eigen::VectorXd QNetwork::forward(std::span<const double> obs) const {
    if (static_cast<int>(obs.size()) != input_dim())
        throw std::invalid_argument("QNetwork::forward: expected input of size " + std::to_string(input_dim()) +
                                    ", got " + std::to_string(obs.size()));
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::VectorXd z = weights_[l] * a + biases_[l];
        a = (l + 1 < weights_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }
    return a;
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != input_dim()) throw std::invalid_argument("QNetwork::forward_batch: input dimension mismatch");
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = weights_[l] * a;
        z.colwise() += biases_[l];
        a = (l + 1 < weights_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    }
    return a;
}

double QNetwork::loss(const Eigen::MatrixXd& inputs, std::span<const int> actions, std::span<const double> targets,
                      Gradients* grads) const {
    const Eigen::Index batch = inputs.cols();
    if (inputs.rows() != input_dim()) throw std::invalid_argument("QNetwork::loss: input dimension mismatch");
    if (static_cast<Eigen::Index>(actions.size()) != batch || static_cast<Eigen::Index>(targets.size()) != batch)
        throw std::invalid_argument("QNetwork::loss: batch size mismatch");
    if (batch == 0) throw std::invalid_argument("QNetwork::loss: empty batch");

    const std::size_t layers = weights_.size();
    std::vector<Eigen::MatrixXd> act(layers + 1);  // act[0] = inputs, act[l+1] = output of layer l
    std::vector<Eigen::MatrixXd> pre(layers);
    act[0] = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = weights_[l] * act[l];
        pre[l].colwise() += biases_[l];
        act[l + 1] = (l + 1 < layers) ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
    }

    const Eigen::MatrixXd& q = act[layers];
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
    double total = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const int a = actions[static_cast<std::size_t>(i)];
        if (a < 0 || a >= output_dim()) throw std::invalid_argument("QNetwork::loss: action index out of range");
        const double err = q(a, i) - targets[static_cast<std::size_t>(i)];
        total += err * err;
        delta(a, i) = 2.0 * err / static_cast<double>(batch);
    }
    const double mse = total / static_cast<double>(batch);
    if (grads == nullptr) return mse;

    grads->weights.resize(layers);
    grads->biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        grads->weights[l] = delta * act[l].transpose();
        grads->biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = weights_[l].transpose() * delta;
            delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return mse;
}

void RmsProp::apply(QNetwork& net, const Gradients& grads) {
    auto& w = net.weights();
    auto& b = net.biases();
    if (w_cache_.size() != w.size()) {
        w_cache_.clear();
        b_cache_.clear();
        for (std::size_t l = 0; l < w.size(); ++l) {
            w_cache_.emplace_back(Eigen::MatrixXd::Zero(w[l].rows(), w[l].cols()));
            b_cache_.emplace_back(Eigen::VectorXd::Zero(b[l].size()));
        }
    }
    for (std::size_t l = 0; l < w.size(); ++l) {
        w_cache_[l] = decay_ * w_cache_[l] + (1.0 - decay_) * grads.weights[l].cwiseAbs2();
        b_cache_[l] = decay_ * b_cache_[l] + (1.0 - decay_) * grads.biases[l].cwiseAbs2();
        w[l].array() -= lr_ * grads.weights[l].array() / (w_cache_[l].array().sqrt() + eps_);
        b[l].array() -= lr_ * grads.biases[l].array() / (b_cache_[l].array().sqrt() + eps_);
    }
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
    buf_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayMemory::push(Transition t) {
    if (t.state.size() != t.next_state.size())
        throw std::invalid_argument("ReplayMemory: state and next_state dimensions differ");
    if (buf_.size() < capacity_) {
        buf_.push_back(std::move(t));
    } else {
        buf_[head_] = std::move(t);
    }
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayMemory::at(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("ReplayMemory::at");
    const std::size_t oldest = size_ < capacity_ ? 0 : head_;
    return buf_[(oldest + i) % capacity_];
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch, RandomStream& rng) const {
    std::vector<Transition> out;
    const std::size_t n = std::min(batch, size_);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(buf_[uniform_index(rng, size_)]);
    return out;
}

double EpsilonSchedule::at(std::int64_t episode) const {
    const double anneal = anneal_fraction * static_cast<double>(total_episodes);
    if (episode <= 0) return eps_start;
    if (static_cast<double>(episode) >= anneal) return eps_end;
    const double eps = eps_start - (eps_start - eps_end) * static_cast<double>(episode) / anneal;
    return std::clamp(eps, std::min(eps_start, eps_end), std::max(eps_start, eps_end));
}

namespace {

Eigen::MatrixXd stack(std::span<const Transition> batch, bool next) {
    const auto dim = static_cast<Eigen::Index>(batch.front().state.size());
    Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& v = next ? batch[i].next_state : batch[i].state;
        if (static_cast<Eigen::Index>(v.size()) != dim) throw std::invalid_argument("batch: ragged observations");
        m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
    }
    return m;
}

}  // namespace

std::vector<double> td_targets(std::span<const Transition> batch, const QNetwork& target_net, double gamma) {
    if (batch.empty()) throw std::invalid_argument("td_targets: empty batch");
    const Eigen::MatrixXd q_next = target_net.forward_batch(stack(batch, true));
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        y[i] = batch[i].reward;
        if (!batch[i].terminal) y[i] += gamma * q_next.col(static_cast<Eigen::Index>(i)).maxCoeff();
    }
    return y;
}

double train_step(QNetwork& net, const QNetwork& target_net, std::span<const Transition> batch, RmsProp& optimizer,
                  double gamma) {
    const std::vector<double> targets = td_targets(batch, target_net, gamma);
    std::vector<int> actions(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) actions[i] = batch[i].action;
    Gradients grads;
    const double loss = net.loss(stack(batch, false), actions, targets, &grads);
    if (!std::isfinite(loss))
        throw std::runtime_error("train_step: non-finite loss (" + std::to_string(loss) + ") on batch of " +
                                 std::to_string(batch.size()));
    optimizer.apply(net, grads);
    return loss;
}

int argmax(const Eigen::VectorXd& q) {
    int best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i) {
        if (q(i) > q(best)) best = static_cast<int>(i);
    }
    return best;
}

int select_action(const QNetwork& net, std::span<const double> obs, double epsilon, RandomStream& rng) {
    if (uniform01(rng) < epsilon) return static_cast<int>(uniform_index(rng, static_cast<std::size_t>(net.output_dim())));
    return argmax(net.forward(obs));
}

std::vector<double> ObservationTransform::apply(std::span<const double> raw) const {
    if (raw.size() != offset.size()) throw std::invalid_argument("ObservationTransform: dimension mismatch");
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - offset[i]) * scale[i];
    return out;
}

namespace {

std::vector<int> layer_dims(int input_dim, const std::vector<int>& hidden, int num_actions) {
    std::vector<int> dims{input_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(num_actions);
    return dims;
}

}  // namespace

DqnAgent::DqnAgent(int input_dim, int num_actions, const HyperParams& hp, std::uint64_t seed, std::uint64_t agent_id)
    : hp_(hp),
      online_(layer_dims(input_dim, hp.hidden, num_actions)),
      optimizer_(hp.learning_rate, hp.rmsprop_decay, hp.rmsprop_epsilon),
      replay_(hp.replay_capacity),
      explore_rng_(make_stream(seed, "explore", {agent_id})),
      replay_rng_(make_stream(seed, "replay", {agent_id})) {
    RandomStream init = make_stream(seed, "init", {agent_id});
    online_.init_uniform(init);
    target_ = online_;
}

int DqnAgent::act(std::span<const double> obs, double epsilon) {
    return select_action(online_, obs, epsilon, explore_rng_);
}

double DqnAgent::train() {
    if (replay_.size() == 0) return 0.0;
    const std::vector<Transition> batch = replay_.sample(hp_.batch_size, replay_rng_);
    const double loss = train_step(online_, target_, batch, optimizer_, hp_.gamma);
    ++train_steps_;
    if (hp_.target_sync_interval > 0 && train_steps_ % hp_.target_sync_interval == 0) target_ = online_;
    return loss;
}

void DqnAgent::load(QNetwork net) {
    if (net.dims() != online_.dims()) throw std::invalid_argument("DqnAgent::load: network dimensions differ");
    online_ = std::move(net);
    target_ = online_;
}

}  // namespace urllc::dqn
