#include "urllc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace urllc::oracle {

std::vector<double> brute_force_sinr(std::span<const LeaderAction> actions, const ChannelSnapshot& gains,
                                     double noise_w) {
    const int n_leaders = static_cast<int>(actions.size());
    std::vector<double> out(actions.size());
    for (int n = 0; n < n_leaders; ++n) {
        const int m = actions[n].subband;
        const double p_n = std::pow(10.0, actions[n].power_dbm / 10.0) / 1000.0;
        double numerator = 0.0;
        for (int k = 0; k < gains.num_aps; ++k) {
            if (actions[n].aps.contains(k))
                numerator += p_n * gains.link(k, n).large_scale_linear * gains.link(k, n).small_scale_linear[m];
        }
        double denominator = noise_w;
        for (int i = 0; i < gains.num_aps; ++i) {
            for (int j = 0; j < n_leaders; ++j) {
                if (j == n) continue;
                const double rho = (actions[j].aps.contains(i) && actions[j].subband == m) ? 1.0 : 0.0;
                const double p_j = std::pow(10.0, actions[j].power_dbm / 10.0) / 1000.0;
                denominator += rho * p_j * gains.link(i, n).large_scale_linear * gains.link(i, n).small_scale_linear[m];
            }
        }
        out[n] = numerator / denominator;
    }
    return out;
}

std::vector<double> finite_difference_gradient(dqn::QNetwork net, const Eigen::MatrixXd& inputs,
                                               std::span<const int> actions, std::span<const double> targets,
                                               double step) {
    std::vector<double> out(net.parameter_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double& w = net.parameter(i);
        const double saved = w;
        w = saved + step;
        const double up = net.loss(inputs, actions, targets);
        w = saved - step;
        const double down = net.loss(inputs, actions, targets);
        w = saved;
        out[i] = (up - down) / (2.0 * step);
    }
    return out;
}

std::vector<double> flatten(const dqn::Gradients& grads) {
    std::vector<double> out;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        const Eigen::MatrixXd& w = grads.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
        }
        for (Eigen::Index r = 0; r < grads.biases[l].size(); ++r) out.push_back(grads.biases[l](r));
    }
    return out;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

double sum_rate(const baselines::SumRateProblem& pb, const std::vector<int>& choices) {
    const int n_p = static_cast<int>(pb.power_levels_dbm.size());
    const int n = static_cast<int>(choices.size());
    double total = 0.0;
    for (int a = 0; a < n; ++a) {
        const int m = choices[a] / n_p;
        const double sig = std::pow(10.0, pb.power_levels_dbm[choices[a] % n_p] / 10.0) / 1000.0 *
                           pb.gains->gain(pb.serving_ap[a], a, m);
        double den = pb.noise_w;
        for (int b = 0; b < n; ++b) {
            if (b == a || choices[b] / n_p != m) continue;
            den += std::pow(10.0, pb.power_levels_dbm[choices[b] % n_p] / 10.0) / 1000.0 *
                   pb.gains->gain(pb.serving_ap[b], a, m);
        }
        total += pb.bandwidth_hz * std::log2(1.0 + sig / den);
    }
    return total;
}

BruteForceOptimum brute_force_max_sum_rate(const baselines::SumRateProblem& pb) {
    const int n = static_cast<int>(pb.serving_ap.size());
    const int c = static_cast<int>(pb.choices_per_leader());
    BruteForceOptimum best{std::vector<int>(n, 0), -1.0};
    std::vector<int> cur(n, 0);
    std::function<void(int)> rec = [&](int depth) {
        if (depth == n) {
            const double v = sum_rate(pb, cur);
            if (v > best.sum_rate_bps) best = {cur, v};
            return;
        }
        for (int x = 0; x < c; ++x) {
            cur[depth] = x;
            rec(depth + 1);
        }
    };
    rec(0);
    return best;
}

ChannelSnapshot random_snapshot(int num_aps, int num_leaders, int num_subbands, RandomStream& rng) {
    ChannelSnapshot s;
    s.num_aps = num_aps;
    s.num_leaders = num_leaders;
    s.num_subbands = num_subbands;
    s.ap_leader.resize(static_cast<std::size_t>(num_aps) * num_leaders);
    for (auto& link : s.ap_leader) {
        // Path gain between -100 and -50 dB, unit-mean Rayleigh per sub-band.
        link.large_scale_linear = std::pow(10.0, -(50.0 + 50.0 * uniform01(rng)) / 10.0);
        link.small_scale_linear.resize(num_subbands);
        for (double& g : link.small_scale_linear) g = -std::log(uniform_open01(rng));
    }
    return s;
}

}  // namespace urllc::oracle
