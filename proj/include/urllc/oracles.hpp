#pragma once

// Independent reference computations used by the test suites and by the
// selfcheck command. They deliberately avoid the production code paths they
// are compared against.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "urllc/baselines.hpp"
#include "urllc/dqn.hpp"
#include "urllc/factory_env.hpp"

namespace urllc::oracle {

// Literal double sum over every AP i and every other leader j, with the
// reuse indicator rho_ij[m] = 1 when AP i serves j on sub-band m.
std::vector<double> brute_force_sinr(std::span<const LeaderAction> actions, const ChannelSnapshot& gains,
                                     double noise_w);

// Central differences of the network's MSE loss for every parameter, in
// QNetwork::parameter() order.
std::vector<double> finite_difference_gradient(dqn::QNetwork net, const Eigen::MatrixXd& inputs,
                                               std::span<const int> actions, std::span<const double> targets,
                                               double step = 1e-5);

// Analytic gradient flattened in the same order.
std::vector<double> flatten(const dqn::Gradients& grads);

// Worst relative error max|a-f| / max(|a|, |f|, floor) over all parameters.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor = 1e-6);

struct BruteForceOptimum {
    std::vector<int> choices;
    double sum_rate_bps = 0.0;
};

// Sum-rate of a choice profile computed by direct summation in linear units.
double sum_rate(const baselines::SumRateProblem& problem, const std::vector<int>& choices);

// Recursive enumeration of every profile.
BruteForceOptimum brute_force_max_sum_rate(const baselines::SumRateProblem& problem);

// Random channel snapshot with strictly positive gains, for oracle checks.
ChannelSnapshot random_snapshot(int num_aps, int num_leaders, int num_subbands, RandomStream& rng);

}  // namespace urllc::oracle
