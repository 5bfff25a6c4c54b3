#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "urllc/random.hpp"

namespace urllc::channel {

// WINNER II A1 (indoor office) line-of-sight fit:
//   PL = a*log10(d) + b + c*log10(fc / 5 GHz), d clamped at min_distance_m.
struct PathLossParams {
    double carrier_freq_ghz = 3.0;
    double a_coeff = 18.7;
    double b_coeff = 46.8;
    double c_coeff = 20.0;
    double min_distance_m = 1.0;

    void validate() const;
};

struct ShadowingParams {
    double std_db = 3.0;

    void validate() const;
};

struct NoiseModel {
    double psd_dbm_per_hz = -169.0;
    double noise_figure_db = 5.0;
    double bandwidth_hz = 1e6;

    void validate() const;
};

// Large-scale gain L (path loss and shadowing) and per-sub-band small-scale
// power gains g[m], both linear.
struct LinkGain {
    double large_scale_linear = 1.0;
    std::vector<double> small_scale_linear;

    double composite(std::size_t subband) const { return large_scale_linear * small_scale_linear[subband]; }
    double composite_db(std::size_t subband) const;
};

double path_loss_db(const PathLossParams& params, double distance_m);

// Zero-mean Gaussian in dB.
double draw_shadowing_db(const ShadowingParams& params, RandomStream& rng);

// |h|^2 for h ~ CN(0, 1): a unit-mean exponential sample.
double draw_rayleigh_power(RandomStream& rng);

double noise_power_dbm(const NoiseModel& model);

// Throws std::invalid_argument on non-finite or non-positive inputs.
LinkGain composite_link_gain(double pl_db, double shadow_db, std::vector<double> fading_linear);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace urllc::channel
