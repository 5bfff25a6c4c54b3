#include "urllc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace urllc::channel {

void PathLossParams::validate() const {
    if (!(carrier_freq_ghz > 0.0)) throw std::invalid_argument("path loss: carrier_freq_ghz must be > 0");
    if (!(min_distance_m > 0.0)) throw std::invalid_argument("path loss: min_distance_m must be > 0");
}

void ShadowingParams::validate() const {
    if (!(std_db >= 0.0)) throw std::invalid_argument("shadowing: std_db must be >= 0");
}

void NoiseModel::validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise: bandwidth_hz must be > 0");
}

double LinkGain::composite_db(std::size_t subband) const { return linear_to_db(composite(subband)); }

double path_loss_db(const PathLossParams& p, double distance_m) {
    const double d = std::max(distance_m, p.min_distance_m);
    return p.a_coeff * std::log10(d) + p.b_coeff + p.c_coeff * std::log10(p.carrier_freq_ghz / 5.0);
}

double draw_shadowing_db(const ShadowingParams& params, RandomStream& rng) {
    // Box-Muller on two uniforms; the stream always advances by two draws.
    const double u1 = uniform_open01(rng);
    const double u2 = uniform01(rng);
    if (params.std_db == 0.0) return 0.0;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return params.std_db * z;
}

double draw_rayleigh_power(RandomStream& rng) {
    return -std::log(uniform_open01(rng));
}

double noise_power_dbm(const NoiseModel& m) {
    return m.psd_dbm_per_hz + 10.0 * std::log10(m.bandwidth_hz) + m.noise_figure_db;
}

LinkGain composite_link_gain(double pl_db, double shadow_db, std::vector<double> fading_linear) {
    if (!std::isfinite(pl_db) || !std::isfinite(shadow_db))
        throw std::invalid_argument("composite_link_gain: non-finite path loss or shadowing");
    for (double g : fading_linear) {
        if (!std::isfinite(g) || !(g > 0.0))
            throw std::invalid_argument("composite_link_gain: fading gains must be finite and positive");
    }
    LinkGain out;
    out.large_scale_linear = std::pow(10.0, -(pl_db + shadow_db) / 10.0);
    out.small_scale_linear = std::move(fading_linear);
    return out;
}

}  // namespace urllc::channel
