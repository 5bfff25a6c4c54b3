#include "urllc/factory_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace urllc {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

int TimingConfig::phase1_slots() const { return static_cast<int>(std::lround(phase1_s / slot_s())); }
int TimingConfig::phase2_slots() const { return static_cast<int>(std::lround(phase2_s / slot_s())); }

void TimingConfig::validate() const {
    if (!(frame_s > 0.0) || !(phase1_s > 0.0) || !(phase2_s >= 0.0))
        throw std::invalid_argument("timing: durations must be positive");
    if (slots_per_frame <= 0) throw std::invalid_argument("timing: slots_per_frame must be positive");
    if (phase1_slots() <= 0) throw std::invalid_argument("timing: phase 1 shorter than one slot");
}

void EnvConfig::validate() const {
    if (!(floor_width_m > 0.0) || !(floor_height_m > 0.0))
        throw std::invalid_argument("topology: floor dimensions must be positive");
    if (ap_positions.empty()) throw std::invalid_argument("topology: at least one AP required");
    for (const Point& p : ap_positions) {
        if (p.x < 0.0 || p.x > floor_width_m || p.y < 0.0 || p.y > floor_height_m)
            throw std::invalid_argument("topology: AP position outside the floor");
    }
    if (num_clusters <= 0) throw std::invalid_argument("topology: num_clusters must be positive");
    if (members_per_cluster < 0) throw std::invalid_argument("topology: members_per_cluster must be >= 0");
    if (num_subbands < 0) throw std::invalid_argument("topology: num_subbands must be >= 0");
    if (!allow_subband_override) {
        if (num_clusters % 2 != 0)
            throw std::invalid_argument("topology: num_clusters must be even (M = N/2 regime)");
        if (num_subbands != 0 && num_subbands != num_clusters / 2)
            throw std::invalid_argument("topology: num_subbands must equal num_clusters / 2");
    }
    if (resolved_subbands() <= 0) throw std::invalid_argument("topology: no sub-bands");
    if (!(max_member_distance_m >= 0.0)) throw std::invalid_argument("topology: max_member_distance_m must be >= 0");
    if (2.0 * max_member_distance_m > floor_width_m || 2.0 * max_member_distance_m > floor_height_m)
        throw std::invalid_argument("topology: cluster disc does not fit on the floor");
    if (!(speed_mps >= 0.0)) throw std::invalid_argument("topology: speed_mps must be >= 0");
    if (power_levels_dbm.empty()) throw std::invalid_argument("power_levels_dbm: empty");
    for (double p : power_levels_dbm) {
        if (!std::isfinite(p)) throw std::invalid_argument("power_levels_dbm: non-finite level");
    }
    path_loss.validate();
    shadowing.validate();
    noise.validate();
    timing.validate();
}

std::vector<double> phase1_sinr(std::span<const LeaderAction> actions, const ChannelSnapshot& gains,
                                double noise_w) {
    const int n_leaders = gains.num_leaders;
    if (static_cast<int>(actions.size()) != n_leaders)
        throw std::invalid_argument("phase1_sinr: action count does not match leader count");

    std::vector<double> power_w(actions.size());
    for (std::size_t j = 0; j < actions.size(); ++j) power_w[j] = channel::dbm_to_watts(actions[j].power_dbm);

    std::vector<double> sinr(actions.size());
    for (int n = 0; n < n_leaders; ++n) {
        const LeaderAction& a = actions[n];
        const int m = a.subband;
        double signal = power_w[n] * gains.gain(a.aps.first, n, m);
        if (a.aps.second >= 0) signal += power_w[n] * gains.gain(a.aps.second, n, m);

        double interference = 0.0;
        for (int j = 0; j < n_leaders; ++j) {
            if (j == n || actions[j].subband != m) continue;
            interference += power_w[j] * gains.gain(actions[j].aps.first, n, m);
            if (actions[j].aps.second >= 0) interference += power_w[j] * gains.gain(actions[j].aps.second, n, m);
        }
        sinr[n] = signal / (interference + noise_w);
    }
    return sinr;
}

std::vector<double> interference_plus_noise(std::span<const LeaderAction> actions,
                                            const ChannelSnapshot& gains, double noise_w) {
    const int n_leaders = gains.num_leaders;
    const int n_sub = gains.num_subbands;
    std::vector<double> out(static_cast<std::size_t>(n_leaders) * n_sub, noise_w);
    for (int n = 0; n < n_leaders; ++n) {
        for (int j = 0; j < n_leaders; ++j) {
            if (j == n) continue;
            const LeaderAction& a = actions[j];
            const double p = channel::dbm_to_watts(a.power_dbm);
            double rx = p * gains.gain(a.aps.first, n, a.subband);
            if (a.aps.second >= 0) rx += p * gains.gain(a.aps.second, n, a.subband);
            out[n * n_sub + a.subband] += rx;
        }
    }
    return out;
}

double shannon_rate_bps(double bandwidth_hz, double sinr) { return bandwidth_hz * std::log2(1.0 + sinr); }

std::vector<Phase2Assignment> phase2_schedule(int num_clusters, int num_subbands, int phase2_slots) {
    if (num_subbands <= 0 || phase2_slots < 0 || num_clusters > phase2_slots * num_subbands)
        throw std::invalid_argument("phase2_schedule: infeasible, " + std::to_string(num_clusters) +
                                    " clusters do not fit in " + std::to_string(phase2_slots) + " slots x " +
                                    std::to_string(num_subbands) + " sub-bands");
    std::vector<Phase2Assignment> out(num_clusters);
    for (int c = 0; c < num_clusters; ++c) out[c] = {c / num_subbands, c % num_subbands};
    return out;
}

double delivery_fraction(const std::vector<bool>& leaders, const std::vector<bool>& members, bool members_only) {
    const auto ok_m = static_cast<std::size_t>(std::count(members.begin(), members.end(), true));
    if (members_only) return members.empty() ? 1.0 : static_cast<double>(ok_m) / static_cast<double>(members.size());
    const auto ok_l = static_cast<std::size_t>(std::count(leaders.begin(), leaders.end(), true));
    const std::size_t total = leaders.size() + members.size();
    return total == 0 ? 1.0 : static_cast<double>(ok_l + ok_m) / static_cast<double>(total);
}

FactoryEnv::FactoryEnv(EnvConfig config, std::uint64_t seed, std::string stream_label)
    : config_(std::move(config)), seed_(seed), label_(std::move(stream_label)) {
    config_.validate();
    subbands_ = config_.resolved_subbands();
    phase1_slots_ = config_.timing.phase1_slots();
    phase2_slots_ = config_.timing.phase2_slots();
    noise_w_ = channel::dbm_to_watts(channel::noise_power_dbm(config_.noise));

    const int n = config_.num_clusters;
    const int k = config_.num_aps();
    const int o = config_.members_per_cluster;
    clusters_.resize(n);
    remaining_.assign(n, 0.0);
    delivered_total_.assign(n, 0.0);
    remaining_at_phase1_end_.assign(n, 0.0);
    last_ipn_.assign(static_cast<std::size_t>(n) * subbands_, noise_w_);
    ap_large_scale_.assign(static_cast<std::size_t>(k) * n, 1.0);
    d2d_large_scale_.assign(static_cast<std::size_t>(n) * o, 1.0);
    snapshot_.num_aps = k;
    snapshot_.num_leaders = n;
    snapshot_.num_subbands = subbands_;
    snapshot_.ap_leader.resize(static_cast<std::size_t>(k) * n);
    d2d_.resize(static_cast<std::size_t>(n) * o);
}

bool FactoryEnv::disc_inside(Point p) const {
    const double d = config_.max_member_distance_m;
    return p.x - d >= 0.0 && p.x + d <= config_.floor_width_m && p.y - d >= 0.0 && p.y + d <= config_.floor_height_m;
}

void FactoryEnv::place_initial() {
    // Shared by every stream label so evaluation sees the training layout.
    RandomStream rng = make_stream(seed_, "placement");
    const double d = config_.max_member_distance_m;
    for (ClusterState& c : clusters_) {
        c.leader.x = d + uniform01(rng) * (config_.floor_width_m - 2.0 * d);
        c.leader.y = d + uniform01(rng) * (config_.floor_height_m - 2.0 * d);
        c.heading = static_cast<Heading>(uniform_index(rng, 4));
        c.speed_mps = config_.speed_mps;
    }
    placed_ = true;
}

void FactoryEnv::mobility_step(RandomStream& rng) {
    const double step = config_.speed_mps * config_.timing.frame_s;
    auto moved = [step](Point p, Heading h) {
        switch (h) {
            case Heading::north: p.y += step; break;
            case Heading::south: p.y -= step; break;
            case Heading::east: p.x += step; break;
            case Heading::west: p.x -= step; break;
        }
        return p;
    };
    for (ClusterState& c : clusters_) {
        auto h = static_cast<Heading>(uniform_index(rng, 4));
        if (!disc_inside(moved(c.leader, h))) {
            std::vector<Heading> valid;
            for (int i = 0; i < 4; ++i) {
                if (disc_inside(moved(c.leader, static_cast<Heading>(i)))) valid.push_back(static_cast<Heading>(i));
            }
            if (valid.empty()) continue;  // floor smaller than one step; stay put
            h = valid[uniform_index(rng, valid.size())];
        }
        c.heading = h;
        c.leader = moved(c.leader, h);
    }
}

void FactoryEnv::draw_members(RandomStream& rng) {
    const double d = config_.max_member_distance_m;
    for (ClusterState& c : clusters_) {
        c.members.resize(config_.members_per_cluster);
        for (Point& m : c.members) {
            const double r = d * std::sqrt(uniform01(rng));
            const double theta = 2.0 * std::numbers::pi * uniform01(rng);
            m = {c.leader.x + r * std::cos(theta), c.leader.y + r * std::sin(theta)};
        }
    }
}

void FactoryEnv::draw_large_scale(RandomStream& rng) {
    const int n = config_.num_clusters;
    const int o = config_.members_per_cluster;
    for (int k = 0; k < config_.num_aps(); ++k) {
        for (int j = 0; j < n; ++j) {
            const double pl = channel::path_loss_db(config_.path_loss, distance(config_.ap_positions[k], clusters_[j].leader));
            const double sh = channel::draw_shadowing_db(config_.shadowing, rng);
            ap_large_scale_[k * n + j] = std::pow(10.0, -(pl + sh) / 10.0);
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < o; ++m) {
            const double pl = channel::path_loss_db(config_.path_loss, distance(clusters_[j].leader, clusters_[j].members[m]));
            const double sh = channel::draw_shadowing_db(config_.shadowing, rng);
            d2d_large_scale_[j * o + m] = std::pow(10.0, -(pl + sh) / 10.0);
        }
    }
}

void FactoryEnv::draw_small_scale() {
    RandomStream rng = make_stream(seed_, label_ + "/fading",
                                   {static_cast<std::uint64_t>(episode_), static_cast<std::uint64_t>(slot_)});
    const int n = config_.num_clusters;
    for (int k = 0; k < config_.num_aps(); ++k) {
        for (int j = 0; j < n; ++j) {
            channel::LinkGain& g = snapshot_.ap_leader[k * n + j];
            g.large_scale_linear = ap_large_scale_[k * n + j];
            g.small_scale_linear.resize(subbands_);
            for (double& s : g.small_scale_linear) s = channel::draw_rayleigh_power(rng);
        }
    }
}

void FactoryEnv::reset_episode(std::int64_t episode, double payload_bytes, int num_slots) {
    if (payload_bytes < 0.0) throw std::invalid_argument("reset_episode: negative payload");
    const auto e = static_cast<std::uint64_t>(episode);
    if (!placed_) {
        place_initial();
    } else {
        RandomStream mob = make_stream(seed_, label_ + "/mobility", {e});
        mobility_step(mob);
    }
    RandomStream mem = make_stream(seed_, label_ + "/members", {e});
    draw_members(mem);
    RandomStream shadow = make_stream(seed_, label_ + "/shadowing", {e});
    draw_large_scale(shadow);

    episode_ = episode;
    slot_ = 0;
    episode_slots_ = num_slots > 0 ? num_slots : phase1_slots_;
    payload_bytes_ = payload_bytes;
    initial_bits_ = 8.0 * payload_bytes * (config_.members_per_cluster + 1);
    std::fill(remaining_.begin(), remaining_.end(), initial_bits_);
    std::fill(remaining_at_phase1_end_.begin(), remaining_at_phase1_end_.end(), initial_bits_);
    std::fill(delivered_total_.begin(), delivered_total_.end(), 0.0);
    std::fill(last_ipn_.begin(), last_ipn_.end(), noise_w_);
    phase2_.reset();
    draw_small_scale();
}

SlotOutcome FactoryEnv::phase1_step(std::span<const LeaderAction> actions) {
    if (episode_ < 0) throw std::logic_error("phase1_step: reset_episode has not been called");
    if (done()) throw std::logic_error("phase1_step: episode already finished");
    const int n = config_.num_clusters;
    if (static_cast<int>(actions.size()) != n)
        throw std::invalid_argument("phase1_step: expected " + std::to_string(n) + " actions, got " +
                                    std::to_string(actions.size()));
    for (const LeaderAction& a : actions) {
        const int k = config_.num_aps();
        if (a.aps.first < 0 || a.aps.first >= k || a.aps.second >= k || a.aps.second == a.aps.first ||
            a.aps.second < -1)
            throw std::invalid_argument("phase1_step: illegal AP subset");
        if (a.subband < 0 || a.subband >= subbands_) throw std::invalid_argument("phase1_step: sub-band out of range");
        if (std::find(config_.power_levels_dbm.begin(), config_.power_levels_dbm.end(), a.power_dbm) ==
            config_.power_levels_dbm.end())
            throw std::invalid_argument("phase1_step: power level not configured");
    }

    SlotOutcome out;
    out.num_subbands = subbands_;
    out.sinr = phase1_sinr(actions, snapshot_, noise_w_);
    out.interference_plus_noise = interference_plus_noise(actions, snapshot_, noise_w_);
    out.rate_bps.resize(n);
    out.delivered_bits.resize(n);
    out.remaining_before = remaining_;
    for (int j = 0; j < n; ++j) {
        out.rate_bps[j] = shannon_rate_bps(config_.noise.bandwidth_hz, out.sinr[j]);
        out.delivered_bits[j] = slot_seconds() * out.rate_bps[j];
        remaining_[j] -= out.delivered_bits[j];
        delivered_total_[j] += out.delivered_bits[j];
    }
    out.remaining_after = remaining_;
    last_ipn_ = out.interference_plus_noise;

    ++slot_;
    if (slot_ == std::min(phase1_slots_, episode_slots_)) remaining_at_phase1_end_ = remaining_;
    draw_small_scale();
    return out;
}

std::span<const double> FactoryEnv::last_interference(int leader) const {
    return std::span<const double>(last_ipn_).subspan(static_cast<std::size_t>(leader) * subbands_, subbands_);
}

Phase2Result FactoryEnv::run_phase2() {
    if (episode_ < 0 || slot_ < std::min(phase1_slots_, episode_slots_))
        throw std::logic_error("run_phase2: Phase I has not finished");
    const int n = config_.num_clusters;
    const int o = config_.members_per_cluster;
    const auto schedule = phase2_schedule(n, subbands_, phase2_slots_);

    const double p_w = channel::dbm_to_watts(config_.d2d_power_dbm);
    const double required = config_.member_needs_combined_payload ? initial_bits_ : 8.0 * payload_bytes_;

    // One fading draw per (phase-2 slot, cluster, member, sub-band).
    std::vector<std::vector<double>> fading(phase2_slots_);
    for (int s = 0; s < phase2_slots_; ++s) {
        RandomStream rng = make_stream(seed_, label_ + "/d2d_fading",
                                       {static_cast<std::uint64_t>(episode_), static_cast<std::uint64_t>(s)});
        fading[s].resize(static_cast<std::size_t>(n) * o * subbands_);
        for (double& g : fading[s]) g = channel::draw_rayleigh_power(rng);
    }

    Phase2Result res;
    res.sinr.resize(static_cast<std::size_t>(n) * o);
    res.rate_bps.resize(res.sinr.size());
    res.interference_w.assign(res.sinr.size(), 0.0);
    res.success.assign(res.sinr.size(), false);
    for (int c = 0; c < n; ++c) {
        const bool leader_ok = remaining_at_phase1_end_[c] <= 0.0;
        const Phase2Assignment slot = schedule[c];
        for (int m = 0; m < o; ++m) {
            const std::size_t idx = static_cast<std::size_t>(c) * o + m;
            channel::LinkGain& link = d2d_[idx];
            link.large_scale_linear = d2d_large_scale_[idx];
            const auto first = fading[slot.slot].begin() + static_cast<std::ptrdiff_t>(idx * subbands_);
            link.small_scale_linear.assign(first, first + subbands_);
            // Orthogonal schedule: nobody else transmits on this (slot, sub-band).
            res.sinr[idx] = p_w * link.composite(slot.subband) / (res.interference_w[idx] + noise_w_);
            res.rate_bps[idx] = shannon_rate_bps(config_.noise.bandwidth_hz, res.sinr[idx]);
            res.success[idx] = leader_ok && slot_seconds() * res.rate_bps[idx] >= required;
        }
    }
    phase2_ = res;
    return res;
}

DeliveryOutcome FactoryEnv::delivery_outcome() const {
    if (!phase2_) throw std::logic_error("delivery_outcome: Phase II has not run");
    DeliveryOutcome out;
    out.leader_success.resize(config_.num_clusters);
    for (int c = 0; c < config_.num_clusters; ++c) out.leader_success[c] = remaining_at_phase1_end_[c] <= 0.0;
    out.member_success = phase2_->success;
    out.probability = delivery_fraction(out.leader_success, out.member_success, config_.members_only_metric);
    out.leader_probability = delivery_fraction({}, out.leader_success, true);
    return out;
}

int nearest_ap(const std::vector<Point>& aps, Point p) {
    int best = 0;
    double best_d = distance(aps[0], p);
    for (int k = 1; k < static_cast<int>(aps.size()); ++k) {
        const double d = distance(aps[k], p);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

int FactoryEnv::nearest_ap(int leader) const { return urllc::nearest_ap(config_.ap_positions, clusters_[leader].leader); }

}  // namespace urllc
