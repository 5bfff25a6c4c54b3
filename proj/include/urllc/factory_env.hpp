#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urllc/channel.hpp"
#include "urllc/random.hpp"

namespace urllc {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

enum class Heading { north, south, east, west };

struct TimingConfig {
    double frame_s = 1e-3;        // T
    double phase1_s = 0.667e-3;   // T1
    double phase2_s = 0.333e-3;   // T2
    int slots_per_frame = 6;      // slot duration = frame_s / slots_per_frame

    double slot_s() const { return frame_s / slots_per_frame; }
    int phase1_slots() const;
    int phase2_slots() const;
    void validate() const;
};

struct EnvConfig {
    double floor_width_m = 40.0;
    double floor_height_m = 40.0;
    std::vector<Point> ap_positions{{10, 10}, {10, 30}, {30, 10}, {30, 30}};
    int num_clusters = 4;
    int members_per_cluster = 4;
    int num_subbands = 0;  // 0 selects num_clusters / 2
    double max_member_distance_m = 3.0;
    double speed_mps = 1.0;
    // Allows configurations outside the M = N/2 spectrum-sharing regime.
    bool allow_subband_override = false;

    channel::PathLossParams path_loss;
    channel::ShadowingParams shadowing;
    channel::NoiseModel noise;
    TimingConfig timing;

    std::vector<double> power_levels_dbm{-100, 20, 25, 30};
    double d2d_power_dbm = 20.0;
    // Members need the whole combined cluster payload when true, only their
    // own share otherwise.
    bool member_needs_combined_payload = true;
    // Delivery probability averages over members only when true.
    bool members_only_metric = false;

    int num_aps() const { return static_cast<int>(ap_positions.size()); }
    int resolved_subbands() const { return num_subbands > 0 ? num_subbands : num_clusters / 2; }
    // Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

struct ClusterState {
    Point leader;
    std::vector<Point> members;
    Heading heading = Heading::north;
    double speed_mps = 1.0;
};

// Up to two serving APs; second == -1 for single connectivity.
struct ApSubset {
    int first = 0;
    int second = -1;

    int size() const { return second < 0 ? 1 : 2; }
    bool contains(int ap) const { return ap == first || ap == second; }
    friend bool operator==(const ApSubset&, const ApSubset&) = default;
};

struct LeaderAction {
    ApSubset aps;
    int subband = 0;
    double power_dbm = 0.0;

    friend bool operator==(const LeaderAction&, const LeaderAction&) = default;
};

// AP->leader link gains of one slot. ap_leader is indexed [ap * num_leaders + leader].
struct ChannelSnapshot {
    int num_aps = 0;
    int num_leaders = 0;
    int num_subbands = 0;
    std::vector<channel::LinkGain> ap_leader;

    const channel::LinkGain& link(int ap, int leader) const { return ap_leader[ap * num_leaders + leader]; }
    double gain(int ap, int leader, int subband) const { return link(ap, leader).composite(subband); }
};

struct SlotOutcome {
    std::vector<double> sinr;
    std::vector<double> rate_bps;
    std::vector<double> delivered_bits;
    std::vector<double> remaining_before;
    std::vector<double> remaining_after;
    // [leader * M + subband], watts
    std::vector<double> interference_plus_noise;
    int num_subbands = 0;

    double ipn(int leader, int subband) const { return interference_plus_noise[leader * num_subbands + subband]; }
};

struct Phase2Assignment {
    int slot = 0;
    int subband = 0;
    friend bool operator==(const Phase2Assignment&, const Phase2Assignment&) = default;
};

struct Phase2Result {
    // [cluster * O + member]
    std::vector<double> sinr;
    std::vector<double> rate_bps;
    std::vector<double> interference_w;
    std::vector<bool> success;
};

struct DeliveryOutcome {
    std::vector<bool> leader_success;
    std::vector<bool> member_success;  // [cluster * O + member]
    double probability = 0.0;          // over robots selected by the metric switch
    double leader_probability = 0.0;
};

// SINR for every leader: serving powers add coherently over
// the leader's AP subset; every AP link serving another leader on the same
// sub-band counts as interference through that AP's link to this leader.
std::vector<double> phase1_sinr(std::span<const LeaderAction> actions, const ChannelSnapshot& gains,
                                double noise_w);

// Interference plus noise seen by every leader on every sub-band, [n * M + m].
std::vector<double> interference_plus_noise(std::span<const LeaderAction> actions,
                                            const ChannelSnapshot& gains, double noise_w);

double shannon_rate_bps(double bandwidth_hz, double sinr);

// Row-major over (slot, sub-band). Throws std::invalid_argument when the grid is too small.
std::vector<Phase2Assignment> phase2_schedule(int num_clusters, int num_subbands, int phase2_slots);

// Euclidean nearest AP, lowest index on ties.
int nearest_ap(const std::vector<Point>& aps, Point p);

// Fraction of robots delivered, given per-leader and per-member success.
double delivery_fraction(const std::vector<bool>& leaders, const std::vector<bool>& members, bool members_only);

class FactoryEnv {
public:
    // stream_label separates training and evaluation realizations that share a seed.
    FactoryEnv(EnvConfig config, std::uint64_t seed, std::string stream_label = "train");

    // Mobility step (uniform placement on the first call), member redraw,
    // shadowing redraw, ledger reset and fresh small-scale fading for slot 0.
    // num_slots == 0 uses the Phase-I slot count.
    void reset_episode(std::int64_t episode, double payload_bytes, int num_slots = 0);

    // Throws std::invalid_argument on a wrong action count or illegal action,
    // std::logic_error when the episode has no slots left.
    SlotOutcome phase1_step(std::span<const LeaderAction> actions);

    // Orthogonal leader->member broadcast. Requires all Phase-I slots to have run.
    Phase2Result run_phase2();

    DeliveryOutcome delivery_outcome() const;

    const EnvConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    int num_leaders() const { return config_.num_clusters; }
    int num_aps() const { return config_.num_aps(); }
    int num_subbands() const { return subbands_; }
    int phase1_slots() const { return phase1_slots_; }
    int phase2_slots() const { return phase2_slots_; }
    int episode_slots() const { return episode_slots_; }
    int slot() const { return slot_; }
    bool done() const { return slot_ >= episode_slots_; }
    std::int64_t episode() const { return episode_; }

    double noise_watts() const { return noise_w_; }
    double slot_seconds() const { return config_.timing.slot_s(); }
    double initial_bits() const { return initial_bits_; }
    double remaining_bits(int leader) const { return remaining_[leader]; }
    double delivered_total(int leader) const { return delivered_total_[leader]; }
    // Interference plus noise measured on every sub-band during the previous
    // slot (noise only before the first slot), watts.
    std::span<const double> last_interference(int leader) const;

    const ChannelSnapshot& gains() const { return snapshot_; }
    const std::vector<ClusterState>& clusters() const { return clusters_; }
    // D2D leader->member gains, indexed [cluster * O + member].
    const std::vector<channel::LinkGain>& d2d_gains() const { return d2d_; }

    int nearest_ap(int leader) const;

private:
    void place_initial();
    void mobility_step(RandomStream& rng);
    void draw_members(RandomStream& rng);
    void draw_large_scale(RandomStream& rng);
    void draw_small_scale();
    bool disc_inside(Point p) const;

    EnvConfig config_;
    std::uint64_t seed_;
    std::string label_;
    int subbands_;
    int phase1_slots_;
    int phase2_slots_;
    double noise_w_;

    std::vector<ClusterState> clusters_;
    bool placed_ = false;
    std::int64_t episode_ = -1;
    int slot_ = 0;
    int episode_slots_ = 0;
    double initial_bits_ = 0.0;
    double payload_bytes_ = 0.0;
    std::vector<double> remaining_;
    std::vector<double> delivered_total_;
    std::vector<double> remaining_at_phase1_end_;
    std::vector<double> last_ipn_;

    std::vector<double> ap_large_scale_;  // [ap * N + leader]
    std::vector<double> d2d_large_scale_; // [cluster * O + member]
    ChannelSnapshot snapshot_;
    std::vector<channel::LinkGain> d2d_;
    std::optional<Phase2Result> phase2_;
};

}  // namespace urllc
