#pragma once

#include <vector>

#include "otfs/dd_operator.hpp"
#include "otfs/se_analysis.hpp"

namespace otfs {

// Uplink pilot placement: UT s pilots DDRE (k_s, l_s) with k_s = s-1 and
// l_s = (s-1)*floor(M/K); its pilot region spans the CP-length delay window
// after l_s. Regions of distinct UTs must be disjoint in delay.
struct PilotLayout {
    std::vector<int> k_s;
    std::vector<int> l_s;
    int span = 0;  // region delay extent: l - l_s in [0, span]
};

PilotLayout make_pilot_layout(const SystemConfig& cfg);

// One DD pilot grid per UT: sqrt(Ep) on the designated DDRE, zero elsewhere.
std::vector<DDGrid> make_pilot_frames(const SystemConfig& cfg);

// Per-antenna received uplink pilot grids through the sparse DD model,
// x_q = sqrt(Ep) sum_{s,i} h_{q,s,i} a~_{s,i} + w_q with w ~ CN(0, N0).
std::vector<DDGrid> receive_pilots(const ChannelParams& params, const SystemConfig& cfg,
                                   uint64_t noise_seed, bool add_noise = true);

// Same, taking the transmitted pilot frames explicitly; they must match the
// canonical single-DDRE layout (this is what pins the received-pilot columns).
std::vector<DDGrid> receive_pilots(const std::vector<DDGrid>& pilots,
                                   const ChannelParams& params, const SystemConfig& cfg,
                                   uint64_t noise_seed, bool add_noise = true);

// Received energy per delay tap of UT s's region, averaged over antennas.
// By default sums over all Doppler rows at each delay tap (fractional Doppler
// spreads the pilot across k); strict_k restricts to the region's own row.
std::vector<double> delay_energy_profile(const std::vector<DDGrid>& xhat,
                                         const PilotLayout& layout, int s,
                                         const SystemConfig& cfg, bool strict_k = false);

// Threshold detection: taps (offsets into the region) whose energy exceeds the
// threshold; default threshold is 4*N*N0, four times the noise-only mean.
std::vector<int> detect_paths(const std::vector<double>& profile, double threshold);

double default_detection_threshold(const SystemConfig& cfg);

// Doppler grid search at a detected tap: argmax over uniformly spaced points
// in [-nu_max, nu_max] of sum_q |a~(l, nu)^H xhat_q|^2.
double estimate_doppler(const std::vector<DDGrid>& xhat, const PilotLayout& layout, int s,
                        int tap, double nu_max, const SystemConfig& cfg);

// Per-antenna gains at (tap, nu): h~_q = a~(l, nu)^H xhat_q / sqrt(Ep).
std::vector<Complex> estimate_gains(const std::vector<DDGrid>& xhat, const PilotLayout& layout,
                                    int s, int tap, double nu, const SystemConfig& cfg);

struct EstimatedPath {
    int l_tau = 0;
    double nu = 0.0;
    std::vector<Complex> h;  // per antenna
};

struct ChannelEstimate {
    std::vector<std::vector<EstimatedPath>> uts;

    int detected_paths(int s) const { return static_cast<int>(uts[s].size()); }

    // Estimation report: per-UT detections (taps, Dopplers, mean gain power).
    nlohmann::json to_json() const;
};

// Full Appendix-style pipeline: detect taps, search Doppler, project gains.
ChannelEstimate estimate_channel(const std::vector<DDGrid>& xhat, double nu_max,
                                 const SystemConfig& cfg);

// Mixed Gram sum_q H_{q,s} H~^H_{q,s'} between the true channel and an
// estimate (the quantity that drives SE under estimated-CSI precoding).
MatrixXc gram_mixed(const ChannelParams& params, const ChannelEstimate& est,
                    const SystemConfig& cfg, int s, int s_prime);

// Normalized channel error sum_q ||H~ - H||_F^2 / sum_q ||H||_F^2.
double channel_nmse(const ChannelParams& params, const ChannelEstimate& est,
                    const SystemConfig& cfg);

// LCD SE evaluated with the BS precoding on the estimate while the physical
// channel stays true; eta follows the same ensemble convention as analyze_se.
SEReport analyze_se_estimated(const ChannelParams& params, const ChannelEstimate& est,
                              const SystemConfig& cfg, const SeOptions& opt = {});

}  // namespace otfs
