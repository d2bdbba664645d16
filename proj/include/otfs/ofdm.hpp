#pragma once

#include <vector>

#include "otfs/channel.hpp"
#include "otfs/config.hpp"

namespace otfs {

// OFDM comparison system: M subcarriers at the same delta_f, one CP of
// tau_max per symbol, per-subcarrier MRT from the t=0 frequency response.
struct OfdmConfig {
    int symbols_per_frame = 0;  // 0: use N (matches the OTFS frame span)
    int frames = 32;            // Monte-Carlo frames per realization
};

struct OfdmResult {
    double sum_se = 0.0;
    std::vector<double> per_ut;
    // Interference-to-signal ratio averaged over (m, s); 0 for a static channel.
    double mean_interference_ratio = 0.0;
};

// Simulates the precoded downlink through the time-varying discrete channel
// (per-sample Doppler phases), measures per-subcarrier interference power
// empirically against the t=0 signal coefficient, and adds the noise
// analytically. SE = sum_{m,s} log2(1+SINR)/(M (1 + tau_max delta_f)).
OfdmResult ofdm_mrt_sum_se(const ChannelParams& params, const SystemConfig& cfg,
                           const OfdmConfig& ocfg, uint64_t symbol_seed);

}  // namespace otfs
