#pragma once

#include <vector>

#include "otfs/channel.hpp"
#include "otfs/config.hpp"
#include "otfs/rng.hpp"
#include "otfs/types.hpp"

namespace otfs {

// Discrete-time frame at rate M*delta_f: cp_len CP samples followed by M*N
// frame samples. Sample j corresponds to t = (j - cp_len)/(M*delta_f).
struct TimeSignal {
    int cp_len = 0;
    std::vector<Complex> s;
};

// ISFFT / SFFT between the DD and TF grids, via fast transforms of sizes N and M.
TFGrid isfft(const DDGrid& x);
DDGrid sfft(const TFGrid& Y);

// Heisenberg transform with the rectangular pulse 1/sqrt(T) on [0, T), sampled
// at T/M, with the cyclic prefix taken from the tail of the last block.
TimeSignal heisenberg(const TFGrid& X, const SystemConfig& cfg);

// Wigner transform (matched filter + Riemann sum at the same grid), scaled so
// that a channel-free loopback is exact.
TFGrid wigner(const TimeSignal& y, const SystemConfig& cfg);

// y_s[t] = sum_q sum_i h_{q,s,i} x_q[t - l_tau] exp(j 2 pi nu (t - l_tau)/(M df)).
// Optional AWGN with per-sample variance N0*M*delta_f (so demodulated DD noise
// is i.i.d. CN(0, N0)).
TimeSignal apply_dd_channel(const std::vector<TimeSignal>& x_q, const ChannelParams& params,
                            int s, const SystemConfig& cfg, Rng* noise = nullptr);

// Runs modulate -> channel -> demodulate for every UT and compares against the
// sparse matrix model sum_q H_{q,s} x_q. Returns the max elementwise deviation.
double end_to_end_check(const ChannelParams& params, const SystemConfig& cfg,
                        const std::vector<DDGrid>& x_grids);

}  // namespace otfs
