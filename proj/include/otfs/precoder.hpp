#pragma once

#include <utility>
#include <vector>

#include "otfs/dd_operator.hpp"

namespace otfs {

// Power normalization constant: Q*M*N*sum_{s,i} beta_{s,i}.
double precoder_eta(const ChannelParams& params, const SystemConfig& cfg);

struct PrecodedFrame {
    std::vector<DDGrid> x;  // one grid per antenna
    double E_T = 0.0;
    double eta = 0.0;
};

// All effective channels for one realization, indexed [q-1][s]; operators are
// shared per UT across antennas.
std::vector<std::vector<EffectiveChannel>> build_all_channels(const ChannelParams& params,
                                                              const SystemConfig& cfg);

// x_q = sqrt(E_T/eta) sum_s H_{q,s}^H u_s via sparse adjoint applications.
// If cmacs is given it accumulates the complex multiply-add count.
PrecodedFrame precode(const std::vector<DDGrid>& u,
                      const std::vector<std::vector<EffectiveChannel>>& channels, double E_T,
                      double eta, uint64_t* cmacs = nullptr);

// Monte-Carlo mean of the in-frame transmit energy sum_q ||x_q||^2 over fresh
// realizations and symbols, plus the CP-inclusive total using the analytic CP
// term E_T * tau_max/(NT).
std::pair<double, double> mean_frame_energy(const SystemConfig& cfg, const ProfileConfig& profile,
                                            int trials, uint64_t seed, int threads = 1);

}  // namespace otfs
