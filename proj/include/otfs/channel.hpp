#pragma once

#include <vector>

#include "otfs/config.hpp"
#include "otfs/rng.hpp"
#include "otfs/types.hpp"

namespace otfs {

struct Path {
    double theta = kPi / 2;  // zenith, rad
    double phi = 0.0;        // azimuth, rad
    double tau = 0.0;        // continuous delay, s (pre-quantization)
    int l_tau = 0;           // integer delay tap, round(tau*M*delta_f) clipped to the CP span
    double nu = 0.0;         // Doppler, Hz
    Complex g{0.0, 0.0};     // path gain
    double beta = 0.0;       // E|g|^2
};

// One realization of the random parameter set: per-UT path lists plus the
// per-UT large-scale gain (sum of betas).
struct ChannelParams {
    std::vector<std::vector<Path>> uts;
    std::vector<double> pathloss;  // per UT, 1.0 in unit mode

    int K() const { return static_cast<int>(uts.size()); }
    double sum_beta() const {
        double b = 0.0;
        for (const auto& ps : uts)
            for (const auto& p : ps) b += p.beta;
        return b;
    }
    double sum_g2(int s) const {
        double v = 0.0;
        for (const auto& p : uts[s]) v += std::norm(p.g);
        return v;
    }
};

// Draws one realization. Delays follow tau = -r_tau*mu_tau*log(X); per-path
// power weights go as exp(-tau (r_tau-1)/(r_tau mu_tau)) and are normalized so
// the betas of a UT sum to its pathloss. Doppler is nu_max*cos(alpha) with
// alpha uniform. Angle draws are resampled on exact collision so that no two
// paths (within or across UTs) share both zenith and azimuth.
ChannelParams sample_channel_params(const SystemConfig& cfg, const ProfileConfig& profile,
                                    uint64_t seed);

// Complex gain between antenna q (1-based) and path i of UT s: the path gain
// times the URA steering phase.
Complex antenna_path_gain(const ChannelParams& params, int q, int s, int i,
                          const SystemConfig& cfg);

// Closed form for (1/Q) sum_q h_{q,a} h*_{q,b} over the URA: the product of
// two normalized geometric sums (equivalently phased sinc ratios) in the
// horizontal and vertical array dimensions.
Complex sinc_pair_sum(const Path& a, const Path& b, int Qh, int Qv, double d_over_lambda);

// Normalized one-dimensional array factor (1/Qdim) sum_j exp(j 2 pi x j),
// evaluated as a geometric series with the integer-x limit handled exactly.
Complex array_factor(double x, int Qdim);

}  // namespace otfs
