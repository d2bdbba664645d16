#include "otfs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace otfs {

namespace {

double sample_pathloss(const SystemConfig& cfg, const ProfileConfig& profile, Rng& rng) {
    if (profile.pathloss_mode == PathlossMode::unit) return 1.0;
    // UT distance uniform in [exclusion, cell radius]; RMa-NLOS distance law
    // normalized to 1 at the cell edge.
    double d = rng.uniform(cfg.exclusion_radius_m, cfg.cell_radius_m);
    return std::pow(d / cfg.cell_radius_m, -profile.pathloss_exponent);
}

}  // namespace

ChannelParams sample_channel_params(const SystemConfig& cfg, const ProfileConfig& profile,
                                    uint64_t seed) {
    cfg.validate();
    profile.validate();

    Rng rng(seed);
    ChannelParams params;
    params.uts.resize(cfg.K);
    params.pathloss.resize(cfg.K);

    const int lmax = cfg.cp_len();
    const double zen_lo = profile.zenith_min_deg * kPi / 180.0;
    const double zen_hi = profile.zenith_max_deg * kPi / 180.0;

    // Distinct-angle bookkeeping across all UTs (exact float comparison; random
    // draws collide with probability zero, retries bound the degenerate case).
    std::set<std::pair<double, double>> used_angles;

    for (int s = 0; s < cfg.K; ++s) {
        params.pathloss[s] = sample_pathloss(cfg, profile, rng);
        auto& paths = params.uts[s];
        paths.resize(profile.num_paths);

        std::vector<double> weights(profile.num_paths);
        for (int i = 0; i < profile.num_paths; ++i) {
            Path& p = paths[i];
            double x = 1.0 - rng.uniform();  // (0, 1]
            p.tau = -profile.r_tau * profile.mu_tau * std::log(x);
            p.l_tau = std::clamp(static_cast<int>(std::floor(p.tau * cfg.M * cfg.delta_f + 0.5)),
                                 0, lmax);
            weights[i] =
                std::exp(-p.tau * (profile.r_tau - 1.0) / (profile.r_tau * profile.mu_tau));

            p.nu = profile.nu_max * std::cos(rng.uniform(0.0, 2.0 * kPi));

            int tries = 0;
            for (;;) {
                p.theta = rng.uniform(zen_lo, zen_hi);
                p.phi = rng.uniform(0.0, 2.0 * kPi);
                if (used_angles.insert({p.theta, p.phi}).second) break;
                if (++tries >= profile.angle_retry_limit)
                    throw std::runtime_error(
                        "sample_channel_params: could not draw distinct path angles");
            }
        }

        double wsum = 0.0;
        for (double w : weights) wsum += w;
        for (int i = 0; i < profile.num_paths; ++i) {
            paths[i].beta = weights[i] / wsum * params.pathloss[s];
            paths[i].g = rng.cgaussian(paths[i].beta);
        }
    }
    return params;
}

Complex antenna_path_gain(const ChannelParams& params, int q, int s, int i,
                          const SystemConfig& cfg) {
    require(s >= 0 && s < params.K(), "antenna_path_gain: UT index out of range");
    require(i >= 0 && i < static_cast<int>(params.uts[s].size()),
            "antenna_path_gain: path index out of range");
    require(q >= 1 && q <= cfg.Q(), "antenna_path_gain: antenna index out of range");

    const Path& p = params.uts[s][i];
    const int qh = (q - 1) % cfg.Qh;
    const int qv = (q - 1) / cfg.Qh;
    const double phase = 2.0 * kPi * cfg.d_over_lambda *
                         (qh * std::sin(p.phi) * std::sin(p.theta) + qv * std::cos(p.theta));
    return p.g * Complex(std::cos(phase), std::sin(phase));
}

Complex array_factor(double x, int Qdim) {
    const Complex w = std::exp(kJ * (2.0 * kPi * x));
    if (std::abs(1.0 - w) < 1e-12) return Complex(1.0, 0.0);  // x integer: all terms are 1
    return (1.0 - std::exp(kJ * (2.0 * kPi * x * Qdim))) / ((1.0 - w) * static_cast<double>(Qdim));
}

Complex sinc_pair_sum(const Path& a, const Path& b, int Qh, int Qv, double d_over_lambda) {
    const double bb = std::sin(a.phi) * std::sin(a.theta) - std::sin(b.phi) * std::sin(b.theta);
    const double cc = std::cos(a.theta) - std::cos(b.theta);
    return a.g * std::conj(b.g) * array_factor(d_over_lambda * bb, Qh) *
           array_factor(d_over_lambda * cc, Qv);
}

}  // namespace otfs
