#include "otfs/precoder.hpp"

#include <cmath>

#include "otfs/parallel.hpp"

namespace otfs {

double precoder_eta(const ChannelParams& params, const SystemConfig& cfg) {
    const double eta = cfg.Q() * static_cast<double>(cfg.mn()) * params.sum_beta();
    require(eta > 0, "precoder_eta: eta must be positive");
    return eta;
}

std::vector<std::vector<EffectiveChannel>> build_all_channels(const ChannelParams& params,
                                                              const SystemConfig& cfg) {
    std::vector<std::shared_ptr<const std::vector<SparseDDOperator>>> ops(cfg.K);
    for (int s = 0; s < cfg.K; ++s) ops[s] = build_ut_operators(params, s, cfg);

    std::vector<std::vector<EffectiveChannel>> ch(cfg.Q());
    for (int q = 1; q <= cfg.Q(); ++q) {
        ch[q - 1].reserve(cfg.K);
        for (int s = 0; s < cfg.K; ++s)
            ch[q - 1].push_back(effective_channel(params, q, s, cfg, ops[s]));
    }
    return ch;
}

PrecodedFrame precode(const std::vector<DDGrid>& u,
                      const std::vector<std::vector<EffectiveChannel>>& channels, double E_T,
                      double eta, uint64_t* cmacs) {
    require(!channels.empty(), "precode: no channels");
    const size_t K = channels[0].size();
    require(u.size() == K, "precode: symbol grids must match UT count");
    require(eta > 0 && E_T >= 0, "precode: bad energy parameters");
    for (const auto& g : u)
        for (const auto& v : g.v)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("precode: non-finite symbol input");

    const double scale = std::sqrt(E_T / eta);
    PrecodedFrame frame;
    frame.E_T = E_T;
    frame.eta = eta;
    frame.x.resize(channels.size());
    for (size_t q = 0; q < channels.size(); ++q) {
        require(channels[q].size() == K, "precode: missing channel");
        DDGrid acc(u[0].M, u[0].N);
        for (size_t s = 0; s < K; ++s) {
            DDGrid t = apply_adjoint(channels[q][s], u[s], cmacs);
            for (int r = 0; r < acc.size(); ++r) acc[r] += t[r];
        }
        for (auto& v : acc.v) v *= scale;
        frame.x[q] = std::move(acc);
    }
    return frame;
}

std::pair<double, double> mean_frame_energy(const SystemConfig& cfg, const ProfileConfig& profile,
                                            int trials, uint64_t seed, int threads) {
    require(trials >= 1, "mean_frame_energy: trials must be >= 1");
    std::vector<double> energy(static_cast<size_t>(trials), 0.0);
    parallel_for(static_cast<size_t>(trials), threads, [&](size_t t) {
        const uint64_t sub = substream_seed(seed, 0xe4e5, t);
        ChannelParams params = sample_channel_params(cfg, profile, sub);
        Rng rng(substream_seed(seed, 0x50f7, t));
        std::vector<DDGrid> u(cfg.K, DDGrid(cfg.M, cfg.N));
        for (auto& g : u)
            for (auto& v : g.v) v = rng.cgaussian(1.0);
        auto channels = build_all_channels(params, cfg);
        PrecodedFrame frame = precode(u, channels, cfg.E_T(), precoder_eta(params, cfg));
        double e = 0.0;
        for (const auto& x : frame.x) e += x.squared_norm();
        energy[t] = e;
    });
    double mean = 0.0;
    for (double e : energy) mean += e;
    mean /= trials;
    const double with_cp = mean + cfg.E_T() * cfg.tau_max * cfg.delta_f / cfg.N;
    return {mean, with_cp};
}

}  // namespace otfs
