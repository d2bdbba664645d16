#include "otfs/ofdm.hpp"

#include <cmath>

#include "otfs/detail/dft.hpp"
#include "otfs/rng.hpp"

namespace otfs {

using detail::dft;

// The antenna dimension collapses analytically: the signal reaching UT s along
// its path i depends on the transmit array only through
//   B_{(s,i),s'}[m] = sum_q h_{q,s,i} H*_{q,s'}[m]
//                   = Q sum_k pair(s,i; s',k) exp(j 2 pi m l_k / M),
// so the per-symbol simulation runs over K*sum(L) receive branches instead of
// Q antennas, with the URA sum in closed form.
OfdmResult ofdm_mrt_sum_se(const ChannelParams& params, const SystemConfig& cfg,
                           const OfdmConfig& ocfg, uint64_t symbol_seed) {
    cfg.validate();
    const int M = cfg.M;
    const int K = cfg.K;
    const int cp = cfg.cp_len();
    const int S = ocfg.symbols_per_frame > 0 ? ocfg.symbols_per_frame : cfg.N;
    require(ocfg.frames >= 1, "ofdm_mrt_sum_se: frames must be >= 1");

    const double Q = cfg.Q();
    const double eta_ofdm = Q * M * params.sum_beta();
    const double e_sym = cfg.E_T() / cfg.N;  // power-matched to the OTFS frame
    const double scale = std::sqrt(e_sym / eta_ofdm);

    // Branch bookkeeping: flat index over (s, i).
    std::vector<int> branch_ut, branch_path;
    for (int s = 0; s < K; ++s)
        for (int i = 0; i < static_cast<int>(params.uts[s].size()); ++i) {
            branch_ut.push_back(s);
            branch_path.push_back(i);
        }
    const int B = static_cast<int>(branch_ut.size());

    // Mixing matrices B[b][s'][m] and the t=0 signal response A_s[m].
    std::vector<std::vector<std::vector<Complex>>> mix(
        static_cast<size_t>(B),
        std::vector<std::vector<Complex>>(static_cast<size_t>(K),
                                          std::vector<Complex>(static_cast<size_t>(M))));
    for (int b = 0; b < B; ++b) {
        const Path& pi = params.uts[branch_ut[b]][branch_path[b]];
        for (int sp = 0; sp < K; ++sp) {
            for (int k = 0; k < static_cast<int>(params.uts[sp].size()); ++k) {
                const Path& pk = params.uts[sp][k];
                const Complex w =
                    Q * sinc_pair_sum(pi, pk, cfg.Qh, cfg.Qv, cfg.d_over_lambda);
                for (int m = 0; m < M; ++m)
                    mix[b][sp][m] += w * std::exp(kJ * (2.0 * kPi * m * pk.l_tau / M));
            }
        }
    }
    std::vector<std::vector<double>> resp(static_cast<size_t>(K),
                                          std::vector<double>(static_cast<size_t>(M), 0.0));
    for (int s = 0; s < K; ++s) {
        const auto& paths = params.uts[s];
        for (size_t i = 0; i < paths.size(); ++i)
            for (size_t k = 0; k < paths.size(); ++k) {
                const Complex w =
                    Q * sinc_pair_sum(paths[i], paths[k], cfg.Qh, cfg.Qv, cfg.d_over_lambda);
                for (int m = 0; m < M; ++m)
                    resp[s][m] += (w * std::exp(kJ * (2.0 * kPi * m *
                                                      (paths[k].l_tau - paths[i].l_tau) / M)))
                                      .real();
            }
    }

    Rng rng(symbol_seed);
    std::vector<std::vector<double>> interference(
        static_cast<size_t>(K), std::vector<double>(static_cast<size_t>(M), 0.0));
    long samples = 0;

    std::vector<std::vector<Complex>> u(static_cast<size_t>(K),
                                        std::vector<Complex>(static_cast<size_t>(M)));
    std::vector<Complex> V(static_cast<size_t>(M)), vb(static_cast<size_t>(M));
    std::vector<std::vector<Complex>> vblocks(static_cast<size_t>(B),
                                              std::vector<Complex>(static_cast<size_t>(M)));
    std::vector<Complex> yblock(static_cast<size_t>(M)), Y(static_cast<size_t>(M));

    for (int frame = 0; frame < ocfg.frames; ++frame) {
        for (int n = 0; n < S; ++n) {
            for (int s = 0; s < K; ++s)
                for (int m = 0; m < M; ++m) u[s][m] = rng.cgaussian(1.0);

            for (int b = 0; b < B; ++b) {
                for (int m = 0; m < M; ++m) {
                    Complex acc(0.0, 0.0);
                    for (int sp = 0; sp < K; ++sp) acc += mix[b][sp][m] * u[sp][m];
                    V[m] = scale * acc;
                }
                dft(M).backward(V.data(), vblocks[b].data());
            }

            const double t_useful = static_cast<double>(n) * (M + cp) + cp;
            for (int s = 0; s < K; ++s) {
                std::fill(yblock.begin(), yblock.end(), Complex(0.0, 0.0));
                for (int b = 0; b < B; ++b) {
                    if (branch_ut[b] != s) continue;
                    const Path& p = params.uts[s][branch_path[b]];
                    const double w = 2.0 * kPi * p.nu / (M * cfg.delta_f);
                    for (int pp = 0; pp < M; ++pp) {
                        const int src = (pp - p.l_tau + M) % M;  // CP makes the delay cyclic
                        const double ph = w * (t_useful + pp - p.l_tau);
                        yblock[pp] += vblocks[b][src] * Complex(std::cos(ph), std::sin(ph));
                    }
                }
                dft(M).forward(yblock.data(), Y.data());
                for (int m = 0; m < M; ++m) {
                    const Complex c0 = scale * resp[s][m];
                    const Complex dev = Y[m] / static_cast<double>(M) - c0 * u[s][m];
                    interference[s][m] += std::norm(dev);
                }
            }
            ++samples;
        }
    }

    OfdmResult out;
    out.per_ut.assign(static_cast<size_t>(K), 0.0);
    const double denom_bw = M * (1.0 + cfg.tau_max * cfg.delta_f);
    double int_ratio = 0.0;
    for (int s = 0; s < K; ++s) {
        for (int m = 0; m < M; ++m) {
            const double sig = scale * scale * resp[s][m] * resp[s][m];
            const double pint = interference[s][m] / samples;
            const double sinr = sig / (pint + cfg.N0);
            out.per_ut[s] += std::log2(1.0 + sinr) / denom_bw;
            int_ratio += sig > 0 ? pint / sig : 0.0;
        }
        out.sum_se += out.per_ut[s];
    }
    out.mean_interference_ratio = int_ratio / (static_cast<double>(K) * M);
    return out;
}

}  // namespace otfs
