#include "otfs/waveform.hpp"

#include <cmath>

#include "otfs/dd_operator.hpp"
#include "otfs/detail/dft.hpp"

namespace otfs {

using detail::dft;

TFGrid isfft(const DDGrid& x) {
    const int M = x.M, N = x.N;
    TFGrid X(M, N);
    std::vector<Complex> colin(N), colout(N), rowin(M), rowout(M);
    // X[n,m] = (1/sqrt(MN)) sum_{k,l} x[k,l] exp(j2pi(nk/N - ml/M))
    std::vector<Complex> mid(static_cast<size_t>(M) * N);  // [n, l]
    for (int l = 0; l < M; ++l) {
        for (int k = 0; k < N; ++k) colin[k] = x.at(k, l);
        dft(N).backward(colin.data(), colout.data());
        for (int n = 0; n < N; ++n) mid[static_cast<size_t>(n) * M + l] = colout[n];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(M) * N);
    for (int n = 0; n < N; ++n) {
        dft(M).forward(&mid[static_cast<size_t>(n) * M], rowout.data());
        for (int m = 0; m < M; ++m) X.at(n, m) = rowout[m] * scale;
    }
    return X;
}

DDGrid sfft(const TFGrid& Y) {
    const int M = Y.M, N = Y.N;
    DDGrid x(M, N);
    std::vector<Complex> colin(N), colout(N), rowout(M);
    std::vector<Complex> mid(static_cast<size_t>(M) * N);  // [k, m]
    // x[k,l] = (1/sqrt(MN)) sum_{n,m} Y[n,m] exp(-j2pi(nk/N - ml/M))
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) colin[n] = Y.at(n, m);
        dft(N).forward(colin.data(), colout.data());
        for (int k = 0; k < N; ++k) mid[static_cast<size_t>(k) * M + m] = colout[k];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(M) * N);
    for (int k = 0; k < N; ++k) {
        dft(M).backward(&mid[static_cast<size_t>(k) * M], rowout.data());
        for (int l = 0; l < M; ++l) x.at(k, l) = rowout[l] * scale;
    }
    return x;
}

TimeSignal heisenberg(const TFGrid& X, const SystemConfig& cfg) {
    const int M = X.M, N = X.N;
    require(M == cfg.M && N == cfg.N, "heisenberg: grid does not match config");
    const int cp = cfg.cp_len();
    TimeSignal out;
    out.cp_len = cp;
    out.s.assign(static_cast<size_t>(cp) + static_cast<size_t>(M) * N, Complex(0.0, 0.0));

    const double amp = 1.0 / std::sqrt(cfg.T());  // rectangular pulse amplitude
    std::vector<Complex> block(M);
    for (int n = 0; n < N; ++n) {
        dft(M).backward(&X.v[static_cast<size_t>(n) * M], block.data());
        for (int p = 0; p < M; ++p)
            out.s[static_cast<size_t>(cp) + static_cast<size_t>(n) * M + p] = amp * block[p];
    }
    // CP: the n = -1 term replays block N-1 over [-tau_max, 0).
    for (int j = 0; j < cp; ++j)
        out.s[j] = out.s[static_cast<size_t>(cp) + static_cast<size_t>(N - 1) * M + (M - cp) + j];
    return out;
}

TFGrid wigner(const TimeSignal& y, const SystemConfig& cfg) {
    const int M = cfg.M, N = cfg.N;
    require(static_cast<int>(y.s.size()) == y.cp_len + M * N,
            "wigner: unexpected signal length");
    TFGrid Y(M, N);
    // Riemann sum of the matched filter at spacing T/M; scaling chosen so that
    // wigner(heisenberg(X)) == X with no channel.
    const double scale = std::sqrt(cfg.T()) / M;
    std::vector<Complex> block(M), out(M);
    for (int n = 0; n < N; ++n) {
        for (int p = 0; p < M; ++p)
            block[p] = y.s[static_cast<size_t>(y.cp_len) + static_cast<size_t>(n) * M + p];
        dft(M).forward(block.data(), out.data());
        for (int m = 0; m < M; ++m) Y.at(n, m) = out[m] * scale;
    }
    return Y;
}

TimeSignal apply_dd_channel(const std::vector<TimeSignal>& x_q, const ChannelParams& params,
                            int s, const SystemConfig& cfg, Rng* noise) {
    require(s >= 0 && s < params.K(), "apply_dd_channel: UT index out of range");
    require(static_cast<int>(x_q.size()) == cfg.Q(), "apply_dd_channel: need one signal per antenna");
    const int cp = cfg.cp_len();
    const size_t len = static_cast<size_t>(cp) + static_cast<size_t>(cfg.M) * cfg.N;

    TimeSignal y;
    y.cp_len = cp;
    y.s.assign(len, Complex(0.0, 0.0));

    for (int q = 1; q <= cfg.Q(); ++q) {
        const auto& x = x_q[static_cast<size_t>(q) - 1];
        require(x.s.size() == len && x.cp_len == cp, "apply_dd_channel: signal length mismatch");
        for (int i = 0; i < static_cast<int>(params.uts[s].size()); ++i) {
            const Path& p = params.uts[s][i];
            require(p.l_tau <= cp, "apply_dd_channel: path delay exceeds CP length");
            const Complex h = antenna_path_gain(params, q, s, i, cfg);
            const double w = 2.0 * kPi * p.nu / (cfg.M * cfg.delta_f);
            for (size_t j = 0; j < len; ++j) {
                const long td = static_cast<long>(j) - p.l_tau;
                if (td < 0) continue;  // frame isolated in time
                // t - l_tau in samples, with t = j - cp_len.
                const double ph = w * (static_cast<double>(j) - cp - p.l_tau);
                y.s[j] += h * x.s[static_cast<size_t>(td)] * Complex(std::cos(ph), std::sin(ph));
            }
        }
    }

    if (noise) {
        const double var = cfg.N0 * cfg.M * cfg.delta_f;
        for (auto& v : y.s) v += noise->cgaussian(var);
    }
    return y;
}

double end_to_end_check(const ChannelParams& params, const SystemConfig& cfg,
                        const std::vector<DDGrid>& x_grids) {
    require(static_cast<int>(x_grids.size()) == cfg.Q(),
            "end_to_end_check: need one grid per antenna");
    std::vector<TimeSignal> tx(x_grids.size());
    for (size_t q = 0; q < x_grids.size(); ++q) tx[q] = heisenberg(isfft(x_grids[q]), cfg);

    double max_dev = 0.0;
    for (int s = 0; s < cfg.K; ++s) {
        DDGrid via_waveform = sfft(wigner(apply_dd_channel(tx, params, s, cfg, nullptr), cfg));

        DDGrid via_matrix(cfg.M, cfg.N);
        auto ops = build_ut_operators(params, s, cfg);
        for (int q = 1; q <= cfg.Q(); ++q) {
            DDGrid t = apply(effective_channel(params, q, s, cfg, ops),
                             x_grids[static_cast<size_t>(q) - 1]);
            for (int r = 0; r < t.size(); ++r) via_matrix[r] += t[r];
        }
        for (int r = 0; r < via_matrix.size(); ++r)
            max_dev = std::max(max_dev, std::abs(via_matrix[r] - via_waveform[r]));
    }
    return max_dev;
}

}  // namespace otfs
