#include "otfs/dd_operator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace otfs {

SparseDDOperator build_operator(int l_tau, double nu, int M, int N, double delta_f) {
    require(M >= 1 && N >= 1, "build_operator: M and N must be >= 1");
    require(l_tau >= 0 && l_tau < M, "build_operator: l_tau out of range");
    require(delta_f > 0, "build_operator: delta_f must be positive");

    SparseDDOperator op;
    op.M = M;
    op.N = N;
    op.l_tau = l_tau;
    op.nu = nu;
    op.delta_f = delta_f;
    op.nu_norm = nu / delta_f;

    op.dirichlet.resize(N);
    for (int dk = 0; dk < N; ++dk) {
        const double x = op.nu_norm - static_cast<double>(dk) / N;
        const Complex w = std::exp(kJ * (2.0 * kPi * x));
        if (std::abs(1.0 - w) < 1e-12) {
            op.dirichlet[dk] = Complex(1.0, 0.0);  // on-grid limit: sum equals N
        } else {
            op.dirichlet[dk] =
                (1.0 - std::exp(kJ * (2.0 * kPi * x * N))) / ((1.0 - w) * static_cast<double>(N));
        }
    }

    op.delay_phase.resize(M);
    for (int l = 0; l < M; ++l)
        op.delay_phase[l] = std::exp(kJ * (2.0 * kPi * l / M * op.nu_norm));

    op.wrap_phase.resize(N);
    for (int k = 0; k < N; ++k)
        op.wrap_phase[k] =
            std::exp(-kJ * (2.0 * kPi * (static_cast<double>(k) / N + op.nu_norm)));

    return op;
}

DDGrid apply(const SparseDDOperator& op, const DDGrid& x) {
    require(x.M == op.M && x.N == op.N, "apply: grid dimensions mismatch");
    DDGrid y(op.M, op.N);
    for (int lr = 0; lr < op.M; ++lr) {
        const int lc = op.col_delay(lr);
        const Complex dp = op.delay_phase[lc];
        const bool wr = op.wraps(lc);
        for (int kr = 0; kr < op.N; ++kr) {
            Complex acc(0.0, 0.0);
            for (int kc = 0; kc < op.N; ++kc) {
                Complex v = op.dirichlet[(kr - kc + op.N) % op.N];
                if (wr) v *= op.wrap_phase[kc];
                acc += v * x.at(kc, lc);
            }
            y.at(kr, lr) = acc * dp;
        }
    }
    return y;
}

DDGrid apply_adjoint(const SparseDDOperator& op, const DDGrid& x) {
    require(x.M == op.M && x.N == op.N, "apply_adjoint: grid dimensions mismatch");
    DDGrid y(op.M, op.N);
    for (int lc = 0; lc < op.M; ++lc) {
        const int lr = op.row_delay(lc);
        const Complex dpc = std::conj(op.delay_phase[lc]);
        const bool wr = op.wraps(lc);
        for (int kc = 0; kc < op.N; ++kc) {
            Complex acc(0.0, 0.0);
            for (int kr = 0; kr < op.N; ++kr)
                acc += std::conj(op.dirichlet[(kr - kc + op.N) % op.N]) * x.at(kr, lr);
            if (wr) acc *= std::conj(op.wrap_phase[kc]);
            y.at(kc, lc) = acc * dpc;
        }
    }
    return y;
}

MatrixXc dense(const SparseDDOperator& op) {
    const int MN = op.M * op.N;
    MatrixXc A = MatrixXc::Zero(MN, MN);
    for (int lc = 0; lc < op.M; ++lc) {
        const int lr = op.row_delay(lc);
        for (int kc = 0; kc < op.N; ++kc)
            for (int kr = 0; kr < op.N; ++kr)
                A(kr * op.M + lr, kc * op.M + lc) = op.entry(kr, kc, lc);
    }
    return A;
}

Complex frobenius_inner(const SparseDDOperator& a, const SparseDDOperator& b) {
    require(a.M == b.M && a.N == b.N, "frobenius_inner: dimensions mismatch");
    if (a.l_tau != b.l_tau) return Complex(0.0, 0.0);  // disjoint supports
    Complex total(0.0, 0.0);
    for (int lc = 0; lc < a.M; ++lc) {
        Complex col(0.0, 0.0);
        for (int kc = 0; kc < a.N; ++kc) {
            Complex dsum(0.0, 0.0);
            for (int kr = 0; kr < a.N; ++kr) {
                const int dk = (kr - kc + a.N) % a.N;
                dsum += a.dirichlet[dk] * std::conj(b.dirichlet[dk]);
            }
            if (a.wraps(lc)) dsum *= a.wrap_phase[kc] * std::conj(b.wrap_phase[kc]);
            col += dsum;
        }
        total += col * a.delay_phase[lc] * std::conj(b.delay_phase[lc]);
    }
    return total;
}

std::shared_ptr<const std::vector<SparseDDOperator>> build_ut_operators(
    const ChannelParams& params, int s, const SystemConfig& cfg) {
    require(s >= 0 && s < params.K(), "build_ut_operators: UT index out of range");
    auto ops = std::make_shared<std::vector<SparseDDOperator>>();
    ops->reserve(params.uts[s].size());
    for (const auto& p : params.uts[s])
        ops->push_back(build_operator(p.l_tau, p.nu, cfg.M, cfg.N, cfg.delta_f));
    return ops;
}

EffectiveChannel effective_channel(const ChannelParams& params, int q, int s,
                                   const SystemConfig& cfg,
                                   std::shared_ptr<const std::vector<SparseDDOperator>> ops) {
    EffectiveChannel ch;
    ch.ops = ops ? std::move(ops) : build_ut_operators(params, s, cfg);
    const int L = static_cast<int>(params.uts[s].size());
    ch.weights.resize(L);
    for (int i = 0; i < L; ++i) ch.weights[i] = antenna_path_gain(params, q, s, i, cfg);
    return ch;
}

DDGrid apply(const EffectiveChannel& ch, const DDGrid& x, uint64_t* cmacs) {
    DDGrid y(x.M, x.N);
    for (size_t i = 0; i < ch.weights.size(); ++i) {
        DDGrid t = apply((*ch.ops)[i], x);
        const Complex w = ch.weights[i];
        for (int r = 0; r < y.size(); ++r) y[r] += w * t[r];
        if (cmacs) *cmacs += static_cast<uint64_t>(x.size()) * x.N;
    }
    return y;
}

DDGrid apply_adjoint(const EffectiveChannel& ch, const DDGrid& x, uint64_t* cmacs) {
    DDGrid y(x.M, x.N);
    for (size_t i = 0; i < ch.weights.size(); ++i) {
        DDGrid t = apply_adjoint((*ch.ops)[i], x);
        const Complex w = std::conj(ch.weights[i]);
        for (int r = 0; r < y.size(); ++r) y[r] += w * t[r];
        if (cmacs) *cmacs += static_cast<uint64_t>(x.size()) * x.N;
    }
    return y;
}

MatrixXc dense(const EffectiveChannel& ch) {
    const auto& ops = *ch.ops;
    require(!ops.empty(), "dense: empty effective channel");
    MatrixXc H = MatrixXc::Zero(ops[0].M * ops[0].N, ops[0].M * ops[0].N);
    for (size_t i = 0; i < ch.weights.size(); ++i) H += ch.weights[i] * dense(ops[i]);
    return H;
}

void add_pair_product(MatrixXc& G, const SparseDDOperator& a, const SparseDDOperator& b,
                      Complex w) {
    const int M = a.M, N = a.N;
    require(b.M == M && b.N == N, "add_pair_product: dimensions mismatch");
    std::vector<Complex> prod(N);  // per-column phase products at fixed l_c
    for (int lr = 0; lr < M; ++lr) {
        const int lc = a.col_delay(lr);
        const int lp = b.row_delay(lc);
        const Complex phase = a.delay_phase[lc] * std::conj(b.delay_phase[lc]);
        const bool wa = a.wraps(lc), wb = b.wraps(lc);
        for (int kc = 0; kc < N; ++kc) {
            Complex v = phase;
            if (wa) v *= a.wrap_phase[kc];
            if (wb) v *= std::conj(b.wrap_phase[kc]);
            prod[kc] = v;
        }
        for (int kr = 0; kr < N; ++kr) {
            for (int kp = 0; kp < N; ++kp) {
                Complex acc(0.0, 0.0);
                for (int kc = 0; kc < N; ++kc)
                    acc += a.dirichlet[(kr - kc + N) % N] *
                           std::conj(b.dirichlet[(kp - kc + N) % N]) * prod[kc];
                G(kr * M + lr, kp * M + lp) += w * acc;
            }
        }
    }
}

MatrixXc gram(const ChannelParams& params, const SystemConfig& cfg, int s, int s_prime,
              GramMode mode) {
    require(s >= 0 && s < params.K() && s_prime >= 0 && s_prime < params.K(),
            "gram: UT index out of range");
    const int MN = cfg.mn();
    MatrixXc G = MatrixXc::Zero(MN, MN);

    if (mode == GramMode::direct) {
        auto ops_s = build_ut_operators(params, s, cfg);
        auto ops_p = build_ut_operators(params, s_prime, cfg);
        for (int q = 1; q <= cfg.Q(); ++q) {
            MatrixXc Hs = dense(effective_channel(params, q, s, cfg, ops_s));
            MatrixXc Hp = dense(effective_channel(params, q, s_prime, cfg, ops_p));
            G.noalias() += Hs * Hp.adjoint();
        }
        return G;
    }

    auto ops_s = build_ut_operators(params, s, cfg);
    auto ops_p = build_ut_operators(params, s_prime, cfg);
    const auto& ps = params.uts[s];
    const auto& pp = params.uts[s_prime];
    const double Q = cfg.Q();
    for (size_t i = 0; i < ps.size(); ++i) {
        for (size_t k = 0; k < pp.size(); ++k) {
            const Complex w =
                Q * sinc_pair_sum(ps[i], pp[k], cfg.Qh, cfg.Qv, cfg.d_over_lambda);
            add_pair_product(G, (*ops_s)[i], (*ops_p)[k], w);
        }
    }
    return G;
}

void dump_gram(const std::string& path, const MatrixXc& G, int M, int N, bool complex128) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_gram: cannot open " + path);
    const uint32_t header[4] = {static_cast<uint32_t>(M), static_cast<uint32_t>(N),
                                complex128 ? 1u : 0u, 0u};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    const int MN = M * N;
    if (complex128) {
        for (int r = 0; r < MN; ++r)
            for (int c = 0; c < MN; ++c) {
                const double re = G(r, c).real(), im = G(r, c).imag();
                out.write(reinterpret_cast<const char*>(&re), sizeof(double));
                out.write(reinterpret_cast<const char*>(&im), sizeof(double));
            }
    } else {
        for (int r = 0; r < MN; ++r)
            for (int c = 0; c < MN; ++c) {
                const float re = static_cast<float>(G(r, c).real());
                const float im = static_cast<float>(G(r, c).imag());
                out.write(reinterpret_cast<const char*>(&re), sizeof(float));
                out.write(reinterpret_cast<const char*>(&im), sizeof(float));
            }
    }
}

MatrixXc load_gram(const std::string& path, int& M, int& N) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_gram: cannot open " + path);
    uint32_t header[4];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    M = static_cast<int>(header[0]);
    N = static_cast<int>(header[1]);
    const bool complex128 = (header[2] & 1u) != 0;
    const int MN = M * N;
    MatrixXc G(MN, MN);
    for (int r = 0; r < MN; ++r)
        for (int c = 0; c < MN; ++c) {
            if (complex128) {
                double re, im;
                in.read(reinterpret_cast<char*>(&re), sizeof(double));
                in.read(reinterpret_cast<char*>(&im), sizeof(double));
                G(r, c) = Complex(re, im);
            } else {
                float re, im;
                in.read(reinterpret_cast<char*>(&re), sizeof(float));
                in.read(reinterpret_cast<char*>(&im), sizeof(float));
                G(r, c) = Complex(re, im);
            }
        }
    if (!in) throw std::runtime_error("load_gram: truncated file " + path);
    return G;
}

}  // namespace otfs
