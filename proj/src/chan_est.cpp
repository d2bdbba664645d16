#include "otfs/chan_est.hpp"

#include <cmath>

#include "otfs/precoder.hpp"

namespace otfs {

PilotLayout make_pilot_layout(const SystemConfig& cfg) {
    PilotLayout layout;
    layout.span = cfg.cp_len();
    const int spacing = cfg.M / cfg.K;
    if (spacing <= layout.span)
        throw std::invalid_argument(
            "make_pilot_layout: pilot regions overlap (floor(M/K) must exceed the delay span)");
    layout.k_s.resize(cfg.K);
    layout.l_s.resize(cfg.K);
    for (int s = 0; s < cfg.K; ++s) {
        layout.k_s[s] = s % cfg.N;
        layout.l_s[s] = s * spacing;
    }
    return layout;
}

std::vector<DDGrid> make_pilot_frames(const SystemConfig& cfg) {
    const PilotLayout layout = make_pilot_layout(cfg);
    std::vector<DDGrid> pilots(static_cast<size_t>(cfg.K), DDGrid(cfg.M, cfg.N));
    for (int s = 0; s < cfg.K; ++s)
        pilots[s].at(layout.k_s[s], layout.l_s[s]) = std::sqrt(cfg.Ep);
    return pilots;
}

std::vector<DDGrid> receive_pilots(const std::vector<DDGrid>& pilots,
                                   const ChannelParams& params, const SystemConfig& cfg,
                                   uint64_t noise_seed, bool add_noise) {
    const PilotLayout layout = make_pilot_layout(cfg);
    require(static_cast<int>(pilots.size()) == cfg.K, "receive_pilots: one pilot frame per UT");
    const double amp = std::sqrt(cfg.Ep);
    for (int s = 0; s < cfg.K; ++s) {
        const DDGrid& g = pilots[static_cast<size_t>(s)];
        require(g.M == cfg.M && g.N == cfg.N, "receive_pilots: pilot grid dimension mismatch");
        for (int k = 0; k < cfg.N; ++k)
            for (int l = 0; l < cfg.M; ++l) {
                const Complex want = (k == layout.k_s[s] && l == layout.l_s[s])
                                         ? Complex(amp, 0.0)
                                         : Complex(0.0, 0.0);
                require(g.at(k, l) == want,
                        "receive_pilots: pilot frame does not match the designated layout");
            }
    }
    return receive_pilots(params, cfg, noise_seed, add_noise);
}

std::vector<DDGrid> receive_pilots(const ChannelParams& params, const SystemConfig& cfg,
                                   uint64_t noise_seed, bool add_noise) {
    const PilotLayout layout = make_pilot_layout(cfg);
    const double amp = std::sqrt(cfg.Ep);
    std::vector<DDGrid> xhat(static_cast<size_t>(cfg.Q()), DDGrid(cfg.M, cfg.N));

    std::vector<std::shared_ptr<const std::vector<SparseDDOperator>>> ops(cfg.K);
    for (int s = 0; s < cfg.K; ++s) ops[s] = build_ut_operators(params, s, cfg);

    for (int q = 1; q <= cfg.Q(); ++q) {
        DDGrid& g = xhat[static_cast<size_t>(q) - 1];
        for (int s = 0; s < cfg.K; ++s) {
            const int kc = layout.k_s[s], lc = layout.l_s[s];
            for (size_t i = 0; i < params.uts[s].size(); ++i) {
                const SparseDDOperator& A = (*ops[s])[i];
                const Complex ha = amp * antenna_path_gain(params, q, s, static_cast<int>(i), cfg);
                const int lrow = A.row_delay(lc);
                for (int k = 0; k < cfg.N; ++k) g.at(k, lrow) += ha * A.entry(k, kc, lc);
            }
        }
        if (add_noise) {
            Rng rng(substream_seed(noise_seed, 0x9017, static_cast<uint64_t>(q)));
            for (auto& v : g.v) v += rng.cgaussian(cfg.N0);
        }
    }
    return xhat;
}

std::vector<double> delay_energy_profile(const std::vector<DDGrid>& xhat,
                                         const PilotLayout& layout, int s,
                                         const SystemConfig& cfg, bool strict_k) {
    require(s >= 0 && s < cfg.K, "delay_energy_profile: UT index out of range");
    std::vector<double> profile(static_cast<size_t>(layout.span) + 1, 0.0);
    for (int d = 0; d <= layout.span; ++d) {
        const int l = layout.l_s[s] + d;
        double e = 0.0;
        for (const auto& g : xhat) {
            if (strict_k) {
                e += std::norm(g.at(layout.k_s[s], l));
            } else {
                for (int k = 0; k < cfg.N; ++k) e += std::norm(g.at(k, l));
            }
        }
        profile[static_cast<size_t>(d)] = e / cfg.Q();
    }
    return profile;
}

std::vector<int> detect_paths(const std::vector<double>& profile, double threshold) {
    std::vector<int> taps;
    for (size_t d = 0; d < profile.size(); ++d)
        if (profile[d] > threshold) taps.push_back(static_cast<int>(d));
    return taps;
}

double default_detection_threshold(const SystemConfig& cfg) { return 4.0 * cfg.N * cfg.N0; }

namespace {

// Atom values over Doppler rows for the pilot column (k_s, l_s) of A(l, nu).
void pilot_atom(const SparseDDOperator& A, int k_s, int l_s, std::vector<Complex>& a) {
    a.resize(static_cast<size_t>(A.N));
    for (int k = 0; k < A.N; ++k) a[static_cast<size_t>(k)] = A.entry(k, k_s, l_s);
}

}  // namespace

double estimate_doppler(const std::vector<DDGrid>& xhat, const PilotLayout& layout, int s,
                        int tap, double nu_max, const SystemConfig& cfg) {
    require(tap >= 0 && tap <= layout.span, "estimate_doppler: tap outside pilot region");
    if (nu_max <= 0.0) return 0.0;

    const int lrow = layout.l_s[s] + tap;
    const int N = cfg.N;
    // Sample covariance over antennas of the N Doppler-row values at the tap;
    // the grid objective is then a quadratic form, independent of Q.
    MatrixXc R = MatrixXc::Zero(N, N);
    for (const auto& g : xhat) {
        Eigen::VectorXcd y(N);
        for (int k = 0; k < N; ++k) y(k) = g.at(k, lrow);
        R.noalias() += y * y.adjoint();
    }

    const int P = std::max(2, cfg.doppler_grid_points);
    std::vector<Complex> a;
    double best_obj = -1.0, best_nu = -nu_max;
    for (int j = 0; j < P; ++j) {
        const double nu = -nu_max + 2.0 * nu_max * j / (P - 1);
        const SparseDDOperator A = build_operator(tap, nu, cfg.M, cfg.N, cfg.delta_f);
        pilot_atom(A, layout.k_s[s], layout.l_s[s], a);
        Complex acc(0.0, 0.0);
        for (int k1 = 0; k1 < N; ++k1)
            for (int k2 = 0; k2 < N; ++k2)
                acc += std::conj(a[static_cast<size_t>(k1)]) * R(k1, k2) *
                       a[static_cast<size_t>(k2)];
        if (acc.real() > best_obj) {
            best_obj = acc.real();
            best_nu = nu;
        }
    }
    return best_nu;
}

std::vector<Complex> estimate_gains(const std::vector<DDGrid>& xhat, const PilotLayout& layout,
                                    int s, int tap, double nu, const SystemConfig& cfg) {
    require(cfg.Ep > 0, "estimate_gains: pilot energy must be positive");
    const int lrow = layout.l_s[s] + tap;
    const SparseDDOperator A = build_operator(tap, nu, cfg.M, cfg.N, cfg.delta_f);
    std::vector<Complex> a;
    pilot_atom(A, layout.k_s[s], layout.l_s[s], a);

    const double inv_amp = 1.0 / std::sqrt(cfg.Ep);
    std::vector<Complex> h(xhat.size());
    for (size_t q = 0; q < xhat.size(); ++q) {
        Complex acc(0.0, 0.0);
        for (int k = 0; k < cfg.N; ++k)
            acc += std::conj(a[static_cast<size_t>(k)]) * xhat[q].at(k, lrow);
        h[q] = inv_amp * acc;
    }
    return h;
}

ChannelEstimate estimate_channel(const std::vector<DDGrid>& xhat, double nu_max,
                                 const SystemConfig& cfg) {
    const PilotLayout layout = make_pilot_layout(cfg);
    const double threshold = default_detection_threshold(cfg);

    ChannelEstimate est;
    est.uts.resize(static_cast<size_t>(cfg.K));
    for (int s = 0; s < cfg.K; ++s) {
        const auto profile = delay_energy_profile(xhat, layout, s, cfg);
        for (int tap : detect_paths(profile, threshold)) {
            EstimatedPath p;
            p.l_tau = tap;
            p.nu = estimate_doppler(xhat, layout, s, tap, nu_max, cfg);
            p.h = estimate_gains(xhat, layout, s, tap, p.nu, cfg);
            est.uts[static_cast<size_t>(s)].push_back(std::move(p));
        }
    }
    return est;
}

nlohmann::json ChannelEstimate::to_json() const {
    nlohmann::json j;
    j["ut"] = nlohmann::json::array();
    for (const auto& paths : uts) {
        nlohmann::json ju;
        ju["detected_paths"] = paths.size();
        ju["delay_taps"] = nlohmann::json::array();
        ju["doppler_hz"] = nlohmann::json::array();
        ju["mean_gain_power"] = nlohmann::json::array();
        for (const auto& p : paths) {
            ju["delay_taps"].push_back(p.l_tau);
            ju["doppler_hz"].push_back(p.nu);
            double g2 = 0.0;
            for (const auto& h : p.h) g2 += std::norm(h);
            ju["mean_gain_power"].push_back(p.h.empty() ? 0.0 : g2 / p.h.size());
        }
        j["ut"].push_back(std::move(ju));
    }
    return j;
}

namespace {

std::vector<SparseDDOperator> estimate_operators(const ChannelEstimate& est, int s,
                                                 const SystemConfig& cfg) {
    std::vector<SparseDDOperator> ops;
    ops.reserve(est.uts[static_cast<size_t>(s)].size());
    for (const auto& p : est.uts[static_cast<size_t>(s)])
        ops.push_back(build_operator(p.l_tau, p.nu, cfg.M, cfg.N, cfg.delta_f));
    return ops;
}

}  // namespace

MatrixXc gram_mixed(const ChannelParams& params, const ChannelEstimate& est,
                    const SystemConfig& cfg, int s, int s_prime) {
    const int MN = cfg.mn();
    MatrixXc G = MatrixXc::Zero(MN, MN);
    auto ops_true = build_ut_operators(params, s, cfg);
    auto ops_est = estimate_operators(est, s_prime, cfg);
    const auto& est_paths = est.uts[static_cast<size_t>(s_prime)];

    for (size_t i = 0; i < params.uts[s].size(); ++i) {
        for (size_t k = 0; k < est_paths.size(); ++k) {
            Complex w(0.0, 0.0);
            for (int q = 1; q <= cfg.Q(); ++q)
                w += antenna_path_gain(params, q, s, static_cast<int>(i), cfg) *
                     std::conj(est_paths[k].h[static_cast<size_t>(q) - 1]);
            add_pair_product(G, (*ops_true)[i], ops_est[k], w);
        }
    }
    return G;
}

double channel_nmse(const ChannelParams& params, const ChannelEstimate& est,
                    const SystemConfig& cfg) {
    // ||H~ - H||_F^2 expanded through Frobenius inner products of the path
    // operators (nonzero only at equal delays), so no dense channel is formed.
    double err = 0.0, ref = 0.0;
    for (int s = 0; s < cfg.K; ++s) {
        auto ops_true = build_ut_operators(params, s, cfg);
        auto ops_est = estimate_operators(est, s, cfg);
        const auto& tp = params.uts[s];
        const auto& ep = est.uts[static_cast<size_t>(s)];
        const size_t Lt = tp.size(), Le = ep.size();

        MatrixXc Ttt(Lt, Lt), Tte(Lt, Le), Tee(Le, Le);
        for (size_t i = 0; i < Lt; ++i)
            for (size_t i2 = 0; i2 < Lt; ++i2)
                Ttt(i, i2) = frobenius_inner((*ops_true)[i], (*ops_true)[i2]);
        for (size_t i = 0; i < Lt; ++i)
            for (size_t k = 0; k < Le; ++k)
                Tte(i, k) = frobenius_inner((*ops_true)[i], ops_est[k]);
        for (size_t k = 0; k < Le; ++k)
            for (size_t k2 = 0; k2 < Le; ++k2)
                Tee(k, k2) = frobenius_inner(ops_est[k], ops_est[k2]);

        for (int q = 1; q <= cfg.Q(); ++q) {
            std::vector<Complex> ht(Lt);
            for (size_t i = 0; i < Lt; ++i)
                ht[i] = antenna_path_gain(params, q, s, static_cast<int>(i), cfg);
            for (size_t i = 0; i < Lt; ++i)
                for (size_t i2 = 0; i2 < Lt; ++i2) {
                    const double v = (ht[i] * std::conj(ht[i2]) * Ttt(i, i2)).real();
                    err += v;
                    ref += v;
                }
            for (size_t i = 0; i < Lt; ++i)
                for (size_t k = 0; k < Le; ++k)
                    err -= 2.0 * (ht[i] * std::conj(ep[k].h[static_cast<size_t>(q) - 1]) *
                                  Tte(i, k))
                                     .real();
            for (size_t k = 0; k < Le; ++k)
                for (size_t k2 = 0; k2 < Le; ++k2)
                    err += (ep[k].h[static_cast<size_t>(q) - 1] *
                            std::conj(ep[k2].h[static_cast<size_t>(q) - 1]) * Tee(k, k2))
                               .real();
        }
    }
    require(ref > 0, "channel_nmse: zero reference channel energy");
    return err / ref;
}

SEReport analyze_se_estimated(const ChannelParams& params, const ChannelEstimate& est,
                              const SystemConfig& cfg, const SeOptions& opt) {
    const double eta = precoder_eta(params, cfg);
    auto source = [&](int s, int sp) { return gram_mixed(params, est, cfg, s, sp); };
    SEReport rep = analyze_se_from(source, eta, cfg.K, large_q_rate(params, cfg), cfg, opt);
    rep.system = "otfs_estimated_csi";
    return rep;
}

}  // namespace otfs
