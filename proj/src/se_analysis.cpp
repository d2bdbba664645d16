#include "otfs/se_analysis.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "otfs/precoder.hpp"

namespace otfs {

nlohmann::json SEReport::to_json(bool with_terms) const {
    nlohmann::json j;
    j["system"] = system;
    j["overhead"] = overhead;
    j["sum_lcd"] = sum_lcd;
    if (sum_mmse_sic)
        j["sum_mmse_sic"] = *sum_mmse_sic;
    else
        j["sum_mmse_sic"] = nullptr;
    j["sum_large_q"] = sum_large_q;
    j["ut"] = nlohmann::json::array();
    for (const auto& u : ut) {
        nlohmann::json ju;
        ju["lcd"] = u.lcd;
        if (u.mmse_sic)
            ju["mmse_sic"] = *u.mmse_sic;
        else
            ju["mmse_sic"] = nullptr;
        ju["large_q"] = u.large_q;
        if (with_terms && !u.terms.empty()) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& t : u.terms)
                arr.push_back({{"signal", t.signal},
                               {"awgn", t.awgn},
                               {"isi", t.isi},
                               {"mui", t.mui}});
            ju["sinr"] = std::move(arr);
        }
        j["ut"].push_back(std::move(ju));
    }
    return j;
}

std::vector<SinrTerms> lcd_sinr(const std::vector<MatrixXc>& grams, int s, double rho, double eta,
                                int M, int N) {
    const int K = static_cast<int>(grams.size());
    require(s >= 0 && s < K, "lcd_sinr: UT index out of range");
    const int MN = M * N;
    const double awgn = eta / (rho * MN);

    std::vector<SinrTerms> terms(static_cast<size_t>(MN));
    for (int sp = 0; sp < K; ++sp) {
        const MatrixXc& G = grams[sp];
        require(G.rows() == MN && G.cols() == MN, "lcd_sinr: gram dimension mismatch");
        Eigen::VectorXd rowsq = G.rowwise().squaredNorm();
        if (sp == s) {
            for (int r = 0; r < MN; ++r) {
                const double diag2 = std::norm(G(r, r));
                terms[r].signal = diag2;
                terms[r].isi = std::max(0.0, rowsq(r) - diag2);
                terms[r].awgn = awgn;
            }
        } else {
            for (int r = 0; r < MN; ++r) terms[r].mui += rowsq(r);
        }
    }
    for (const auto& t : terms)
        if (t.signal == 0.0)
            throw std::runtime_error("lcd_sinr: zero diagonal Gram entry (all-zero-gain channel)");
    return terms;
}

namespace {

double logdet_hermitian_pd(const MatrixXc& A, const char* what) {
    Eigen::LLT<MatrixXc> llt(A);
    if (llt.info() != Eigen::Success) {
        const double dmin = A.diagonal().real().minCoeff();
        throw std::runtime_error(std::string(what) +
                                 ": Cholesky failed, matrix not positive definite "
                                 "(min diagonal " +
                                 std::to_string(dmin) + ", norm " + std::to_string(A.norm()) + ")");
    }
    return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
}

}  // namespace

double mmse_sic_capacity(const std::vector<MatrixXc>& grams, int s, double rho, double eta,
                         const SystemConfig& cfg) {
    const int K = static_cast<int>(grams.size());
    require(s >= 0 && s < K, "mmse_sic_capacity: UT index out of range");
    const int MN = cfg.mn();
    const double c = rho * MN / eta;  // E_T/(eta N0) with E_T = rho M N N0

    MatrixXc D = MatrixXc::Identity(MN, MN);
    for (int sp = 0; sp < K; ++sp) {
        if (sp == s) continue;
        D.noalias() += c * (grams[sp] * grams[sp].adjoint());
    }
    MatrixXc DS = D;
    DS.noalias() += c * (grams[s] * grams[s].adjoint());

    const double ld = logdet_hermitian_pd(DS, "mmse_sic_capacity(D+S)") -
                      logdet_hermitian_pd(D, "mmse_sic_capacity(D)");
    return ld / std::log(2.0) / (MN * cfg.overhead());
}

std::vector<double> large_q_rate(const ChannelParams& params, const SystemConfig& cfg) {
    const double denom = params.sum_beta();
    require(denom > 0, "large_q_rate: zero total beta");
    std::vector<double> out(static_cast<size_t>(params.K()));
    for (int s = 0; s < params.K(); ++s) {
        const double sg2 = params.sum_g2(s);
        out[s] = std::log2(1.0 + cfg.rho * cfg.Q() * sg2 * sg2 / denom);
    }
    return out;
}

SEReport analyze_se_from(const std::function<MatrixXc(int, int)>& gram_source, double eta, int K,
                         const std::vector<double>& large_q, const SystemConfig& cfg,
                         const SeOptions& opt) {
    const int MN = cfg.mn();
    const double awgn = eta / (cfg.rho * MN);
    const double c = cfg.E_T() / (eta * cfg.N0);

    SEReport rep;
    rep.overhead = cfg.overhead();
    rep.ut.resize(static_cast<size_t>(K));

    for (int s = 0; s < K; ++s) {
        auto& u = rep.ut[static_cast<size_t>(s)];
        std::vector<SinrTerms> terms(static_cast<size_t>(MN));
        for (auto& t : terms) t.awgn = awgn;

        MatrixXc D, DS;
        if (opt.with_mmse_sic) D = MatrixXc::Identity(MN, MN);

        for (int sp = 0; sp < K; ++sp) {
            MatrixXc G = gram_source(s, sp);
            Eigen::VectorXd rowsq = G.rowwise().squaredNorm();
            if (sp == s) {
                for (int r = 0; r < MN; ++r) {
                    const double diag2 = std::norm(G(r, r));
                    terms[r].signal = diag2;
                    terms[r].isi = std::max(0.0, rowsq(r) - diag2);
                }
                if (opt.with_mmse_sic) DS.noalias() = c * (G * G.adjoint());
            } else {
                for (int r = 0; r < MN; ++r) terms[r].mui += rowsq(r);
                if (opt.with_mmse_sic) D.noalias() += c * (G * G.adjoint());
            }
        }

        double sum_log = 0.0;
        for (const auto& t : terms) {
            if (t.signal == 0.0)
                throw std::runtime_error("analyze_se: zero diagonal Gram entry");
            sum_log += std::log2(1.0 + t.sinr());
        }
        u.lcd = sum_log / (MN * rep.overhead);
        u.large_q = large_q.empty() ? 0.0 : large_q[static_cast<size_t>(s)];
        if (opt.with_mmse_sic) {
            DS += D;
            const double ld = logdet_hermitian_pd(DS, "analyze_se(D+S)") -
                              logdet_hermitian_pd(D, "analyze_se(D)");
            u.mmse_sic = ld / std::log(2.0) / (MN * rep.overhead);
        }
        if (opt.keep_terms) u.terms = std::move(terms);

        rep.sum_lcd += u.lcd;
        rep.sum_large_q += u.large_q;
    }
    if (opt.with_mmse_sic) {
        double total = 0.0;
        for (const auto& u : rep.ut) total += *u.mmse_sic;
        rep.sum_mmse_sic = total;
    }
    return rep;
}

SEReport analyze_se(const ChannelParams& params, const SystemConfig& cfg, const SeOptions& opt) {
    const double eta = precoder_eta(params, cfg);
    auto source = [&](int s, int sp) { return gram(params, cfg, s, sp, opt.mode); };
    return analyze_se_from(source, eta, params.K(), large_q_rate(params, cfg), cfg, opt);
}

DDGrid lcd_equalize(const DDGrid& xhat, const std::vector<Complex>& gamma_diag, double E_T,
                    double eta) {
    require(gamma_diag.size() == xhat.v.size(), "lcd_equalize: diagonal size mismatch");
    require(eta > 0, "lcd_equalize: eta must be positive");
    const double scale = std::sqrt(E_T / eta);
    DDGrid u(xhat.M, xhat.N);
    for (size_t r = 0; r < xhat.v.size(); ++r) {
        const Complex d = scale * gamma_diag[r];
        if (d == Complex(0.0, 0.0))
            throw std::runtime_error("lcd_equalize: zero diagonal gain");
        u.v[r] = xhat.v[r] / d;
    }
    return u;
}

Complex qam4_symbol(int bits2) {
    static const double a = 1.0 / std::sqrt(2.0);
    return Complex((bits2 & 1) ? -a : a, (bits2 & 2) ? -a : a);
}

int qam4_slice(Complex y) {
    return (y.real() < 0 ? 1 : 0) | (y.imag() < 0 ? 2 : 0);
}

}  // namespace otfs
