#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "otfs/dd_operator.hpp"

namespace otfs {

// Per-DDRE SINR decomposition for the low-complexity detector.
struct SinrTerms {
    double signal = 0.0;  // |gamma_{s,s,r,r}|^2
    double awgn = 0.0;    // eta/(rho M N)
    double isi = 0.0;     // sum_{p != r} |gamma_{s,s,r,p}|^2
    double mui = 0.0;     // sum_{s' != s} sum_p |gamma_{s,s',r,p}|^2
    double sinr() const { return signal / (awgn + isi + mui); }
};

struct UtSe {
    double lcd = 0.0;
    std::optional<double> mmse_sic;
    double large_q = 0.0;
    std::vector<SinrTerms> terms;  // per DDRE, optional
};

struct SEReport {
    std::string system = "otfs";
    double overhead = 1.0;
    std::vector<UtSe> ut;
    double sum_lcd = 0.0;
    std::optional<double> sum_mmse_sic;
    double sum_large_q = 0.0;

    nlohmann::json to_json(bool with_terms = true) const;
};

// LCD SINR decomposition for UT s from the K Gram matrices G_{s,s'}.
std::vector<SinrTerms> lcd_sinr(const std::vector<MatrixXc>& grams, int s, double rho, double eta,
                                int M, int N);

// MMSE-SIC spectral efficiency (Gaussian inputs) for UT s: a log-det
// difference of two Hermitian positive-definite forms.
double mmse_sic_capacity(const std::vector<MatrixXc>& grams, int s, double rho, double eta,
                         const SystemConfig& cfg);

// Large-array per-DDRE rate approximation, independent of r:
// log2(1 + rho Q (sum_i |g_{s,i}|^2)^2 / sum_{s~,i} beta).
std::vector<double> large_q_rate(const ChannelParams& params, const SystemConfig& cfg);

struct SeOptions {
    bool with_mmse_sic = false;
    bool keep_terms = false;
    GramMode mode = GramMode::factorized;
};

// Full SE analysis for one realization; Gram matrices are streamed one (s,s')
// pair at a time so peak memory is a single dense MN x MN matrix (plus two
// accumulators when MMSE-SIC is requested).
SEReport analyze_se(const ChannelParams& params, const SystemConfig& cfg,
                    const SeOptions& opt = {});

// Same analysis with caller-supplied Gram source and eta (used for the
// estimated-CSI evaluation where G mixes the true and estimated channels).
SEReport analyze_se_from(const std::function<MatrixXc(int, int)>& gram_source, double eta, int K,
                         const std::vector<double>& large_q, const SystemConfig& cfg,
                         const SeOptions& opt = {});

// Per-symbol LCD equalization: u_hat_r = xhat_r / (sqrt(E_T/eta) gamma_{s,s,r,r}).
DDGrid lcd_equalize(const DDGrid& xhat, const std::vector<Complex>& gamma_diag, double E_T,
                    double eta);

// Gray-mapped 4-QAM helpers for uncoded symbol-error runs.
Complex qam4_symbol(int bits2);
int qam4_slice(Complex y);

}  // namespace otfs
