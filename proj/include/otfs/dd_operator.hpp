#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otfs/channel.hpp"
#include "otfs/config.hpp"
#include "otfs/types.hpp"

namespace otfs {

using MatrixXc = Eigen::MatrixXcd;

// One path operator A: a delay cyclic shift combined with a Doppler kernel.
// The entry in row (k, l) and column (k', l') is nonzero only when
// l = [l' + l_tau]_M, where it equals
//   D[(k-k') mod N] * exp(j 2 pi (l'/M)(nu/delta_f))             (no wrap)
//   D[(k-k') mod N] * exp(j 2 pi ((l'/M)(nu/delta_f) - k'/N - nu/delta_f))
//                                                                 (l' >= M - l_tau)
// with D the length-N normalized Dirichlet kernel of the fractional Doppler.
// Every column and row has exactly N nonzeros; columns are orthonormal.
struct SparseDDOperator {
    int M = 0;
    int N = 0;
    int l_tau = 0;
    double nu = 0.0;       // Hz
    double nu_norm = 0.0;  // nu / delta_f
    double delta_f = 0.0;

    std::vector<Complex> dirichlet;    // D[dk], dk = (k_row - k_col) mod N
    std::vector<Complex> delay_phase;  // exp(j 2 pi (l'/M) nu_norm) per column delay l'
    std::vector<Complex> wrap_phase;   // exp(-j 2 pi (k'/N + nu_norm)) per column Doppler k'

    bool wraps(int l_col) const { return l_tau > 0 && l_col >= M - l_tau; }
    int row_delay(int l_col) const { int l = l_col + l_tau; return l >= M ? l - M : l; }
    int col_delay(int l_row) const { int l = l_row - l_tau; return l < 0 ? l + M : l; }

    // Value at row (k_row, [l_col + l_tau]_M), column (k_col, l_col).
    Complex entry(int k_row, int k_col, int l_col) const {
        Complex v = dirichlet[(k_row - k_col + N) % N] * delay_phase[l_col];
        if (wraps(l_col)) v *= wrap_phase[k_col];
        return v;
    }
};

// Builds the operator with the Dirichlet sum evaluated as a closed-form
// geometric series (exact branch when nu/delta_f - dk/N is an integer).
SparseDDOperator build_operator(int l_tau, double nu, int M, int N, double delta_f);

DDGrid apply(const SparseDDOperator& op, const DDGrid& x);
DDGrid apply_adjoint(const SparseDDOperator& op, const DDGrid& x);
MatrixXc dense(const SparseDDOperator& op);

// Frobenius inner product Tr(B^H A); zero unless the delays coincide.
Complex frobenius_inner(const SparseDDOperator& a, const SparseDDOperator& b);

// H_{q,s} = sum_i h_{q,s,i} A_{s,i}; operators shared across antennas.
struct EffectiveChannel {
    std::shared_ptr<const std::vector<SparseDDOperator>> ops;
    std::vector<Complex> weights;
};

std::shared_ptr<const std::vector<SparseDDOperator>> build_ut_operators(
    const ChannelParams& params, int s, const SystemConfig& cfg);

EffectiveChannel effective_channel(
    const ChannelParams& params, int q, int s, const SystemConfig& cfg,
    std::shared_ptr<const std::vector<SparseDDOperator>> ops = nullptr);

DDGrid apply(const EffectiveChannel& ch, const DDGrid& x, uint64_t* cmacs = nullptr);
DDGrid apply_adjoint(const EffectiveChannel& ch, const DDGrid& x, uint64_t* cmacs = nullptr);
MatrixXc dense(const EffectiveChannel& ch);

enum class GramMode { factorized, direct };

// G_{s,s'} = sum_q H_{q,s} H_{q,s'}^H as a dense MN x MN matrix.
// factorized: path-pair expansion with the closed-form URA sum, cost
// independent of Q. direct: literal sum over antennas (dense; small sizes,
// kept for cross-validation).
MatrixXc gram(const ChannelParams& params, const SystemConfig& cfg, int s, int s_prime,
              GramMode mode = GramMode::factorized);

// G += w * A B^H exploiting that the product has N nonzeros per row.
void add_pair_product(MatrixXc& G, const SparseDDOperator& a, const SparseDDOperator& b,
                      Complex w);

// Row-major little-endian dump with a 16-byte header (u32 M, N, flags, reserved).
// flags bit0: 1 = complex128, 0 = complex64.
void dump_gram(const std::string& path, const MatrixXc& G, int M, int N, bool complex128 = true);
MatrixXc load_gram(const std::string& path, int& M, int& N);

}  // namespace otfs
