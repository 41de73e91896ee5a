#pragma once

// Discrete-time channel model: circulant code matrices, SVD reduction to the
// KL-dimensional signal subspace, conditional output moments, and samplers
// for the fading / CSI processes.

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fadecap/errors.hpp"
#include "fadecap/rng.hpp"

namespace fadecap::channel {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Channel instance: K spreading codes (constellation dimension), L resolvable
/// paths, total CSI-error power beta split uniformly across paths
/// (delta_i^2 = beta/L), additive noise power sigma2, and the CSI estimate
/// alpha_hat. Average symbol energy is normalized to 1, so SNR = 1/sigma2.
struct ChannelParams {
    int K = 1;
    int L = 1;
    double beta = 1.0;
    double sigma2 = 1.0;
    CVector alpha_hat;              // length L
    std::vector<double> delta2;     // per-path CSI error power, defaults to beta/L

    ChannelParams(int k, int l, double b, double s2, CVector a)
        : K(k), L(l), beta(b), sigma2(s2), alpha_hat(std::move(a)) {
        delta2.assign(static_cast<std::size_t>(L), beta / L);
        validate();
    }

    /// Real CSI vector carrying the full norm in the first path. All bounds
    /// and the exact MI depend on alpha_hat only through |alpha_i|^2 with a
    /// constant denominator under uniform fading, so this loses nothing.
    static ChannelParams with_alpha_norm2(int k, int l, double b, double s2,
                                          double alpha_norm2) {
        CVector a = CVector::Zero(l);
        if (alpha_norm2 > 0.0) a(0) = std::sqrt(alpha_norm2);
        return {k, l, b, s2, std::move(a)};
    }

    double alpha_norm2() const { return alpha_hat.squaredNorm(); }

    void validate() const {
        if (K < 1 || L < 1) throw DomainError("ChannelParams: K and L must be >= 1");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw DomainError("ChannelParams: beta must lie in [0, 1]");
        if (!(sigma2 > 0.0)) throw DomainError("ChannelParams: sigma2 must be positive");
        if (alpha_hat.size() != L)
            throw DimensionError("ChannelParams: alpha_hat must have length L");
        if (static_cast<int>(delta2.size()) != L)
            throw DimensionError("ChannelParams: delta2 must have length L");
        double sum = 0.0;
        for (double d : delta2) {
            if (d < 0.0) throw DomainError("ChannelParams: delta2 entries must be >= 0");
            sum += d;
        }
        if (std::fabs(sum - beta) > 1e-9)
            throw DomainError("ChannelParams: sum of delta2 must equal beta");
    }
};

/// K unit-norm chip sequences of length N and their stacked block matrix of
/// circulant shifts, C = [C_1 | ... | C_K], size (N+L-1) x KL.
struct CodeMatrix {
    std::vector<std::vector<double>> codes;
    Eigen::MatrixXd stacked;
    int K = 0, L = 0, N = 0;
};

/// Build the stacked circulant-shift matrix and check it has full rank KL.
inline CodeMatrix build_code_matrix(const std::vector<std::vector<double>>& codes,
                                    int L) {
    if (codes.empty()) throw DimensionError("build_code_matrix: need at least one code");
    if (L < 1) throw DomainError("build_code_matrix: L must be >= 1");
    const int K = static_cast<int>(codes.size());
    const int N = static_cast<int>(codes[0].size());
    for (const auto& c : codes) {
        if (static_cast<int>(c.size()) != N)
            throw DimensionError("build_code_matrix: codes must share one length");
        double norm2 = 0.0;
        for (double v : c) norm2 += v * v;
        if (std::fabs(norm2 - 1.0) > 1e-9)
            throw DomainError("build_code_matrix: codes must have unit norm");
    }
    if (static_cast<long long>(K) * L > N)
        throw DimensionError("build_code_matrix: KL must not exceed N");

    CodeMatrix cm;
    cm.codes = codes;
    cm.K = K;
    cm.L = L;
    cm.N = N;
    cm.stacked = Eigen::MatrixXd::Zero(N + L - 1, K * L);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l)
            for (int n = 0; n < N; ++n) cm.stacked(n + l, k * L + l) = codes[k][n];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cm.stacked);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin <= 1e-10)
        throw DegeneracyError("build_code_matrix: stacked matrix is rank deficient");
    return cm;
}

/// Right singular factor U of C = V D U^T; the KL x KL basis of the reduced
/// observation y = U^* H_x (alpha_hat + eps) + gamma.
inline Eigen::MatrixXd reduce_model(const CodeMatrix& cm) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cm.stacked, Eigen::ComputeThinV);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin <= 1e-10) throw DegeneracyError("reduce_model: rank deficient code matrix");
    return svd.matrixV();
}

/// H_x = [x_1 I | x_2 I | ... | x_K I]^T, size KL x L.
inline CMatrix symbol_matrix(const CVector& x, int L) {
    const int K = static_cast<int>(x.size());
    CMatrix h = CMatrix::Zero(K * L, L);
    for (int k = 0; k < K; ++k)
        h.block(k * L, 0, L, L) = x(k) * CMatrix::Identity(L, L);
    return h;
}

struct ConditionalMoments {
    CVector mean;        // H_x alpha_hat in the reduced basis
    CMatrix covariance;  // B_x = H_x Sigma_eps H_x^* + sigma2 I
};

/// Conditional mean and covariance of the reduced observation given symbol x.
inline ConditionalMoments conditional_moments(const CVector& x,
                                              const ChannelParams& params) {
    params.validate();
    if (x.size() != params.K)
        throw DimensionError("conditional_moments: symbol must have length K");
    const int K = params.K, L = params.L;
    ConditionalMoments m;
    m.mean = CVector::Zero(K * L);
    for (int k = 0; k < K; ++k)
        m.mean.segment(k * L, L) = x(k) * params.alpha_hat;
    m.covariance = CMatrix::Zero(K * L, K * L);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            Complex cij = x(i) * std::conj(x(j));
            for (int l = 0; l < L; ++l)
                m.covariance(i * L + l, j * L + l) = cij * params.delta2[l];
        }
    for (int d = 0; d < K * L; ++d) m.covariance(d, d) += params.sigma2;
    return m;
}

/// One draw of the reduced observation given symbol x; deterministic per
/// (seed, stream).
inline CVector sample_output(const CVector& x, const ChannelParams& params,
                             std::uint64_t seed, std::uint64_t stream = 0) {
    ConditionalMoments m = conditional_moments(x, params);
    Eigen::LLT<CMatrix> llt(m.covariance);
    if (llt.info() != Eigen::Success)
        throw LinearAlgebraError("sample_output: conditional covariance not PD");
    rng::Stream rs(seed, stream);
    CVector z(m.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rs.complex_normal();
    return m.mean + llt.matrixL() * z;
}

/// One draw of the CSI estimate: i.i.d. proper complex Gaussian entries with
/// per-path variance (1-beta)/L, so E||alpha_hat||^2 = 1 - beta.
inline CVector sample_csi(const ChannelParams& params, std::uint64_t seed,
                          std::uint64_t stream = 0) {
    params.validate();
    rng::Stream rs(seed, stream);
    const double sd = std::sqrt((1.0 - params.beta) / params.L);
    CVector a(params.L);
    for (int i = 0; i < params.L; ++i) a(i) = sd * rs.complex_normal();
    return a;
}

}  // namespace fadecap::channel
