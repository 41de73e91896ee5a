#pragma once

// Closed-form and quadrature bounds on the conditional mutual information:
// two upper bounds built from second moments of the output (a determinant
// form and a separable relaxation), a quadratic relaxation of the separable
// form, MMSE-estimator lower bounds for discrete and continuous inputs, and
// the on-off orthogonal-constellation lower bound in both its double-integral
// and closed forms.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fadecap/channel.hpp"
#include "fadecap/constellations.hpp"
#include "fadecap/errors.hpp"
#include "fadecap/numerics.hpp"

namespace fadecap::bounds {

using channel::ChannelParams;
using channel::CMatrix;
using channel::CVector;
using constellation::Constellation;

enum class BoundKind {
    upper_l1_matrix,
    upper_l1_simplified,
    upper_c1,
    lower_l2_discrete,
    lower_l2_continuous,
    lower_c2_discrete,
    lower_c2_continuous,
    lower_l3_integral,
    lower_l3_simplified,
    asymptotic_onoff,
};

inline const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::upper_l1_matrix: return "upper-L1-matrix";
        case BoundKind::upper_l1_simplified: return "upper-L1-simplified";
        case BoundKind::upper_c1: return "upper-C1";
        case BoundKind::lower_l2_discrete: return "lower-L2-discrete";
        case BoundKind::lower_l2_continuous: return "lower-L2-continuous";
        case BoundKind::lower_c2_discrete: return "lower-C2-discrete";
        case BoundKind::lower_c2_continuous: return "lower-C2-continuous";
        case BoundKind::lower_l3_integral: return "lower-L3-integral";
        case BoundKind::lower_l3_simplified: return "lower-L3-simplified";
        case BoundKind::asymptotic_onoff: return "asymptotic-onoff";
    }
    return "unknown";
}

struct AssumptionFlags {
    bool zero_mean = false;
    bool isotropic_covariance = false;  // Sigma_x = I/K
    bool uniform_fading = false;
    bool large_l = false;  // L >= 10; the on-off bound leans on a CLT step
};

struct BoundReport {
    double value = 0.0;
    BoundKind kind = BoundKind::upper_c1;
    AssumptionFlags assumptions{};
    double quad_error = 0.0;  // quadrature error estimate where applicable
};

inline nlohmann::ordered_json to_json(const BoundReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(r.kind);
    j["value"] = r.value;
    j["assumptions"] = {{"zero_mean", r.assumptions.zero_mean},
                        {"isotropic_covariance", r.assumptions.isotropic_covariance},
                        {"uniform_fading", r.assumptions.uniform_fading},
                        {"large_l", r.assumptions.large_l}};
    j["quad_error"] = r.quad_error;
    return j;
}

namespace detail {

struct SecondOrder {
    CVector mu;   // E{x}
    CMatrix s;    // E{x x^*}
    CMatrix cov;  // s - mu mu^*
};

inline SecondOrder second_order(const Constellation& c) {
    SecondOrder so;
    so.mu = c.mean();
    so.s = CMatrix::Zero(c.dim(), c.dim());
    for (std::size_t t = 0; t < c.size(); ++t)
        so.s += c.probabilities()[t] * (c.symbols()[t] * c.symbols()[t].adjoint());
    so.cov = so.s - so.mu * so.mu.adjoint();
    return so;
}

// F: KL x KL Hermitian matrix with blocks s_ij Sigma_eps + cov_ij a a^* + [i=j] sigma2 I.
inline CMatrix build_f(const SecondOrder& so, const ChannelParams& p) {
    const int K = p.K, L = p.L;
    CMatrix aa = p.alpha_hat * p.alpha_hat.adjoint();
    CMatrix f = CMatrix::Zero(K * L, K * L);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            CMatrix block = so.cov(i, j) * aa;
            for (int l = 0; l < L; ++l) block(l, l) += so.s(i, j) * p.delta2[l];
            if (i == j) block += p.sigma2 * CMatrix::Identity(L, L);
            f.block(i * L, j * L, L, L) = block;
        }
    return f;
}

inline double log_det_hermitian_pd(const CMatrix& m, const char* what) {
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw LinearAlgebraError(std::string(what) + ": matrix not positive definite");
    double ld = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        ld += std::log(llt.matrixL()(i, i).real());
    return 2.0 * ld;
}

inline double csi_sum(const ChannelParams& p) {
    double s = 0.0;
    for (int l = 0; l < p.L; ++l)
        s += std::norm(p.alpha_hat(l)) / (p.delta2[l] + p.K * p.sigma2);
    return s;
}

inline bool is_uniform_fading(const ChannelParams& p) {
    for (double d : p.delta2)
        if (std::fabs(d - p.beta / p.L) > 1e-12) return false;
    return true;
}

}  // namespace detail

struct CovarianceUpperBounds {
    BoundReport matrix_form;     // ln|F| - E ln|E_x Sigma_eps + sigma2 I| - (K-1)L ln sigma2
    BoundReport separable_form;  // Hadamard/Fischer relaxation of the matrix form
};

/// Second-moment upper bounds on the conditional MI. The matrix form never
/// exceeds the separable form.
inline CovarianceUpperBounds upper_bounds_covariance(const Constellation& c,
                                                     const ChannelParams& p) {
    p.validate();
    if (c.dim() != p.K)
        throw DimensionError("upper_bounds_covariance: constellation dimension != K");
    const auto so = detail::second_order(c);
    const CMatrix f = detail::build_f(so, p);
    const double logdet_f = detail::log_det_hermitian_pd(f, "upper_bounds_covariance");

    double e_logdet = 0.0;
    double e_sep = 0.0;
    for (std::size_t t = 0; t < c.size(); ++t) {
        const double e = c.symbols()[t].squaredNorm();
        double ld = 0.0, sep = 0.0;
        for (int l = 0; l < p.L; ++l) {
            ld += std::log(e * p.delta2[l] + p.sigma2);
            sep += std::log1p(e * p.delta2[l] / p.sigma2);
        }
        e_logdet += c.probabilities()[t] * ld;
        e_sep += c.probabilities()[t] * sep;
    }

    AssumptionFlags flags;
    flags.zero_mean = c.mean().norm() <= 1e-9;
    flags.isotropic_covariance =
        (c.covariance() - CMatrix::Identity(p.K, p.K) / p.K).cwiseAbs().maxCoeff() <= 1e-9;
    flags.uniform_fading = detail::is_uniform_fading(p);

    CovarianceUpperBounds out;
    out.matrix_form.kind = BoundKind::upper_l1_matrix;
    out.matrix_form.assumptions = flags;
    out.matrix_form.value = logdet_f - e_logdet -
                            (p.K - 1) * p.L * std::log(p.sigma2);

    double sep = 0.0;
    for (int l = 0; l < p.L; ++l)
        sep += std::log1p(p.delta2[l] / (p.K * p.sigma2));
    out.separable_form.kind = BoundKind::upper_l1_simplified;
    out.separable_form.assumptions = flags;
    out.separable_form.value =
        p.K * sep + p.K * std::log1p(detail::csi_sum(p)) - e_sep;
    return out;
}

/// Quadratic relaxation of the separable upper bound:
/// K ln(1 + sum |a_l|^2/(delta_l^2 + K sigma2)) + E{E_x^2}/2 * sum delta_l^4 / sigma^4.
inline BoundReport upper_bound_quadratic(const Constellation& c,
                                         const ChannelParams& p) {
    p.validate();
    if (c.dim() != p.K)
        throw DimensionError("upper_bound_quadratic: constellation dimension != K");
    double d4 = 0.0;  // sum of delta_l^4; delta2 entries are already delta_l^2
    for (double d2 : p.delta2) d4 += d2 * d2;
    BoundReport r;
    r.kind = BoundKind::upper_c1;
    r.assumptions.uniform_fading = detail::is_uniform_fading(p);
    r.value = p.K * std::log1p(detail::csi_sum(p)) +
              0.5 * c.fourth_moment() * d4 / (p.sigma2 * p.sigma2);
    return r;
}

enum class LowerVariant { discrete, continuous };

/// MMSE-estimator lower bound. The discrete variant uses the constellation
/// entropy and minimum distance; the continuous variant needs the input's
/// differential entropy supplied by the caller.
inline BoundReport lower_bound_mmse(
    const Constellation& c, const ChannelParams& p, LowerVariant variant,
    std::optional<double> differential_entropy = std::nullopt) {
    p.validate();
    if (c.dim() != p.K)
        throw DimensionError("lower_bound_mmse: constellation dimension != K");
    const int K = p.K;
    const auto so = detail::second_order(c);
    const CMatrix f = detail::build_f(so, p);
    Eigen::LLT<CMatrix> llt(f);
    if (llt.info() != Eigen::Success)
        throw LinearAlgebraError("lower_bound_mmse: F not positive definite");
    // A: KL x K block-diagonal stack of alpha_hat
    CMatrix a = CMatrix::Zero(K * p.L, K);
    for (int k = 0; k < K; ++k) a.block(k * p.L, k, p.L, 1) = p.alpha_hat;
    const CMatrix err = so.cov - so.cov * a.adjoint() * llt.solve(a * so.cov);

    AssumptionFlags flags;
    flags.zero_mean = c.mean().norm() <= 1e-9;
    flags.isotropic_covariance =
        (c.covariance() - CMatrix::Identity(K, K) / K).cwiseAbs().maxCoeff() <= 1e-9;
    flags.uniform_fading = detail::is_uniform_fading(p);

    BoundReport r;
    r.assumptions = flags;
    if (variant == LowerVariant::discrete) {
        const double d = c.min_distance();
        if (!(d > 0.0) || !std::isfinite(d))
            throw PreconditionError(
                "lower_bound_mmse: discrete variant needs a positive finite minimum "
                "distance");
        CMatrix padded = err + (d * d / (4.0 * (K + 1.0))) * CMatrix::Identity(K, K);
        const double logdet = detail::log_det_hermitian_pd(padded, "lower_bound_mmse");
        r.kind = BoundKind::lower_l2_discrete;
        r.value = c.entropy() + K * std::log(num::kPi) + 2.0 * K * std::log(d) -
                  K * std::log(4.0) - std::lgamma(K + 1.0) -
                  (K * std::log(num::kPi * std::exp(1.0)) + logdet);
    } else {
        if (!differential_entropy)
            throw PreconditionError(
                "lower_bound_mmse: continuous variant needs the differential entropy");
        const double logdet = detail::log_det_hermitian_pd(err, "lower_bound_mmse");
        r.kind = BoundKind::lower_l2_continuous;
        r.value = *differential_entropy -
                  (K * std::log(num::kPi * std::exp(1.0)) + logdet);
    }
    return r;
}

/// Closed-form specialization of the MMSE bound for zero-mean inputs with
/// covariance I/K (checked; violations raise PreconditionError).
inline BoundReport lower_bound_mmse_isotropic(
    const Constellation& c, const ChannelParams& p, LowerVariant variant,
    std::optional<double> differential_entropy = std::nullopt) {
    p.validate();
    if (c.dim() != p.K)
        throw DimensionError("lower_bound_mmse_isotropic: constellation dimension != K");
    const int K = p.K;
    if (c.mean().norm() > 1e-9)
        throw PreconditionError(
            "lower_bound_mmse_isotropic: input mean must be zero (|mean| = " +
            std::to_string(c.mean().norm()) + ")");
    const double covdev =
        (c.covariance() - CMatrix::Identity(K, K) / K).cwiseAbs().maxCoeff();
    if (covdev > 1e-9)
        throw PreconditionError(
            "lower_bound_mmse_isotropic: input covariance must equal I/K (max "
            "deviation " +
            std::to_string(covdev) + ")");

    const double s = detail::csi_sum(p);
    AssumptionFlags flags;
    flags.zero_mean = true;
    flags.isotropic_covariance = true;
    flags.uniform_fading = detail::is_uniform_fading(p);

    BoundReport r;
    r.assumptions = flags;
    const double log_pie = std::log(num::kPi * std::exp(1.0));
    if (variant == LowerVariant::discrete) {
        const double d = c.min_distance();
        if (!(d > 0.0) || !std::isfinite(d))
            throw PreconditionError(
                "lower_bound_mmse_isotropic: discrete variant needs d > 0");
        r.kind = BoundKind::lower_c2_discrete;
        r.value = c.entropy() + K * std::log(num::kPi) + 2.0 * K * std::log(d) -
                  K * std::log(4.0) - std::lgamma(K + 1.0) - K * log_pie +
                  K * std::log(static_cast<double>(K)) -
                  K * std::log(d * d * K / (4.0 * (K + 1.0)) + 1.0 / (1.0 + s));
    } else {
        if (!differential_entropy)
            throw PreconditionError(
                "lower_bound_mmse_isotropic: continuous variant needs the "
                "differential entropy");
        r.kind = BoundKind::lower_c2_continuous;
        r.value = *differential_entropy + K * std::log(static_cast<double>(K)) -
                  K * log_pie + K * std::log1p(s);
    }
    return r;
}

/// Parameters of the on-off orthogonal constellation bound. K enters only
/// through its logarithm, so constellations of astronomically many symbols
/// are representable.
struct OnoffChannel {
    double log_k = 0.0;  // ln K, K >= 1
    double m = 1.0;      // energy parameter, E = 2 m L sigma2
    int L = 1;
    double beta = 1.0;
    double sigma2 = 1.0;
    double alpha_norm2 = 0.0;

    static OnoffChannel from_k(int K, double m, int L, double beta, double sigma2,
                               double alpha_norm2) {
        if (K < 1) throw DomainError("OnoffChannel: K must be >= 1");
        return {std::log(static_cast<double>(K)), m, L, beta, sigma2, alpha_norm2};
    }

    double symbol_energy() const { return 2.0 * m * L * sigma2; }

    void validate() const {
        if (L < 1) throw DomainError("OnoffChannel: L must be >= 1");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw DomainError("OnoffChannel: beta must lie in [0, 1]");
        if (!(sigma2 > 0.0)) throw DomainError("OnoffChannel: sigma2 must be positive");
        if (!(alpha_norm2 >= 0.0)) throw DomainError("OnoffChannel: alpha_norm2 >= 0");
        if (!(log_k >= 0.0)) throw DomainError("OnoffChannel: log_k must be >= 0");
        if (!(m > 1.0 / (2.0 * L * sigma2)))
            throw PreconditionError("OnoffChannel: need m > 1/(2 L sigma2)");
    }
};

namespace detail {

struct OnoffTerms {
    double energy;   // E = 2 m L sigma2
    double log_a;    // ln[K (E-1) (2 m beta + 1)^L]
    double shift;    // 2 m L (beta + a)
    double s_single; // spread of the single Gaussian integral
    double mu_y;     // lognormal location
    double s_y;      // lognormal scale
    double c_inner;  // inner exponent slope
    double d_inner;  // inner exponent offset, 2 m beta L / (2 m beta + 1)
};

inline OnoffTerms onoff_terms(const OnoffChannel& ch) {
    ch.validate();
    OnoffTerms t;
    const double m = ch.m, a = ch.alpha_norm2, beta = ch.beta;
    const double L = ch.L;
    t.energy = ch.symbol_energy();
    t.log_a = ch.log_k + std::log(t.energy - 1.0) + L * std::log1p(2.0 * m * beta);
    t.shift = 2.0 * m * L * (beta + a);
    t.s_single = std::sqrt(L * (m * m * beta * beta + (2.0 * m * m * beta + m) * a));
    t.mu_y = t.shift;
    t.s_y = 2.0 * std::sqrt(m * L * (m * beta * beta + (2.0 * m * beta + 1.0) * a));
    t.c_inner = 2.0 * std::sqrt(L * (m * m * beta * beta + m * a)) /
                (2.0 * m * beta + 1.0);
    t.d_inner = 2.0 * m * beta * L / (2.0 * m * beta + 1.0);
    return t;
}

}  // namespace detail

/// On-off orthogonal-constellation lower bound, double-integral form. Uses
/// Gauss-Hermite rules for the Gaussian, lognormal, and extreme-value
/// weighted integrals; intended for moderate K (the inner max-of-normals
/// density is resolvable by the node set roughly up to ln K ~ 20).
inline BoundReport lower_bound_onoff(const OnoffChannel& ch, int gh_nodes = 64) {
    const auto t = detail::onoff_terms(ch);
    const auto gh = num::gauss_quadrature(num::QuadKind::gauss_hermite, gh_nodes);
    const double inv_sqrt_pi = 1.0 / std::sqrt(num::kPi);
    const double k_real = std::exp(ch.log_k);

    // single integral: E_{x~N(0,1)} softplus(ln A - shift - 2 x s_single)
    double t1 = 0.0;
    for (int i = 0; i < gh_nodes; ++i) {
        const double x = std::sqrt(2.0) * gh.nodes[i];
        t1 += gh.weights[i] * num::softplus(t.log_a - t.shift - 2.0 * x * t.s_single);
    }
    t1 *= inv_sqrt_pi;

    double t2 = 0.0;
    if (ch.log_k > 0.0) {
        const double log_km1 =
            ch.log_k + std::log1p(-std::exp(-ch.log_k));  // ln(K - 1)
        auto inner = [&](double log_y) {
            double s = 0.0;
            for (int i = 0; i < gh_nodes; ++i) {
                const double x = std::sqrt(2.0) * gh.nodes[i];
                const double log_phi_pow =
                    (k_real - 2.0) * std::log(num::std_normal_cdf(x));
                const double log_den = num::log_sum_exp(log_y, t.log_a);
                s += gh.weights[i] * std::exp(log_phi_pow) *
                     num::softplus(log_km1 + t.c_inner * x + t.d_inner - log_den);
            }
            return std::exp(log_km1) * inv_sqrt_pi * s;
        };
        // lognormal outer integral via ln y = mu_y + s_y sqrt(2) t
        for (int i = 0; i < gh_nodes; ++i) {
            const double log_y = t.mu_y + t.s_y * std::sqrt(2.0) * gh.nodes[i];
            t2 += gh.weights[i] * inner(log_y);
        }
        t2 *= inv_sqrt_pi;
    }

    BoundReport r;
    r.kind = BoundKind::lower_l3_integral;
    r.assumptions.uniform_fading = true;
    r.assumptions.large_l = ch.L >= 10;
    r.value = (ch.log_k + std::log(t.energy) - t1 - t2) / t.energy;
    return r;
}

/// Closed-form weakening of the on-off bound; always <= the integral form.
/// Safe for astronomically large K via log-domain tail evaluation.
inline BoundReport lower_bound_onoff_closed_form(const OnoffChannel& ch) {
    const auto t = detail::onoff_terms(ch);
    const double m = ch.m, beta = ch.beta, a = ch.alpha_norm2;
    const double L = ch.L;
    const double k1 = m * m * beta * beta + (2.0 * m * m * beta + m) * a;
    const double k2 = m * m * beta * beta + m * a;

    double v = ch.log_k + std::log(t.energy);
    v -= num::softplus(t.log_a - t.shift);
    if (ch.log_k > 0.0) {
        const double log_km1 = ch.log_k + std::log1p(-std::exp(-ch.log_k));
        v -= num::softplus(log_km1 + t.d_inner - t.log_a);
        // extreme-value term at a* = sqrt(2 ln K)
        const double astar = std::sqrt(2.0 * ch.log_k);
        double phi_pow;  // Phi(a*)^{K-1}
        double ratio_km1_k;
        double two_pow;  // 2^{1-K}
        if (ch.log_k < 25.0) {
            const double k_real = std::exp(ch.log_k);
            phi_pow = std::pow(num::std_normal_cdf(astar), k_real - 1.0);
            two_pow = std::pow(2.0, 1.0 - k_real);
            ratio_km1_k = (k_real - 1.0) / k_real;
        } else {
            phi_pow = std::exp(-std::exp(ch.log_k + num::log_normal_sf(astar)));
            two_pow = 0.0;
            ratio_km1_k = 1.0;
        }
        v -= (2.0 / (2.0 * m * beta + 1.0)) * (phi_pow - two_pow) *
             std::sqrt(2.0 * L * ch.log_k * k2);
        v -= std::sqrt(2.0 * L / num::kPi) *
             (std::sqrt(k1) + ratio_km1_k * std::sqrt(k2) / (2.0 * m * beta + 1.0));
    } else {
        v -= std::sqrt(2.0 * L / num::kPi) * std::sqrt(k1);
    }

    BoundReport r;
    r.kind = BoundKind::lower_l3_simplified;
    r.assumptions.uniform_fading = true;
    r.assumptions.large_l = ch.L >= 10;
    r.value = v / t.energy;
    return r;
}

/// Large-(m, L) form of the on-off bound at K = e^{2mL}, beta = 1, no CSI:
/// (1/(2 m L sigma2)) [2mL - L ln(2m+1) - (4mL/(2m+1)) sqrt(m)/e - m sqrt(2L/pi)].
/// Approaches 1/sigma2 as m, L grow.
inline double asymptotic_onoff_bound(double m, int L, double sigma2) {
    if (!(m >= 1.0)) throw DomainError("asymptotic_onoff_bound: m must be >= 1");
    if (L < 1) throw DomainError("asymptotic_onoff_bound: L must be >= 1");
    if (!(sigma2 > 0.0)) throw DomainError("asymptotic_onoff_bound: sigma2 > 0");
    const double Ld = L;
    const double bracket = 2.0 * m * Ld - Ld * std::log(2.0 * m + 1.0) -
                           (4.0 * m * Ld / (2.0 * m + 1.0)) * std::sqrt(m) / std::exp(1.0) -
                           m * std::sqrt(2.0 * Ld / num::kPi);
    return bracket / (2.0 * m * Ld * sigma2);
}

/// Vanishing upper bound on MI without CSI under uniform fading
/// (delta_i^2 = 1/L): E{E_x^2} / (2 L sigma^4) for each L in the list.
inline std::vector<double> fourth_moment_vanishing_bound(
    const Constellation& c, const std::vector<int>& l_list, double sigma2) {
    if (!(sigma2 > 0.0))
        throw DomainError("fourth_moment_vanishing_bound: sigma2 must be positive");
    std::vector<double> out;
    out.reserve(l_list.size());
    for (int l : l_list) {
        if (l < 1) throw DomainError("fourth_moment_vanishing_bound: L must be >= 1");
        out.push_back(c.fourth_moment() / (2.0 * l * sigma2 * sigma2));
    }
    return out;
}

}  // namespace fadecap::bounds
