#pragma once

// Monte Carlo plug-in estimator of the conditional mutual information from
// the exact conditional Gaussian densities. Used as the independent
// validation oracle for the exact-MI path and the bounds.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fadecap/channel.hpp"
#include "fadecap/constellations.hpp"
#include "fadecap/errors.hpp"
#include "fadecap/numerics.hpp"
#include "fadecap/rng.hpp"

namespace fadecap::mc {

using channel::ChannelParams;
using channel::CMatrix;
using channel::CVector;
using constellation::Constellation;

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

struct SymbolDensity {
    CVector mean;
    Eigen::LLT<CMatrix> llt;
    double log_norm;  // -KL ln pi - ln|B|
    double log_prob;
};

// Deterministic pairwise summation over a fixed index order.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo,
                           std::size_t hi) {
    if (hi - lo <= 32) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace detail

/// Plug-in estimate (1/n) sum ln[ p(y_t | x_t) / sum_j p_j p(y_t | x_j) ]
/// with (x_t, y_t) drawn from the joint law. Bit-reproducible for a given
/// (seed, n_samples): each sample draws from its own counter-based stream and
/// the reduction order is a fixed pairwise tree.
inline McEstimate mc_mutual_information(const Constellation& c,
                                        const ChannelParams& params,
                                        std::uint64_t n_samples, std::uint64_t seed) {
    params.validate();
    if (c.dim() != params.K)
        throw DimensionError("mc_mutual_information: constellation dimension != K");
    if (params.K * params.L > 8)
        throw PreconditionError("mc_mutual_information: KL must be <= 8");
    if (n_samples == 0) throw DomainError("mc_mutual_information: need n_samples > 0");

    const int dim = params.K * params.L;
    const std::size_t n_sym = c.size();
    std::vector<detail::SymbolDensity> sym(n_sym);
    for (std::size_t j = 0; j < n_sym; ++j) {
        auto m = channel::conditional_moments(c.symbols()[j], params);
        sym[j].mean = std::move(m.mean);
        sym[j].llt.compute(m.covariance);
        if (sym[j].llt.info() != Eigen::Success)
            throw LinearAlgebraError("mc_mutual_information: covariance not PD");
        double logdet = 0.0;
        for (int i = 0; i < dim; ++i)
            logdet += 2.0 * std::log(sym[j].llt.matrixL()(i, i).real());
        sym[j].log_norm = -dim * std::log(num::kPi) - logdet;
        sym[j].log_prob = std::log(c.probabilities()[j]);
    }
    std::vector<double> cum(n_sym);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_sym; ++j) {
        acc += c.probabilities()[j];
        cum[j] = acc;
    }
    cum.back() = 1.0;

    auto log_pdf = [&](std::size_t j, const CVector& y) {
        CVector d = y - sym[j].mean;
        // proper complex Gaussian: exponent -(y-mu)^* B^{-1} (y-mu)
        CVector w = sym[j].llt.matrixL().solve(d);
        return sym[j].log_norm - w.squaredNorm();
    };

    std::vector<double> ratios(n_samples);
    std::vector<double> terms(n_sym);
    CVector z(dim), y(dim);
    for (std::uint64_t t = 0; t < n_samples; ++t) {
        rng::Stream rs(seed, t);
        const double u = rs.uniform();
        std::size_t idx = 0;
        while (idx + 1 < n_sym && u > cum[idx]) ++idx;
        for (int i = 0; i < dim; ++i) z(i) = rs.complex_normal();
        y = sym[idx].mean + sym[idx].llt.matrixL() * z;
        for (std::size_t j = 0; j < n_sym; ++j)
            terms[j] = sym[j].log_prob + log_pdf(j, y);
        ratios[t] = log_pdf(idx, y) - num::log_sum_exp(terms);
    }

    McEstimate est;
    est.n_samples = n_samples;
    est.seed = seed;
    est.estimate = detail::pairwise_sum(ratios, 0, ratios.size()) /
                   static_cast<double>(n_samples);
    double ss = 0.0;
    for (double r : ratios) {
        const double d = r - est.estimate;
        ss += d * d;
    }
    est.std_error = n_samples > 1
                        ? std::sqrt(ss / (static_cast<double>(n_samples) *
                                          (static_cast<double>(n_samples) - 1.0)))
                        : 0.0;
    return est;
}

}  // namespace fadecap::mc
