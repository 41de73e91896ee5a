#pragma once

// Exact mutual information for one-dimensional radially symmetric inputs
// under uniform fading, and the first-order optimality residuals of the
// constrained capacity program.
//
// Everything is built on one quantity: with mixture kernel
//   ln f(x, y | r, rho) = L ln(c_r/c_rho) + ln I0( sqrt(2 A_rho (c_r/c_rho) x) )
//                         - (x + y) c_r / (2 c_rho) - A_rho,
//   c_s = beta s^2 + L sigma2,   A_s = L s^2 a / c_s,   a = ||alpha_hat||^2,
// define T(r) = E[ ln sum_j p_j f(x, y | r, r_j) ] where x is noncentral
// chi-squared (2 dof, noncentrality 2 A_r) and y is central chi-squared with
// 2L - 2 dof. Then
//   I(x; y) = -L - sum_i p_i T(r_i)
// and the optimality residual is g(r) = lambda1 + lambda2 r^2 + 1 + T(r).

#include <cmath>
#include <functional>
#include <vector>

#include "fadecap/constellations.hpp"
#include "fadecap/errors.hpp"
#include "fadecap/numerics.hpp"

namespace fadecap::exact {

using constellation::RadialDistribution;

struct QuadratureBudget {
    double tol_single = 1e-9;  // single (L = 1) integrals, relative
    double tol_outer = 1e-7;   // outer integral of the nested L > 1 form
    double tol_inner = 1e-9;   // inner integral of the nested L > 1 form
    int max_panels = 4000;
};

/// Parameters the K = 1 mutual information depends on. alpha_hat enters only
/// through its squared norm.
struct MiContext {
    int L = 1;
    double beta = 1.0;
    double sigma2 = 1.0;
    double alpha_norm2 = 0.0;
    QuadratureBudget budget{};

    void validate() const {
        if (L < 1) throw DomainError("MiContext: L must be >= 1");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw DomainError("MiContext: beta must lie in [0, 1]");
        if (!(sigma2 > 0.0)) throw DomainError("MiContext: sigma2 must be positive");
        if (!(alpha_norm2 >= 0.0))
            throw DomainError("MiContext: alpha_norm2 must be >= 0");
    }
};

/// The displayed mixture kernel ln f(x, y, r, rho).
inline double log_f_kernel(double x, double y, double r, double rho,
                           const MiContext& ctx) {
    ctx.validate();
    if (!(x >= 0.0) || !(y >= 0.0) || !(r >= 0.0) || !(rho >= 0.0))
        throw DomainError("log_f_kernel: arguments must be nonnegative");
    const double cr = ctx.beta * r * r + ctx.L * ctx.sigma2;
    const double cp = ctx.beta * rho * rho + ctx.L * ctx.sigma2;
    const double ratio = cr / cp;
    const double arho = ctx.L * rho * rho * ctx.alpha_norm2 / cp;
    return ctx.L * std::log(ratio) + num::log_bessel_i0(std::sqrt(2.0 * arho * ratio * x)) -
           (0.5 * (x + y) * ratio + arho);
}

namespace detail {

// Precomputed per-distribution tables for repeated kernel evaluation.
class MixtureEvaluator {
public:
    MixtureEvaluator(const RadialDistribution& dist, const MiContext& ctx)
        : ctx_(ctx) {
        ctx.validate();
        for (const auto& pt : dist.points()) {
            const double c = ctx.beta * pt.r * pt.r + ctx.L * ctx.sigma2;
            c_.push_back(c);
            a_.push_back(ctx.L * pt.r * pt.r * ctx.alpha_norm2 / c);
            logp_.push_back(std::log(pt.p));
        }
        terms_.resize(c_.size());
    }

    // ln sum_j p_j f(x, y | r, r_j) with precomputed c_r for the query radius.
    double log_mixture(double x, double y, double cr) const {
        for (std::size_t j = 0; j < c_.size(); ++j) {
            const double ratio = cr / c_[j];
            terms_[j] = logp_[j] + ctx_.L * std::log(ratio) +
                        num::log_bessel_i0(std::sqrt(2.0 * a_[j] * ratio * x)) -
                        (0.5 * (x + y) * ratio + a_[j]);
        }
        return num::log_sum_exp(terms_);
    }

    const MiContext& ctx() const { return ctx_; }

private:
    MiContext ctx_;
    std::vector<double> c_, a_, logp_;
    mutable std::vector<double> terms_;
};

// Upper truncation point of a log-concave-ish weight: smallest x > peak with
// log w(x) < log w(peak) - 40.
template <typename LogW>
inline double truncate_weight(const LogW& logw, double peak, double scale) {
    const double target = logw(peak) - 40.0;
    double step = std::max(scale, 1.0);
    double hi = peak + step;
    while (logw(hi) > target && hi < 1e12) {
        step *= 2.0;
        hi = peak + step;
    }
    double lo = std::max(peak, hi - step);
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        (logw(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

// E over x ~ noncentral chi-squared(2, lambda) of fn(x), truncated where the
// weight drops 40 nats below its peak.
template <typename Fn>
inline double expect_ncchi2_2(double lambda, const Fn& fn, double tol,
                              int max_panels) {
    auto logw = [lambda](double x) {
        return num::noncentral_chi2_2_logpdf(lambda, x);
    };
    // mode: 0 for small lambda, near lambda otherwise (ternary search)
    double peak = 0.0;
    if (lambda > 2.0) {
        double lo = 0.0, hi = lambda + 2.0;
        for (int it = 0; it < 25; ++it) {
            double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (logw(m1) < logw(m2))
                lo = m1;
            else
                hi = m2;
        }
        peak = 0.5 * (lo + hi);
    }
    const double hi = truncate_weight(logw, peak, 4.0 + lambda);
    auto integrand = [&](double x) { return fn(x) * std::exp(logw(x)); };
    double split = peak > 0.0 ? peak : std::min(2.0, hi);
    auto left = num::integrate_adaptive(integrand, 0.0, split, tol, 1e-300, max_panels);
    auto right = num::integrate_adaptive(integrand, split, hi, tol, 1e-300, max_panels);
    return left.value + right.value;
}

// E over y ~ chi-squared(dof) of fn(y), same truncation scheme. dof >= 2.
template <typename Fn>
inline double expect_chi2(int dof, const Fn& fn, double tol, int max_panels) {
    auto logw = [dof](double y) { return num::chi2_logpdf(dof, y); };
    double peak = std::max(0.0, static_cast<double>(dof - 2));
    const double hi = truncate_weight(logw, peak, 4.0 + dof);
    auto integrand = [&](double y) { return fn(y) * std::exp(logw(y)); };
    double split = peak > 0.0 ? peak : std::min(2.0, hi);
    auto left = num::integrate_adaptive(integrand, 0.0, split, tol, 1e-300, max_panels);
    auto right = num::integrate_adaptive(integrand, split, hi, tol, 1e-300, max_panels);
    return left.value + right.value;
}

// T(r) for one query radius against the evaluator's mixture.
inline double conditional_log_mixture_expectation(const MixtureEvaluator& ev,
                                                  double r) {
    const MiContext& ctx = ev.ctx();
    const double cr = ctx.beta * r * r + ctx.L * ctx.sigma2;
    const double lambda = 2.0 * ctx.L * r * r * ctx.alpha_norm2 / cr;
    const auto& b = ctx.budget;
    if (ctx.L == 1) {
        return expect_ncchi2_2(
            lambda, [&](double x) { return ev.log_mixture(x, 0.0, cr); },
            b.tol_single, b.max_panels);
    }
    return expect_chi2(
        2 * ctx.L - 2,
        [&](double y) {
            return expect_ncchi2_2(
                lambda, [&](double x) { return ev.log_mixture(x, y, cr); },
                b.tol_inner, b.max_panels);
        },
        b.tol_outer, b.max_panels);
}

}  // namespace detail

/// T(r) = E{ ln sum_j p_j f(x, y | r, r_j) } for a query radius r.
inline double expected_log_mixture(const RadialDistribution& dist,
                                   const MiContext& ctx, double r) {
    detail::MixtureEvaluator ev(dist, ctx);
    return detail::conditional_log_mixture_expectation(ev, r);
}

/// Exact mutual information (nats) of a radially symmetric K = 1 input with
/// magnitude law `dist`.
inline double mi_radial(const RadialDistribution& dist, const MiContext& ctx) {
    detail::MixtureEvaluator ev(dist, ctx);
    double s = 0.0;
    for (const auto& pt : dist.points())
        s += pt.p * detail::conditional_log_mixture_expectation(ev, pt.r);
    return -static_cast<double>(ctx.L) - s;
}

struct Multipliers {
    double lambda1 = 0.0;  // constant (mass-constraint) multiplier
    double lambda2 = 0.0;  // energy-constraint multiplier
};

struct ResidualReport {
    std::vector<double> grid;
    std::vector<double> g;                    // residual g(r) on the grid
    std::vector<double> g_support;            // residual at the mass points
    double max_interior_violation = 0.0;      // max over grid of (-g)^+
    double max_support_violation = 0.0;       // max over support of |g|
    bool certificate = false;                 // necessary and sufficient only for L = 1
};

/// 400-point grid, log-spaced on (0, 8] with r = 0 prepended.
inline std::vector<double> default_r_grid() {
    std::vector<double> grid;
    grid.push_back(0.0);
    const int n = 399;
    const double lo = std::log(1e-3), hi = std::log(8.0);
    for (int i = 0; i < n; ++i)
        grid.push_back(std::exp(lo + (hi - lo) * i / (n - 1.0)));
    return grid;
}

namespace detail {

// Shared residual machinery over an arbitrary T(r); used both for the
// fixed-CSI program and for the outer-averaged program.
template <typename TFn>
inline Multipliers fit_multipliers_from(const TFn& T,
                                        const RadialDistribution& dist) {
    const auto& pts = dist.points();
    std::vector<double> b(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) b[i] = 1.0 + T(pts[i].r);
    if (pts.size() == 1) {
        // g(r0) = 0 plus tangency g'(r0) = 0 at an interior support point.
        Multipliers m;
        const double r0 = pts[0].r;
        if (r0 > 0.0) {
            const double h = 1e-4 * std::max(1.0, r0);
            const double tp = (T(r0 + h) - T(std::max(0.0, r0 - h))) / (2.0 * h);
            m.lambda2 = -tp / (2.0 * r0);
        }
        m.lambda1 = -b[0] - m.lambda2 * r0 * r0;
        return m;
    }
    // least squares for lambda1 + lambda2 r_i^2 + b_i = 0
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double q = pts[i].r * pts[i].r;
        s0 += 1.0;
        s1 += q;
        s2 += q * q;
        t0 += -b[i];
        t1 += -b[i] * q;
    }
    const double det = s0 * s2 - s1 * s1;
    Multipliers m;
    if (std::fabs(det) < 1e-14 * std::max(1.0, s2)) {
        m.lambda2 = 0.0;
        m.lambda1 = t0 / s0;
    } else {
        m.lambda1 = (t0 * s2 - t1 * s1) / det;
        m.lambda2 = (s0 * t1 - s1 * t0) / det;
    }
    return m;
}

template <typename TFn>
inline ResidualReport residual_from(const TFn& T, const RadialDistribution& dist,
                                    const Multipliers& m,
                                    const std::vector<double>& r_grid,
                                    bool certificate) {
    ResidualReport rep;
    rep.certificate = certificate;
    rep.grid = r_grid;
    rep.g.reserve(r_grid.size());
    for (double r : r_grid) {
        const double g = m.lambda1 + m.lambda2 * r * r + 1.0 + T(r);
        rep.g.push_back(g);
        rep.max_interior_violation = std::max(rep.max_interior_violation, -g);
    }
    for (const auto& pt : dist.points()) {
        const double g = m.lambda1 + m.lambda2 * pt.r * pt.r + 1.0 + T(pt.r);
        rep.g_support.push_back(g);
        rep.max_support_violation = std::max(rep.max_support_violation, std::fabs(g));
    }
    return rep;
}

}  // namespace detail

/// Least-squares fit of the multipliers from g(r_i) = 0 on the support.
inline Multipliers fit_multipliers(const RadialDistribution& dist,
                                   const MiContext& ctx) {
    detail::MixtureEvaluator ev(dist, ctx);
    return detail::fit_multipliers_from(
        [&](double r) { return detail::conditional_log_mixture_expectation(ev, r); },
        dist);
}

/// Evaluate the optimality residual g(r) on a grid. At a maximizing
/// distribution g >= 0 everywhere and g = 0 on the support; the report
/// carries the largest violations of both conditions. The conditions are a
/// certificate (necessary and sufficient) for L = 1 and necessary for L > 1.
inline ResidualReport optimality_residual(const RadialDistribution& dist,
                                          double lambda1, double lambda2,
                                          const MiContext& ctx,
                                          const std::vector<double>& r_grid) {
    detail::MixtureEvaluator ev(dist, ctx);
    return detail::residual_from(
        [&](double r) { return detail::conditional_log_mixture_expectation(ev, r); },
        dist, Multipliers{lambda1, lambda2}, r_grid, ctx.L == 1);
}

}  // namespace fadecap::exact
