#pragma once

// Constrained capacity optimization over small radial distributions, the
// with/without-feedback capacity averages, fixed reference families, and the
// closed-form coherent capacities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fadecap/constellations.hpp"
#include "fadecap/errors.hpp"
#include "fadecap/exact_mi.hpp"
#include "fadecap/numerics.hpp"
#include "fadecap/rng.hpp"

namespace fadecap::capacity {

using constellation::RadialDistribution;
using constellation::RadialPoint;
using exact::MiContext;
using exact::Multipliers;
using exact::QuadratureBudget;
using exact::ResidualReport;

struct OptimizerOptions {
    int restarts = 20;
    int max_evals = 2000;          // per restart
    double simplex_tol = 1e-6;     // simplex diameter
    double value_tol = 1e-7;       // best-to-worst value spread
    std::uint64_t seed = 1;
    QuadratureBudget search_budget{1e-7, 1e-6, 1e-7, 4000};  // during the search
    QuadratureBudget final_budget{};                         // for reported values
    double merge_prob = 1e-6;   // drop mass points below this probability
    double merge_radius = 1e-4; // merge radii closer than this
    // Outer-average controls (capacity_tr / capacity_r): nodes whose
    // Gauss-Laguerre weight falls below the cutoff contribute below 1e-11
    // nats and are skipped; adjacent nodes warm-start each other with a
    // reduced restart count; capacity_r searches on a thinned node set and
    // reports the full-rule value of the winner.
    double node_weight_cutoff = 1e-12;
    int warm_restarts = 6;
    int search_outer_nodes = 12;
    // When false, capacity_r skips the multiplier fit and residual scan
    // (which re-evaluates T on a 400-point grid across all outer nodes).
    bool certify = true;
};

struct OptimizerTrace {
    int restarts = 0;
    long evaluations = 0;
    bool converged = false;
};

struct CapacityResult {
    double value = 0.0;
    RadialDistribution argmax = constellation::psk();
    Multipliers multipliers{};
    ResidualReport residual_report{};
    OptimizerTrace trace{};
};

namespace detail {

// Minimal Nelder-Mead for smooth low-dimensional objectives.
struct NmResult {
    std::vector<double> x;
    double value = 0.0;
    long evaluations = 0;
    bool converged = false;
};

template <typename F>
inline NmResult nelder_mead(const F& f, std::vector<double> x0, double step,
                            int max_evals, double simplex_tol, double value_tol) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fx(n + 1);
    long evals = 0;
    for (std::size_t i = 1; i <= n; ++i) xs[i][i - 1] += step;
    for (std::size_t i = 0; i <= n; ++i) {
        fx[i] = f(xs[i]);
        ++evals;
    }
    std::vector<std::size_t> order(n + 1);
    auto sort_order = [&]() {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    };
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    bool converged = false;
    while (evals < max_evals) {
        sort_order();
        const std::size_t best = order[0], worst = order[n],
                          second = order[n - 1];
        double diam = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d)
                diam = std::max(diam, std::fabs(xs[i][d] - xs[best][d]));
        if (diam < simplex_tol && fx[worst] - fx[best] < value_tol) {
            converged = true;
            break;
        }
        for (std::size_t d = 0; d < n; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i <= n; ++i)
                if (i != worst) s += xs[i][d];
            centroid[d] = s / static_cast<double>(n);
        }
        auto blend = [&](std::vector<double>& out, double t) {
            for (std::size_t d = 0; d < n; ++d)
                out[d] = centroid[d] + t * (xs[worst][d] - centroid[d]);
        };
        blend(xr, -1.0);
        double fr = f(xr);
        ++evals;
        if (fr < fx[best]) {
            blend(xe, -2.0);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                xs[worst] = xe;
                fx[worst] = fe;
            } else {
                xs[worst] = xr;
                fx[worst] = fr;
            }
        } else if (fr < fx[second]) {
            xs[worst] = xr;
            fx[worst] = fr;
        } else {
            const bool outside = fr < fx[worst];
            blend(xc, outside ? -0.5 : 0.5);
            double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fx[worst])) {
                xs[worst] = xc;
                fx[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
                    fx[i] = f(xs[i]);
                    ++evals;
                }
            }
        }
    }
    sort_order();
    return {xs[order[0]], fx[order[0]], evals, converged};
}

// theta = (w_1..w_{P-1}, s_1..s_{P-1}): softmax weights against the pinned
// zero-radius point, softplus radii rescaled to unit average energy.
inline RadialDistribution decode(const std::vector<double>& theta, int max_points) {
    const int nfree = max_points - 1;
    double wmax = 0.0;
    for (int i = 0; i < nfree; ++i) wmax = std::max(wmax, theta[i]);
    double z = std::exp(0.0 - wmax);
    for (int i = 0; i < nfree; ++i) z += std::exp(theta[i] - wmax);
    std::vector<RadialPoint> pts;
    pts.push_back({0.0, std::exp(0.0 - wmax) / z});
    double energy = 0.0;
    std::vector<double> raw(nfree);
    for (int i = 0; i < nfree; ++i) {
        const double p = std::exp(theta[i] - wmax) / z;
        raw[i] = num::softplus(theta[nfree + i]);
        energy += p * raw[i] * raw[i];
        pts.push_back({raw[i], p});
    }
    const double scale = 1.0 / std::sqrt(energy);
    for (int i = 1; i <= nfree; ++i) pts[i].r *= scale;
    return RadialDistribution(std::move(pts));
}

inline double inverse_softplus(double y) {
    if (y > 30.0) return y;
    return std::log(std::expm1(std::max(y, 1e-8)));
}

// Parameter vector reproducing a given distribution (up to the energy
// rescaling, which is idempotent for feasible inputs); missing mass points
// are filled with far-out low-probability placeholders.
inline std::vector<double> encode(const RadialDistribution& d, int max_points) {
    const int nfree = max_points - 1;
    std::vector<double> theta(2 * nfree);
    const auto& pts = d.points();
    double p0 = d.includes_zero() ? pts.front().p : 1e-6;
    std::size_t first = d.includes_zero() ? 1 : 0;
    int slot = 0;
    for (std::size_t i = first; i < pts.size() && slot < nfree; ++i, ++slot) {
        theta[slot] = std::log(std::max(pts[i].p, 1e-9) / p0);
        theta[nfree + slot] = inverse_softplus(pts[i].r);
    }
    for (; slot < nfree; ++slot) {
        theta[slot] = -8.0;
        theta[nfree + slot] = inverse_softplus(2.5 + 0.7 * slot);
    }
    return theta;
}

inline std::vector<std::vector<double>> restart_points(int nfree, int restarts,
                                                       std::uint64_t seed) {
    std::vector<std::vector<double>> starts;
    // deterministic seeds: on-off weighted toward zero, even spread, wide spread
    {
        std::vector<double> t(2 * nfree, 0.0);
        for (int i = 0; i < nfree; ++i) {
            t[i] = i == 0 ? 0.0 : -6.0;
            t[nfree + i] = inverse_softplus(1.0 + 1.2 * i);
        }
        starts.push_back(t);
    }
    {
        std::vector<double> t(2 * nfree, 0.0);
        for (int i = 0; i < nfree; ++i) {
            t[i] = 1.0;
            t[nfree + i] = inverse_softplus(0.6 + 0.7 * i);
        }
        starts.push_back(t);
    }
    {
        std::vector<double> t(2 * nfree, 0.0);
        for (int i = 0; i < nfree; ++i) {
            t[i] = 2.0 - 0.5 * i;
            t[nfree + i] = inverse_softplus(0.4 + 1.6 * i);
        }
        starts.push_back(t);
    }
    // stratified random starts: logits in [-3, 3], radii in (0, 4]
    int k = static_cast<int>(starts.size());
    for (int rsi = k; rsi < restarts; ++rsi) {
        rng::Stream rs(seed, static_cast<std::uint64_t>(rsi));
        std::vector<double> t(2 * nfree);
        for (int i = 0; i < nfree; ++i) t[i] = -3.0 + 6.0 * rs.uniform();
        for (int i = 0; i < nfree; ++i) {
            const double lo = 4.0 * i / nfree;
            const double r = lo + (4.0 / nfree) * rs.uniform();
            t[nfree + i] = inverse_softplus(std::max(r, 0.05));
        }
        starts.push_back(t);
    }
    starts.resize(static_cast<std::size_t>(std::max(restarts, 1)));
    return starts;
}

inline RadialDistribution cleanup(const RadialDistribution& d, double min_prob,
                                  double radius_tol) {
    std::vector<RadialPoint> pts;
    for (const auto& raw : d.points()) {
        RadialPoint q = raw;
        if (q.r < radius_tol) q.r = 0.0;  // pin the zero-radius point
        if (q.p < min_prob) continue;
        if (!pts.empty() && q.r - pts.back().r < radius_tol) {
            // merge preserving mass and energy
            const double p = pts.back().p + q.p;
            const double r2 =
                (pts.back().p * pts.back().r * pts.back().r + q.p * q.r * q.r) / p;
            pts.back() = {std::sqrt(r2), p};
        } else {
            pts.push_back(q);
        }
    }
    double mass = 0.0;
    for (auto& q : pts) mass += q.p;
    for (auto& q : pts) q.p /= mass;
    double energy = 0.0;
    for (auto& q : pts) energy += q.p * q.r * q.r;
    if (energy > 0.0) {
        const double scale = 1.0 / std::sqrt(energy);
        for (auto& q : pts) q.r *= scale;
    }
    return RadialDistribution(std::move(pts));
}

// Deterministic best-candidate ordering: higher value wins; exact ties go to
// the lexicographically smaller support so parallel and serial runs agree.
inline bool better_candidate(double va, const RadialDistribution& da, double vb,
                             const RadialDistribution& db) {
    if (va != vb) return va > vb;
    const auto& pa = da.points();
    const auto& pb = db.points();
    for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
        if (pa[i].r != pb[i].r) return pa[i].r < pb[i].r;
        if (pa[i].p != pb[i].p) return pa[i].p < pb[i].p;
    }
    return pa.size() < pb.size();
}

// Shared optimizer driver over an arbitrary averaged objective
// mi(dist) = -1 - sum_i p_i T(r_i). Used for both the fixed-CSI and the
// outer-averaged programs; warm starts from related problems are appended to
// the standard restart set.
template <typename MiFn>
inline std::pair<RadialDistribution, OptimizerTrace> maximize_radial(
    const MiFn& mi_loose, int max_points, const OptimizerOptions& opts,
    const std::vector<std::vector<double>>& extra_starts = {}) {
    if (max_points < 2) throw DomainError("optimize_capacity: max_points must be >= 2");
    const int nfree = max_points - 1;
    auto starts = restart_points(nfree, opts.restarts, opts.seed);
    for (const auto& s : extra_starts)
        if (static_cast<int>(s.size()) == 2 * nfree) starts.push_back(s);

    OptimizerTrace trace;
    trace.restarts = static_cast<int>(starts.size());
    bool have = false;
    RadialDistribution best = constellation::psk();
    double best_loose = 0.0;
    for (const auto& s : starts) {
        auto res = nelder_mead(
            [&](const std::vector<double>& th) { return -mi_loose(decode(th, max_points)); },
            s, 0.5, opts.max_evals, opts.simplex_tol, opts.value_tol);
        trace.evaluations += res.evaluations;
        trace.converged = trace.converged || res.converged;
        RadialDistribution cand =
            cleanup(decode(res.x, max_points), opts.merge_prob, opts.merge_radius);
        const double v = mi_loose(cand);
        if (!have || better_candidate(v, cand, best_loose, best)) {
            have = true;
            best = cand;
            best_loose = v;
        }
    }
    return {best, trace};
}

struct NodeOptimum {
    RadialDistribution dist = constellation::psk();
    double value = 0.0;  // evaluated with the final budget
    OptimizerTrace trace{};
};

inline NodeOptimum optimize_node(double alpha_norm2, double beta, double sigma2,
                                 int max_points, const OptimizerOptions& opts,
                                 const std::vector<std::vector<double>>& extra = {}) {
    MiContext search_ctx{1, beta, sigma2, alpha_norm2, opts.search_budget};
    search_ctx.validate();
    auto [best, trace] = maximize_radial(
        [&](const RadialDistribution& d) { return exact::mi_radial(d, search_ctx); },
        max_points, opts, extra);
    MiContext fine_ctx{1, beta, sigma2, alpha_norm2, opts.final_budget};
    return {best, exact::mi_radial(best, fine_ctx), trace};
}

}  // namespace detail

/// Maximize the exact MI over radial distributions with at most `max_points`
/// mass points, the first pinned at radius zero. Unit mass and unit average
/// energy hold by construction of the parameterization.
inline CapacityResult optimize_capacity(double alpha_norm2, double beta,
                                        double sigma2, int max_points = 4,
                                        const OptimizerOptions& opts = {}) {
    auto node = detail::optimize_node(alpha_norm2, beta, sigma2, max_points, opts);
    MiContext fine_ctx{1, beta, sigma2, alpha_norm2, opts.final_budget};
    CapacityResult out;
    out.argmax = node.dist;
    out.trace = node.trace;
    out.value = node.value;
    out.multipliers = exact::fit_multipliers(node.dist, fine_ctx);
    out.residual_report =
        exact::optimality_residual(node.dist, out.multipliers.lambda1,
                                   out.multipliers.lambda2, fine_ctx,
                                   exact::default_r_grid());
    return out;
}

/// Capacity with CSI at both ends: the per-CSI optimum averaged over the
/// CSI-norm law ||alpha||^2 ~ ((1-beta)/2) chi^2_2 by Gauss-Laguerre.
inline double capacity_tr(double beta, double sigma2, int outer_nodes = 32,
                          const OptimizerOptions& opts = {}) {
    if (beta == 1.0) {
        // the integrand no longer depends on the CSI draw
        return optimize_capacity(0.0, beta, sigma2, 4, opts).value;
    }
    const auto gl = num::gauss_quadrature(num::QuadKind::gauss_laguerre, outer_nodes);
    // walk the CSI nodes from the largest norm down, warm-starting each
    // optimization from its neighbor; negligible-weight nodes are skipped
    double acc = 0.0;
    bool have_prev = false;
    RadialDistribution prev = constellation::psk();
    for (int k = outer_nodes - 1; k >= 0; --k) {
        if (gl.weights[k] < opts.node_weight_cutoff) continue;
        OptimizerOptions node_opts = opts;
        node_opts.seed = opts.seed * 1315423911ULL + static_cast<std::uint64_t>(k);
        std::vector<std::vector<double>> extra;
        if (have_prev) {
            node_opts.restarts = std::min(opts.restarts, opts.warm_restarts);
            extra.push_back(detail::encode(prev, 4));
        }
        auto node = detail::optimize_node((1.0 - beta) * gl.nodes[k], beta, sigma2,
                                          4, node_opts, extra);
        acc += gl.weights[k] * node.value;
        prev = node.dist;
        have_prev = true;
    }
    return acc;
}

/// Capacity with CSI at the receiver only: one fixed distribution maximizing
/// the CSI-averaged MI.
inline CapacityResult capacity_r(double beta, double sigma2, int max_points = 4,
                                 int outer_nodes = 32,
                                 const OptimizerOptions& opts = {}) {
    if (beta == 1.0) return optimize_capacity(0.0, beta, sigma2, max_points, opts);
    const auto gl = num::gauss_quadrature(num::QuadKind::gauss_laguerre, outer_nodes);
    std::vector<MiContext> fine_ctx;
    for (int k = 0; k < outer_nodes; ++k)
        fine_ctx.push_back(
            {1, beta, sigma2, (1.0 - beta) * gl.nodes[k], opts.final_budget});
    // the search runs on a thinned outer rule; the winner is then evaluated
    // and certified on the full rule
    const int search_nodes = std::min(outer_nodes, opts.search_outer_nodes);
    const auto gl_s =
        num::gauss_quadrature(num::QuadKind::gauss_laguerre, search_nodes);
    std::vector<MiContext> search_ctx;
    for (int k = 0; k < search_nodes; ++k)
        search_ctx.push_back(
            {1, beta, sigma2, (1.0 - beta) * gl_s.nodes[k], opts.search_budget});
    auto avg_mi = [](const num::QuadratureRule& rule,
                     const std::vector<MiContext>& ctxs,
                     const RadialDistribution& d, double cutoff) {
        double acc = 0.0;
        for (std::size_t k = 0; k < ctxs.size(); ++k) {
            if (rule.weights[k] < cutoff) continue;
            acc += rule.weights[k] * exact::mi_radial(d, ctxs[k]);
        }
        return acc;
    };
    auto [best, trace] = detail::maximize_radial(
        [&](const RadialDistribution& d) {
            return avg_mi(gl_s, search_ctx, d, opts.node_weight_cutoff);
        },
        max_points, opts);

    CapacityResult out;
    out.argmax = best;
    out.trace = trace;
    out.value = avg_mi(gl, fine_ctx, best, 0.0);
    if (opts.certify) {
        // first-order conditions of the averaged program share the single-CSI
        // structure with T replaced by its average
        auto t_avg = [&](double r) {
            double acc = 0.0;
            for (int k = 0; k < outer_nodes; ++k)
                acc +=
                    gl.weights[k] * exact::expected_log_mixture(best, fine_ctx[k], r);
            return acc;
        };
        out.multipliers = exact::detail::fit_multipliers_from(t_avg, best);
        out.residual_report = exact::detail::residual_from(
            t_avg, best, out.multipliers, exact::default_r_grid(), true);
    }
    return out;
}

enum class Family { psk, uniform, amqam_adaptive, gaussian };

struct FamilyOptions {
    int m_max = 10;          // adaptive ring count cap
    int uniform_levels = 64; // shells in the uniform-disk quantization
    int gaussian_levels = 128;
    int outer_nodes = 32;
    QuadratureBudget budget{};
};

/// CSI-averaged MI of a fixed reference family. The adaptive family picks,
/// independently at every CSI node, the ring count M <= m_max that maximizes
/// the MI (ties to the smaller M).
inline double mi_fixed_family(Family family, double beta, double sigma2,
                              const FamilyOptions& fopts = {}) {
    const auto gl =
        num::gauss_quadrature(num::QuadKind::gauss_laguerre, fopts.outer_nodes);
    std::vector<RadialDistribution> dists;
    switch (family) {
        case Family::psk: dists.push_back(constellation::psk()); break;
        case Family::uniform:
            dists.push_back(constellation::uniform_disk(fopts.uniform_levels));
            break;
        case Family::gaussian:
            dists.push_back(constellation::gaussian_radial(fopts.gaussian_levels));
            break;
        case Family::amqam_adaptive:
            for (int m = 1; m <= fopts.m_max; ++m)
                dists.push_back(constellation::amqam(m));
            break;
    }
    double acc = 0.0;
    for (int k = 0; k < fopts.outer_nodes; ++k) {
        MiContext ctx{1, beta, sigma2, (1.0 - beta) * gl.nodes[k], fopts.budget};
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& d : dists)
            best = std::max(best, exact::mi_radial(d, ctx));
        acc += gl.weights[k] * best;
    }
    return acc;
}

/// Ring count selected by the adaptive family at each CSI node.
inline std::vector<int> amqam_selection_profile(double beta, double sigma2,
                                                int m_max,
                                                const FamilyOptions& fopts = {}) {
    if (m_max < 1) throw DomainError("amqam_selection_profile: m_max must be >= 1");
    const auto gl =
        num::gauss_quadrature(num::QuadKind::gauss_laguerre, fopts.outer_nodes);
    std::vector<RadialDistribution> dists;
    for (int m = 1; m <= m_max; ++m) dists.push_back(constellation::amqam(m));
    std::vector<int> profile(fopts.outer_nodes, 1);
    for (int k = 0; k < fopts.outer_nodes; ++k) {
        MiContext ctx{1, beta, sigma2, (1.0 - beta) * gl.nodes[k], fopts.budget};
        double best = -std::numeric_limits<double>::infinity();
        for (int m = 1; m <= m_max; ++m) {
            const double v = exact::mi_radial(dists[m - 1], ctx);
            if (v > best) {
                best = v;
                profile[k] = m;
            }
        }
    }
    return profile;
}

/// Coherent multicode capacity K E{ln(1 + v/(K L sigma2))}, v ~ Gamma(L, 1).
inline double coherent_cdma_capacity(int K, int L, double sigma2) {
    if (K < 1 || L < 1) throw DomainError("coherent_cdma_capacity: K, L >= 1");
    if (!(sigma2 > 0.0)) throw DomainError("coherent_cdma_capacity: sigma2 > 0");
    const double c = static_cast<double>(K) * L * sigma2;
    const double lognorm = std::lgamma(static_cast<double>(L));
    auto integrand = [&](double v) {
        if (v <= 0.0) return 0.0;
        return std::log1p(v / c) * std::exp((L - 1.0) * std::log(v) - v - lognorm);
    };
    return K * num::integrate_semiinfinite(integrand, 1e-11).value;
}

/// Ergodic capacity of the K-by-L independent-antenna Gaussian channel via
/// the squared-Laguerre eigenvalue density; `normalized` divides the SNR per
/// receive branch so the received power does not grow with L.
inline double spacetime_capacity(int K, int L, double sigma2, bool normalized) {
    if (K < 1 || L < 1) throw DomainError("spacetime_capacity: K, L >= 1");
    if (!(sigma2 > 0.0)) throw DomainError("spacetime_capacity: sigma2 > 0");
    const int m = std::min(K, L), n = std::max(K, L);
    const int alpha = n - m;
    const double c = normalized ? static_cast<double>(K) * L * sigma2
                                : static_cast<double>(K) * sigma2;
    std::vector<double> lognorm(m);
    for (int k = 0; k < m; ++k)
        lognorm[k] = std::lgamma(k + 1.0) - std::lgamma(k + alpha + 1.0);
    auto density = [&](double u) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            const double lk = num::laguerre(k, alpha, u);
            s += std::exp(lognorm[k]) * lk * lk;
        }
        return s;
    };
    auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        return std::log1p(u / c) * density(u) * std::exp(alpha * std::log(u) - u);
    };
    return num::integrate_semiinfinite(integrand, 1e-11).value;
}

}  // namespace fadecap::capacity
