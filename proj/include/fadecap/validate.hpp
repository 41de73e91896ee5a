#pragma once

// Self-check battery behind `validate`: bound ordering on random cases,
// Monte Carlo cross-checks of the exact MI, optimality residuals of the
// optimizer output, and the asymptotic monotonicity of the closed forms.
// Failures are report entries, never exceptions.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fadecap/bounds.hpp"
#include "fadecap/capacity.hpp"
#include "fadecap/channel.hpp"
#include "fadecap/constellations.hpp"
#include "fadecap/exact_mi.hpp"
#include "fadecap/mc_oracle.hpp"
#include "fadecap/rng.hpp"

namespace fadecap::validate {

using json = nlohmann::ordered_json;

struct ValidateOptions {
    bool quick = false;
    std::uint64_t seed = 1;
    // Test hook: scales sigma2 inside the exact-MI path of the sandwich check
    // only, so the harness can prove the check catches a broken build.
    double debug_mi_sigma2_scale = 1.0;
};

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;   // worst observed slack (sign convention per check)
    double threshold = 0.0;
    std::string details;
};

struct ValidateReport {
    std::vector<Check> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline json to_json(const ValidateReport& rep) {
    json j;
    j["all_passed"] = rep.all_passed();
    json arr = json::array();
    for (const auto& c : rep.checks)
        arr.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"details", c.details}});
    j["checks"] = std::move(arr);
    return j;
}

namespace detail {

struct RandomCase {
    constellation::RadialDistribution dist;
    exact::MiContext ctx;
    int lift_phases;
};

inline RandomCase random_case(std::uint64_t seed, std::uint64_t index) {
    rng::Stream rs(seed, index);
    const int n_points = 2 + static_cast<int>(rs.uniform() * 3.0);
    std::vector<constellation::RadialPoint> pts;
    double energy = 0.0;
    std::vector<double> p(n_points), r(n_points);
    double mass = 0.0;
    for (int i = 0; i < n_points; ++i) {
        p[i] = 0.1 + rs.uniform();
        mass += p[i];
        r[i] = 0.2 + 2.3 * rs.uniform() + 1.1 * i;
    }
    for (int i = 0; i < n_points; ++i) {
        p[i] /= mass;
        energy += p[i] * r[i] * r[i];
    }
    for (int i = 0; i < n_points; ++i)
        pts.push_back({r[i] / std::sqrt(energy), p[i]});
    RandomCase c{constellation::RadialDistribution(std::move(pts)),
                 exact::MiContext{}, 4};
    c.ctx.L = rs.uniform() < 0.5 ? 1 : 2;
    c.ctx.beta = 0.1 + 0.9 * rs.uniform();
    c.ctx.sigma2 = std::pow(10.0, -1.0 + 1.3 * rs.uniform());
    c.ctx.alpha_norm2 = 1.5 * rs.uniform();
    c.lift_phases = rs.uniform() < 0.5 ? 4 : 8;
    return c;
}

}  // namespace detail

/// Run the full battery. Never throws; every outcome lands in the report.
inline ValidateReport run_validation(const ValidateOptions& opts = {}) {
    ValidateReport rep;

    // --- bound sandwich: max(0, lower) <= mi <= upper on random cases ---
    {
        Check c;
        c.name = "bound-sandwich";
        c.threshold = 1e-6;
        const int cases = opts.quick ? 12 : 50;
        double worst = -1e300;
        std::string detail;
        try {
            for (int i = 0; i < cases; ++i) {
                auto rc = detail::random_case(opts.seed, 1000 + i);
                exact::MiContext mi_ctx = rc.ctx;
                mi_ctx.sigma2 *= opts.debug_mi_sigma2_scale;
                const double mi = exact::mi_radial(rc.dist, mi_ctx);
                auto lifted = constellation::lift_radial(rc.dist, rc.lift_phases);
                auto params = channel::ChannelParams::with_alpha_norm2(
                    1, rc.ctx.L, rc.ctx.beta, rc.ctx.sigma2, rc.ctx.alpha_norm2);
                const double upper = bounds::upper_bound_quadratic(lifted, params).value;
                const double lower =
                    bounds::lower_bound_mmse(lifted, params,
                                             bounds::LowerVariant::discrete)
                        .value;
                worst = std::max(worst, std::max(0.0, lower) - mi);
                worst = std::max(worst, mi - upper);
            }
            c.measured = worst;
            c.pass = worst <= c.threshold;
            c.details = "worst sandwich violation over " + std::to_string(cases) +
                        " random cases";
        } catch (const std::exception& e) {
            c.pass = false;
            c.details = std::string("exception: ") + e.what();
        }
        rep.checks.push_back(c);
    }

    // --- Monte Carlo cross-check of the exact MI ---
    {
        Check c;
        c.name = "mc-cross-check";
        const std::uint64_t n = opts.quick ? 100000 : 1000000;
        c.threshold = opts.quick ? 4.0 : 3.0;  // standard errors
        double worst = 0.0;
        try {
            struct Case {
                double beta, sigma2, a;
                int L;
            };
            std::vector<Case> cases = {{1.0, 1.0, 0.0, 1}, {0.5, 1.0, 0.8, 1}};
            if (!opts.quick) cases.push_back({0.5, 0.5, 0.5, 2});
            int idx = 0;
            for (const auto& cs : cases) {
                auto dist = constellation::RadialDistribution(
                    {{0.0, 0.5}, {std::sqrt(2.0), 0.5}});
                exact::MiContext ctx{cs.L, cs.beta, cs.sigma2, cs.a, {}};
                const double mi = exact::mi_radial(dist, ctx);
                auto lifted = constellation::lift_radial(dist, 32);
                auto params = channel::ChannelParams::with_alpha_norm2(
                    1, cs.L, cs.beta, cs.sigma2, cs.a);
                auto est = mc::mc_mutual_information(lifted, params, n,
                                                     opts.seed + 77 + idx++);
                worst = std::max(worst,
                                 std::fabs(est.estimate - mi) / est.std_error);
            }
            c.measured = worst;
            c.pass = worst <= c.threshold;
            c.details = "worst |mc - exact| in standard errors, n = " +
                        std::to_string(n);
        } catch (const std::exception& e) {
            c.pass = false;
            c.details = std::string("exception: ") + e.what();
        }
        rep.checks.push_back(c);
    }

    // --- optimality residuals of the optimizer output ---
    {
        Check c;
        c.name = "optimality-residual";
        c.threshold = 1e-3;
        try {
            capacity::OptimizerOptions opt;
            opt.seed = opts.seed;
            if (opts.quick) {
                opt.restarts = 4;
                opt.max_evals = 300;
            }
            auto res = capacity::optimize_capacity(0.0, 1.0, 10.0, 4, opt);
            c.measured = std::max(res.residual_report.max_interior_violation,
                                  res.residual_report.max_support_violation);
            c.pass = c.measured <= c.threshold;
            c.details = "noncoherent, sigma2 = 10, support size " +
                        std::to_string(res.argmax.size());
        } catch (const std::exception& e) {
            c.pass = false;
            c.details = std::string("exception: ") + e.what();
        }
        rep.checks.push_back(c);
    }

    // --- asymptotics: monotone on-off bound, halving vanishing bound ---
    {
        Check c;
        c.name = "asymptotic-monotonicity";
        c.threshold = 0.0;
        try {
            const double b1 = bounds::asymptotic_onoff_bound(4, 100, 1.0);
            const double b2 = bounds::asymptotic_onoff_bound(10, 400, 1.0);
            const double b3 = bounds::asymptotic_onoff_bound(50, 1000, 1.0);
            auto cst = constellation::lift_radial(constellation::psk(), 4);
            auto v = bounds::fourth_moment_vanishing_bound(cst, {4, 8, 16}, 1.0);
            const bool mono = b1 < b2 && b2 < b3 && b3 < 1.0;
            const bool halves = std::fabs(v[1] - 0.5 * v[0]) < 1e-15 &&
                                std::fabs(v[2] - 0.5 * v[1]) < 1e-15;
            c.pass = mono && halves && b3 > 0.85;
            c.measured = b3;
            c.details = "on-off bound sequence and 1/L halving";
        } catch (const std::exception& e) {
            c.pass = false;
            c.details = std::string("exception: ") + e.what();
        }
        rep.checks.push_back(c);
    }

    return rep;
}

}  // namespace fadecap::validate
