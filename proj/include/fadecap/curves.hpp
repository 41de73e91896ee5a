#pragma once

// Curve sweeps behind the CLI: SNR grids, per-figure presets, and the
// deterministic CSV/JSON emission.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fadecap/bounds.hpp"
#include "fadecap/capacity.hpp"
#include "fadecap/constellations.hpp"
#include "fadecap/errors.hpp"
#include "fadecap/numerics.hpp"
#include "fadecap/rng.hpp"
#include "fadecap/thread_pool.hpp"

namespace fadecap::curves {

using json = nlohmann::ordered_json;

inline double snr_db_to_sigma2(double db) { return std::pow(10.0, -db / 10.0); }

struct SnrGrid {
    double start = 0.0, stop = 20.0, step = 1.0;

    std::vector<double> values() const {
        if (!(step > 0.0) || stop < start)
            throw ConfigError("SnrGrid: need step > 0 and stop >= start");
        std::vector<double> v;
        for (int i = 0;; ++i) {
            const double x = start + i * step;
            if (x > stop + 1e-9) break;
            v.push_back(x);
        }
        return v;
    }
};

struct RunConfig {
    std::string mode = "fig1-7";  // fig1-7 | fig8-13 | fig14-21 | custom
    std::vector<double> beta = {1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0};
    int k = 1;
    int l = 1;
    SnrGrid snr{};
    int m_max = 10;
    int max_points = 4;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json
    bool quick = false;
};

struct CapacityCurve {
    std::vector<double> x_axis;  // SNR grid in dB
    std::vector<std::pair<std::string, std::vector<double>>> series;
    json metadata;
};

/// Floats printed with 9 significant digits; locale-independent.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string to_csv(const CapacityCurve& c) {
    std::string out;
    out += "# config: " + c.metadata.dump() + "\n";
    out += "snr_db";
    for (const auto& s : c.series) out += "," + s.first;
    out += "\n";
    for (std::size_t i = 0; i < c.x_axis.size(); ++i) {
        out += format_value(c.x_axis[i]);
        for (const auto& s : c.series) out += "," + format_value(s.second[i]);
        out += "\n";
    }
    return out;
}

inline json to_json(const CapacityCurve& c) {
    json j;
    j["x_axis"] = c.x_axis;
    json series = json::object();
    for (const auto& s : c.series) series[s.first] = s.second;
    j["series"] = std::move(series);
    j["metadata"] = c.metadata;
    return j;
}

namespace detail {

struct SweepSettings {
    capacity::OptimizerOptions opt;
    capacity::FamilyOptions fam;
    int outer_nodes = 32;
};

inline SweepSettings sweep_settings(const RunConfig& cfg) {
    SweepSettings s;
    s.opt.seed = cfg.seed;
    if (cfg.quick) {
        s.opt.restarts = 3;
        s.opt.warm_restarts = 2;
        s.opt.max_evals = 200;
        s.opt.simplex_tol = 1e-5;
        s.opt.value_tol = 1e-6;
        s.opt.search_budget = {2e-6, 1e-5, 1e-6, 2000};
        s.opt.final_budget = {1e-8, 1e-7, 1e-8, 4000};
        s.opt.node_weight_cutoff = 1e-9;
        s.opt.search_outer_nodes = 8;
        s.opt.certify = false;
        s.fam.uniform_levels = 24;
        s.fam.gaussian_levels = 24;
        s.fam.budget = {1e-8, 1e-7, 1e-8, 4000};
    }
    s.fam.m_max = cfg.m_max;
    s.fam.outer_nodes = s.outer_nodes;
    return s;
}

inline json settings_metadata(const RunConfig& cfg, const SweepSettings& s) {
    json m;
    m["mode"] = cfg.mode;
    m["beta"] = cfg.beta;
    m["K"] = cfg.k;
    m["L"] = cfg.l;
    m["snr_db"] = {{"start", cfg.snr.start}, {"stop", cfg.snr.stop}, {"step", cfg.snr.step}};
    m["m_max"] = cfg.m_max;
    m["max_points"] = cfg.max_points;
    m["seed"] = cfg.seed;
    m["format"] = cfg.format;
    m["quick"] = cfg.quick;
    m["optimizer"] = {{"restarts", s.opt.restarts},
                      {"max_evals", s.opt.max_evals},
                      {"simplex_tol", s.opt.simplex_tol},
                      {"value_tol", s.opt.value_tol},
                      {"merge_prob", s.opt.merge_prob},
                      {"merge_radius", s.opt.merge_radius}};
    m["quadrature"] = {{"search_tol", s.opt.search_budget.tol_single},
                       {"final_tol", s.opt.final_budget.tol_single},
                       {"outer_nodes", s.outer_nodes}};
    m["family_levels"] = {{"uniform", s.fam.uniform_levels},
                          {"gaussian", s.fam.gaussian_levels}};
    m["csi_model"] = "per-path CSI variance (1-beta)/L";
    return m;
}

// Maximum of the MMSE lower bound over the adaptive-ring family lifted to a
// product constellation: closed form in the per-dimension entropy, minimum
// distance and the CSI sum, so no product enumeration is needed.
inline double product_ring_bound(int k_dim, int m_max, int l_paths, double beta,
                                 double sigma2, double alpha_norm2) {
    const double s_csi = alpha_norm2 / (beta / l_paths + k_dim * sigma2);
    const double log_pie = std::log(num::kPi * std::exp(1.0));
    double best = 0.0;
    for (int m = 1; m <= m_max; ++m) {
        const auto rings = constellation::amqam(m);
        double h_ring = 0.0;
        for (const auto& pt : rings.points()) h_ring -= pt.p * std::log(pt.p);
        const double ring_gap = rings.points()[0].r;  // radii are i * gap
        for (int q = 2; q <= 256; q *= 2) {
            const double d1 = ring_gap * std::min(2.0 * std::sin(num::kPi / q),
                                                  m == 1 ? 2.0 : 1.0);
            const double d = d1 / std::sqrt(static_cast<double>(k_dim));
            const double h = k_dim * (std::log(static_cast<double>(q)) + h_ring);
            const double v =
                h + k_dim * std::log(num::kPi) + 2.0 * k_dim * std::log(d) -
                k_dim * std::log(4.0) - std::lgamma(k_dim + 1.0) -
                k_dim * log_pie + k_dim * std::log(static_cast<double>(k_dim)) -
                k_dim * std::log(d * d * k_dim / (4.0 * (k_dim + 1.0)) +
                                 1.0 / (1.0 + s_csi));
            best = std::max(best, v);
        }
    }
    return best;
}

// Maximum of the on-off lower bound over its energy parameter m.
inline double onoff_bound_max(int k_dim, int l_paths, double beta, double sigma2,
                              double alpha_norm2) {
    const double m_lo = 1.02 / (2.0 * l_paths * sigma2);
    double best = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double m = m_lo * std::pow(400.0, i / 39.0);
        bounds::OnoffChannel ch{std::log(static_cast<double>(k_dim)), m, l_paths,
                                beta, sigma2, alpha_norm2};
        best = std::max(best, bounds::lower_bound_onoff(ch).value);
    }
    return best;
}

}  // namespace detail

/// Single-code flat-fading sweep (one curve file per beta): optimized
/// capacity with and without CSI feedback plus the fixed reference families.
inline CapacityCurve flat_fading_curve(double beta, const RunConfig& cfg) {
    const auto s = detail::sweep_settings(cfg);
    const auto snrs = cfg.snr.values();
    CapacityCurve curve;
    curve.x_axis = snrs;
    curve.metadata = detail::settings_metadata(cfg, s);
    curve.metadata["beta"] = beta;
    std::vector<std::string> names = {"optimal-TR", "optimal-R", "gaussian",
                                      "psk",        "uniform",   "amqam"};
    std::vector<std::vector<double>> cols(names.size(),
                                          std::vector<double>(snrs.size()));
    par::parallel_for(snrs.size(), cfg.threads, [&](std::size_t i) {
        const double sigma2 = snr_db_to_sigma2(snrs[i]);
        capacity::OptimizerOptions opt = s.opt;
        opt.seed = rng::detail::mix3(cfg.seed, 0x66696731,
                                     static_cast<std::uint64_t>(i) * 131 +
                                         static_cast<std::uint64_t>(beta * 1e6));
        cols[0][i] = capacity::capacity_tr(beta, sigma2, s.outer_nodes, opt);
        cols[1][i] = capacity::capacity_r(beta, sigma2, cfg.max_points,
                                          s.outer_nodes, opt)
                         .value;
        cols[2][i] = capacity::mi_fixed_family(capacity::Family::gaussian, beta,
                                               sigma2, s.fam);
        cols[3][i] =
            capacity::mi_fixed_family(capacity::Family::psk, beta, sigma2, s.fam);
        cols[4][i] = capacity::mi_fixed_family(capacity::Family::uniform, beta,
                                               sigma2, s.fam);
        cols[5][i] = capacity::mi_fixed_family(capacity::Family::amqam_adaptive,
                                               beta, sigma2, s.fam);
    });
    for (std::size_t c = 0; c < names.size(); ++c)
        curve.series.emplace_back(names[c], std::move(cols[c]));
    return curve;
}

/// Coherent dimension sweeps: one series per swept dimension value.
/// kind: "st-k1" (L swept), "st-l1" (K swept), "st-kl", "cdma-k1",
/// "cdma-l1", "cdma-kl".
inline CapacityCurve coherent_dimension_curve(const std::string& kind,
                                              const RunConfig& cfg) {
    const auto snrs = cfg.snr.values();
    CapacityCurve curve;
    curve.x_axis = snrs;
    curve.metadata = detail::settings_metadata(cfg, detail::sweep_settings(cfg));
    curve.metadata["kind"] = kind;
    const bool spacetime = kind.rfind("st-", 0) == 0;
    const std::string sweep = kind.substr(kind.find('-') + 1);
    std::vector<std::vector<double>> cols(10, std::vector<double>(snrs.size()));
    par::parallel_for(snrs.size() * 10, cfg.threads, [&](std::size_t t) {
        const std::size_t i = t % snrs.size();
        const int dim = static_cast<int>(t / snrs.size()) + 1;
        const double sigma2 = snr_db_to_sigma2(snrs[i]);
        int k = 1, l = 1;
        if (sweep == "k1") l = dim;
        else if (sweep == "l1") k = dim;
        else k = l = dim;
        cols[dim - 1][i] = spacetime
                               ? capacity::spacetime_capacity(k, l, sigma2, true)
                               : capacity::coherent_cdma_capacity(k, l, sigma2);
    });
    for (int dim = 1; dim <= 10; ++dim) {
        std::string name = (sweep == "k1" ? "L" : sweep == "l1" ? "K" : "KL") +
                           std::to_string(dim);
        curve.series.emplace_back(name, std::move(cols[dim - 1]));
    }
    return curve;
}

/// Bound-estimated capacity against constellation dimension K at fixed L:
/// the larger of the product-ring MMSE bound and the on-off bound, averaged
/// over the CSI-norm law. beta = 0 uses the exact coherent value instead.
inline CapacityCurve estimated_dimension_curve(double beta, const RunConfig& cfg,
                                               bool coherent_exact) {
    const auto snrs = cfg.snr.values();
    const int l_paths = cfg.l;
    CapacityCurve curve;
    curve.x_axis = snrs;
    curve.metadata = detail::settings_metadata(cfg, detail::sweep_settings(cfg));
    curve.metadata["beta"] = beta;
    curve.metadata["estimator"] = coherent_exact
                                      ? "coherent closed form"
                                      : "max(product-ring bound, on-off bound)";
    // CSI-norm nodes: ||alpha||^2 = (1-beta) t / L with t ~ Gamma(L, 1)
    const auto gl = num::gauss_laguerre_general(32, l_paths - 1.0);
    const double lognorm = std::lgamma(static_cast<double>(l_paths));
    std::vector<std::vector<double>> cols(10, std::vector<double>(snrs.size()));
    par::parallel_for(snrs.size() * 10, cfg.threads, [&](std::size_t t) {
        const std::size_t i = t % snrs.size();
        const int k_dim = static_cast<int>(t / snrs.size()) + 1;
        const double sigma2 = snr_db_to_sigma2(snrs[i]);
        if (coherent_exact) {
            cols[k_dim - 1][i] =
                capacity::coherent_cdma_capacity(k_dim, l_paths, sigma2);
            return;
        }
        auto estimate = [&](double a) {
            return std::max(
                0.0,
                std::max(detail::product_ring_bound(k_dim, cfg.m_max, l_paths, beta,
                                                    sigma2, a),
                         detail::onoff_bound_max(k_dim, l_paths, beta, sigma2, a)));
        };
        if (beta == 1.0) {
            cols[k_dim - 1][i] = estimate(0.0);  // degenerate CSI law
            return;
        }
        double acc = 0.0;
        for (std::size_t n = 0; n < gl.nodes.size(); ++n) {
            const double w = gl.weights[n] * std::exp(-lognorm);
            acc += w * estimate((1.0 - beta) * gl.nodes[n] / l_paths);
        }
        cols[k_dim - 1][i] = acc;
    });
    for (int k = 1; k <= 10; ++k)
        curve.series.emplace_back("K" + std::to_string(k), std::move(cols[k - 1]));
    return curve;
}

struct OutputFile {
    std::string name;
    CapacityCurve curve;
};

/// Assemble every curve of the selected mode.
inline std::vector<OutputFile> make_curves(const RunConfig& cfg) {
    std::vector<OutputFile> files;
    if (cfg.mode == "fig1-7") {
        int idx = 1;
        for (double beta : cfg.beta) {
            files.push_back({"fig0" + std::to_string(idx), flat_fading_curve(beta, cfg)});
            ++idx;
        }
    } else if (cfg.mode == "fig8-13") {
        const char* kinds[6] = {"st-k1", "st-l1", "st-kl", "cdma-k1", "cdma-l1", "cdma-kl"};
        int idx = 8;
        for (const char* kind : kinds) {
            std::string name = idx < 10 ? "fig0" + std::to_string(idx)
                                        : "fig" + std::to_string(idx);
            files.push_back({name, coherent_dimension_curve(kind, cfg)});
            ++idx;
        }
    } else if (cfg.mode == "fig14-21") {
        RunConfig c = cfg;
        c.l = 10;
        files.push_back({"fig14", estimated_dimension_curve(0.0, c, true)});
        std::vector<double> betas = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
        int idx = 15;
        for (double beta : betas) {
            files.push_back(
                {"fig" + std::to_string(idx), estimated_dimension_curve(beta, c, false)});
            ++idx;
        }
    } else if (cfg.mode == "custom") {
        for (double beta : cfg.beta)
            files.push_back({"custom_beta" + format_value(beta),
                             flat_fading_curve(beta, cfg)});
    } else {
        throw ConfigError("make_curves: unknown mode " + cfg.mode);
    }
    return files;
}

/// Write all curves of the selected mode; returns the file paths.
inline std::vector<std::string> cmd_curve(const RunConfig& cfg) {
    auto files = make_curves(cfg);
    std::vector<std::string> paths;
    for (const auto& f : files) {
        const std::string ext = cfg.format == "json" ? ".json" : ".csv";
        const std::string path = cfg.out_dir + "/" + f.name + ext;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cmd_curve: cannot open " + path);
        if (cfg.format == "json")
            out << to_json(f.curve).dump(2) << "\n";
        else
            out << to_csv(f.curve);
        paths.push_back(path);
    }
    return paths;
}

struct AsymptoticRow {
    double m;
    int l;
    double log_k;          // 2 m L
    double vanishing_ub;   // unit fourth moment reference, 1/(2 L sigma^4)
    double onoff_lb;       // closed asymptotic form
    double gap_to_awgn;    // 1/sigma2 - onoff_lb
};

/// Table of the wideband asymptotics for a list of (m, L) pairs.
inline std::vector<AsymptoticRow> cmd_asymptotic(
    const std::vector<std::pair<double, int>>& ml, double sigma2) {
    std::vector<AsymptoticRow> rows;
    for (const auto& [m, l] : ml) {
        AsymptoticRow r;
        r.m = m;
        r.l = l;
        r.log_k = 2.0 * m * l;
        r.vanishing_ub = 1.0 / (2.0 * l * sigma2 * sigma2);
        r.onoff_lb = bounds::asymptotic_onoff_bound(m, l, sigma2);
        r.gap_to_awgn = 1.0 / sigma2 - r.onoff_lb;
        rows.push_back(r);
    }
    return rows;
}

inline std::string asymptotic_table_csv(const std::vector<AsymptoticRow>& rows) {
    std::string out = "m,L,ln_K,vanishing_upper,onoff_lower,gap_to_awgn\n";
    for (const auto& r : rows) {
        out += format_value(r.m) + "," + std::to_string(r.l) + "," +
               format_value(r.log_k) + "," + format_value(r.vanishing_ub) + "," +
               format_value(r.onoff_lb) + "," + format_value(r.gap_to_awgn) + "\n";
    }
    return out;
}

}  // namespace fadecap::curves
