#pragma once

// Input distributions: radial mass-point laws for the K = 1 machinery, their
// phase-lifted finite realizations, and the orthogonal on-off constellation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fadecap/errors.hpp"

namespace fadecap::constellation {

struct RadialPoint {
    double r;  // radius, >= 0
    double p;  // probability, > 0
};

/// Discrete law of the symbol magnitude |x|. Radii are strictly increasing,
/// probabilities sum to one; duplicate radii are merged and zero-probability
/// points dropped at construction.
class RadialDistribution {
public:
    explicit RadialDistribution(std::vector<RadialPoint> pts) {
        for (const auto& q : pts) {
            if (!(q.r >= 0.0) || !std::isfinite(q.r))
                throw DomainError("RadialDistribution: radii must be finite and >= 0");
            if (q.p < 0.0 || !std::isfinite(q.p))
                throw DomainError("RadialDistribution: probabilities must be >= 0");
        }
        std::sort(pts.begin(), pts.end(),
                  [](const RadialPoint& a, const RadialPoint& b) { return a.r < b.r; });
        for (const auto& q : pts) {
            if (q.p == 0.0) continue;
            if (!points_.empty() && q.r - points_.back().r < 1e-300) {
                points_.back().p += q.p;
            } else {
                points_.push_back(q);
            }
        }
        if (points_.empty()) throw DomainError("RadialDistribution: no mass");
        double total = 0.0;
        for (const auto& q : points_) total += q.p;
        if (std::fabs(total - 1.0) > 1e-12)
            throw DomainError("RadialDistribution: probabilities must sum to 1");
        for (auto& q : points_) energy_ += q.p * q.r * q.r;
    }

    const std::vector<RadialPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool includes_zero() const { return points_.front().r == 0.0; }
    double energy() const { return energy_; }

    double fourth_moment() const {
        double m4 = 0.0;
        for (const auto& q : points_) m4 += q.p * q.r * q.r * q.r * q.r;
        return m4;
    }

    /// Convex mixture t*this + (1-t)*other.
    RadialDistribution mixed_with(const RadialDistribution& other, double t) const {
        std::vector<RadialPoint> pts;
        for (const auto& q : points_) pts.push_back({q.r, t * q.p});
        for (const auto& q : other.points_) pts.push_back({q.r, (1.0 - t) * q.p});
        return RadialDistribution(std::move(pts));
    }

private:
    std::vector<RadialPoint> points_;
    double energy_ = 0.0;
};

/// Symbols on the unit circle: the continuous-phase PSK magnitude law.
inline RadialDistribution psk() { return RadialDistribution({{1.0, 1.0}}); }

/// Radial law of the uniform distribution on the disk of radius sqrt(2),
/// discretized into n equal-probability shells at their conditional
/// root-mean-square radii. Unit energy by construction.
inline RadialDistribution uniform_disk(int n_levels) {
    if (n_levels < 1) throw DomainError("uniform_disk: n_levels must be >= 1");
    std::vector<RadialPoint> pts;
    const double n = n_levels;
    for (int k = 1; k <= n_levels; ++k)
        pts.push_back({std::sqrt((2.0 * k - 1.0) / n), 1.0 / n});
    return RadialDistribution(std::move(pts));
}

/// M rings with radii r_m = m sqrt(6M / ((M+1)(3M^2+M-1))) and probabilities
/// p_m = (2m-1)/M^2; unit energy for every M.
inline RadialDistribution amqam(int M) {
    if (M < 1) throw DomainError("amqam: M must be >= 1");
    const double m = M;
    const double scale = std::sqrt(6.0 * m / ((m + 1.0) * (3.0 * m * m + m - 1.0)));
    std::vector<RadialPoint> pts;
    for (int i = 1; i <= M; ++i)
        pts.push_back({i * scale, (2.0 * i - 1.0) / (m * m)});
    return RadialDistribution(std::move(pts));
}

/// Radial law of the unit-energy proper complex Gaussian (|x|^2 unit-mean
/// exponential), quantized into n equal-probability shells at conditional
/// RMS radii.
inline RadialDistribution gaussian_radial(int n_points) {
    if (n_points < 2) throw DomainError("gaussian_radial: n_points must be >= 2");
    std::vector<RadialPoint> pts;
    const double n = n_points;
    // G(e) = integral of t e^{-t}: shell mass of the energy t between edges.
    auto g = [](double e) { return (1.0 + e) * std::exp(-e); };
    double lo = 0.0;
    for (int k = 1; k <= n_points; ++k) {
        double hi = (k == n_points) ? std::numeric_limits<double>::infinity()
                                    : -std::log1p(-static_cast<double>(k) / n);
        double mass = (k == n_points) ? g(lo) : g(lo) - g(hi);
        pts.push_back({std::sqrt(mass * n), 1.0 / n});
        lo = hi;
    }
    return RadialDistribution(std::move(pts));
}

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Finite K-dimensional constellation with symbol probabilities and cached
/// second/fourth moments.
class Constellation {
public:
    Constellation(std::vector<CVector> symbols, std::vector<double> probabilities)
        : symbols_(std::move(symbols)), probs_(std::move(probabilities)) {
        if (symbols_.empty() || symbols_.size() != probs_.size())
            throw DimensionError("Constellation: symbols/probabilities size mismatch");
        dim_ = static_cast<int>(symbols_[0].size());
        double total = 0.0;
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (static_cast<int>(symbols_[i].size()) != dim_)
                throw DimensionError("Constellation: symbols must share one dimension");
            if (!(probs_[i] > 0.0))
                throw DomainError("Constellation: probabilities must be positive");
            total += probs_[i];
        }
        if (std::fabs(total - 1.0) > 1e-12)
            throw DomainError("Constellation: probabilities must sum to 1");
        compute_moments();
    }

    int dim() const { return dim_; }
    std::size_t size() const { return symbols_.size(); }
    const std::vector<CVector>& symbols() const { return symbols_; }
    const std::vector<double>& probabilities() const { return probs_; }

    const CVector& mean() const { return mean_; }
    const CMatrix& covariance() const { return covariance_; }
    double energy() const { return energy_; }
    double fourth_moment() const { return fourth_moment_; }
    double min_distance() const { return min_distance_; }

    /// Discrete entropy -sum p ln p in nats.
    double entropy() const {
        double h = 0.0;
        for (double p : probs_) h -= p * std::log(p);
        return h;
    }

private:
    void compute_moments() {
        mean_ = CVector::Zero(dim_);
        for (std::size_t i = 0; i < symbols_.size(); ++i) mean_ += probs_[i] * symbols_[i];
        covariance_ = CMatrix::Zero(dim_, dim_);
        energy_ = 0.0;
        fourth_moment_ = 0.0;
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            CVector d = symbols_[i] - mean_;
            covariance_ += probs_[i] * (d * d.adjoint());
            double e = symbols_[i].squaredNorm();
            energy_ += probs_[i] * e;
            fourth_moment_ += probs_[i] * e * e;
        }
        min_distance_ = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            for (std::size_t j = i + 1; j < symbols_.size(); ++j)
                min_distance_ =
                    std::min(min_distance_, (symbols_[i] - symbols_[j]).norm());
    }

    std::vector<CVector> symbols_;
    std::vector<double> probs_;
    int dim_ = 0;
    CVector mean_;
    CMatrix covariance_;
    double energy_ = 0.0;
    double fourth_moment_ = 0.0;
    double min_distance_ = 0.0;
};

struct Moments {
    double energy;
    double fourth_moment;
    CVector mean;
    CMatrix covariance;
    double min_distance;
};

/// Exact weighted sums recomputed from scratch (cross-check for the cached
/// values held by Constellation).
inline Moments moments(const Constellation& c) {
    CVector mean = CVector::Zero(c.dim());
    for (std::size_t i = 0; i < c.size(); ++i)
        mean += c.probabilities()[i] * c.symbols()[i];
    CMatrix cov = CMatrix::Zero(c.dim(), c.dim());
    double energy = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        CVector d = c.symbols()[i] - mean;
        cov += c.probabilities()[i] * (d * d.adjoint());
        double e = c.symbols()[i].squaredNorm();
        energy += c.probabilities()[i] * e;
        m4 += c.probabilities()[i] * e * e;
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            dmin = std::min(dmin, (c.symbols()[i] - c.symbols()[j]).norm());
    return {energy, m4, std::move(mean), std::move(cov), dmin};
}

/// Zero symbol with probability p0 = 1 - 1/E plus K orthogonal symbols
/// sqrt(E) e_i, each with probability 1/(K E), where E = 2 m L sigma2.
/// Average energy is exactly 1 and the fourth moment is exactly E.
inline Constellation orthogonal_onoff(int K, double m, int L, double sigma2) {
    if (K < 1 || L < 1) throw DomainError("orthogonal_onoff: K, L must be >= 1");
    if (!(sigma2 > 0.0)) throw DomainError("orthogonal_onoff: sigma2 must be positive");
    const double energy = 2.0 * m * L * sigma2;
    if (!(m > 1.0 / (2.0 * L * sigma2)))
        throw PreconditionError(
            "orthogonal_onoff: need m > 1/(2 L sigma2) so that E > 1");
    std::vector<CVector> symbols;
    std::vector<double> probs;
    symbols.push_back(CVector::Zero(K));
    probs.push_back(1.0 - 1.0 / energy);
    for (int i = 0; i < K; ++i) {
        CVector s = CVector::Zero(K);
        s(i) = std::sqrt(energy);
        symbols.push_back(std::move(s));
        probs.push_back(1.0 / (K * energy));
    }
    return {std::move(symbols), std::move(probs)};
}

/// Realize a radial law as a K = 1 constellation with Q equispaced phases per
/// ring. Preserves energy and fourth moment exactly; mean is zero for Q >= 2.
inline Constellation lift_radial(const RadialDistribution& rd, int phases_per_ring) {
    if (phases_per_ring < 1) throw DomainError("lift_radial: need at least one phase");
    std::vector<CVector> symbols;
    std::vector<double> probs;
    for (const auto& pt : rd.points()) {
        if (pt.r == 0.0) {
            CVector s = CVector::Zero(1);
            symbols.push_back(std::move(s));
            probs.push_back(pt.p);
            continue;
        }
        for (int q = 0; q < phases_per_ring; ++q) {
            double phi = 2.0 * 3.14159265358979323846 * q / phases_per_ring;
            CVector s(1);
            s(0) = std::polar(pt.r, phi);
            symbols.push_back(std::move(s));
            probs.push_back(pt.p / phases_per_ring);
        }
    }
    return {std::move(symbols), std::move(probs)};
}

inline nlohmann::ordered_json to_json(const RadialDistribution& rd,
                                      const std::string& type = "radial") {
    nlohmann::ordered_json j;
    j["type"] = type;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& q : rd.points()) pts.push_back({{"r", q.r}, {"p", q.p}});
    j["points"] = std::move(pts);
    j["energy"] = rd.energy();
    return j;
}

inline nlohmann::ordered_json to_json(const Constellation& c,
                                      const std::string& type = "constellation") {
    nlohmann::ordered_json j;
    j["type"] = type;
    j["dim"] = c.dim();
    nlohmann::ordered_json syms = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.size(); ++i) {
        nlohmann::ordered_json s;
        std::vector<double> re, im;
        for (Eigen::Index k = 0; k < c.symbols()[i].size(); ++k) {
            re.push_back(c.symbols()[i](k).real());
            im.push_back(c.symbols()[i](k).imag());
        }
        s["re"] = re;
        s["im"] = im;
        s["p"] = c.probabilities()[i];
        syms.push_back(std::move(s));
    }
    j["symbols"] = std::move(syms);
    return j;
}

}  // namespace fadecap::constellation
