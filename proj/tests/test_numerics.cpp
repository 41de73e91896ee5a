#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fadecap/numerics.hpp"

using namespace fadecap;
using Catch::Approx;

namespace {

// Independent oracle: truncated power series sum_k (z/2)^{2k} / (k!)^2.
double bessel_i0_series_oracle(double z, int terms = 30) {
    double sum = 0.0;
    for (int k = terms - 1; k >= 0; --k) {
        double term = 1.0;
        for (int j = 1; j <= k; ++j) term *= (z / 2.0) * (z / 2.0) / (j * j);
        sum += term;
    }
    return sum;
}

}  // namespace

TEST_CASE("log_bessel_i0 anchors") {
    CHECK(num::log_bessel_i0(0.0) == 0.0);
    CHECK(num::log_bessel_i0(1.0) ==
          Approx(std::log(bessel_i0_series_oracle(1.0))).epsilon(1e-12));
    CHECK(num::log_bessel_i0(1.0) == Approx(0.23591435850717865).epsilon(1e-10));
    // asymptotic region, frozen from a high-precision evaluation
    CHECK(num::log_bessel_i0(100.0) == Approx(96.77973268994258).epsilon(1e-12));
    CHECK(num::log_bessel_i0(20.0) == Approx(17.589610428244274).epsilon(1e-12));
    // monotone, finite far out
    CHECK(std::isfinite(num::log_bessel_i0(1e6)));
    CHECK(num::log_bessel_i0(1e6) > num::log_bessel_i0(1e5));
    CHECK_THROWS_AS(num::log_bessel_i0(-1.0), DomainError);
    CHECK_THROWS_AS(num::log_bessel_i0(std::nan("")), DomainError);
}

TEST_CASE("log_bessel_i0 branch agreement on the seam") {
    // series and asymptotic expansions agree to 1e-9 relative on [15, 25]
    for (double z = 15.0; z <= 25.0; z += 0.25) {
        const double s = num::detail::log_bessel_i0_series(z);
        const double a = num::detail::log_bessel_i0_asymptotic(z);
        CHECK(std::fabs(s - a) <= 1e-9 * std::fabs(s));
    }
}

TEST_CASE("chi2_logpdf") {
    CHECK(num::chi2_logpdf(2, 0.0) == Approx(std::log(0.5)));
    CHECK(num::chi2_logpdf(2, 2.0) == Approx(std::log(0.5) - 1.0));
    CHECK(num::chi2_logpdf(4, 3.0) == Approx(-1.7876820724517809).epsilon(1e-12));
    CHECK(num::chi2_logpdf(4, 0.0) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(num::chi2_logpdf(0, 1.0), DomainError);
    CHECK_THROWS_AS(num::chi2_logpdf(2, -1.0), DomainError);
}

TEST_CASE("noncentral chi2 with 2 dof") {
    CHECK(num::noncentral_chi2_2_logpdf(0.0, 2.0) == Approx(num::chi2_logpdf(2, 2.0)));
    CHECK(num::noncentral_chi2_2_logpdf(2.0, 2.0) ==
          Approx(-1.8691536390769890).epsilon(1e-12));
    CHECK_THROWS_AS(num::noncentral_chi2_2_logpdf(-0.5, 1.0), DomainError);
    // normalization via adaptive quadrature
    for (double lambda : {0.0, 0.5, 5.0, 50.0}) {
        auto est = num::integrate_semiinfinite(
            [lambda](double x) {
                return std::exp(num::noncentral_chi2_2_logpdf(lambda, x));
            },
            1e-10);
        CHECK(est.value == Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("log pdfs integrate to one") {
    for (int dof : {2, 4, 8, 18}) {
        auto est = num::integrate_semiinfinite(
            [dof](double x) { return std::exp(num::chi2_logpdf(dof, x)); }, 1e-10);
        CHECK(est.value == Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("std_normal_cdf") {
    CHECK(num::std_normal_cdf(0.0) == Approx(0.5));
    CHECK(num::std_normal_cdf(1.96) == Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(num::std_normal_cdf(-8.0) < 1e-15);
    for (double x : {0.1, 1.0, 3.0, 7.0})
        CHECK(std::fabs(num::std_normal_cdf(x) + num::std_normal_cdf(-x) - 1.0) <
              1e-15);
    // monotone
    double prev = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        double v = num::std_normal_cdf(x);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(num::std_normal_cdf(std::nan("")), DomainError);
}

TEST_CASE("log_normal_sf deep tail") {
    // continuous across the asymptotic switch
    CHECK(num::log_normal_sf(29.9) == Approx(num::log_normal_sf(29.9)).epsilon(0));
    const double direct = std::log(0.5 * std::erfc(20.0 / std::sqrt(2.0)));
    CHECK(num::log_normal_sf(20.0) == Approx(direct).epsilon(1e-12));
    // far tail: leading term -x^2/2 dominates
    const double v = num::log_normal_sf(450.0);
    CHECK(v == Approx(-0.5 * 450.0 * 450.0 - std::log(450.0) -
                      0.5 * std::log(2.0 * num::kPi))
                   .epsilon(1e-6));
}

TEST_CASE("exp1") {
    CHECK(num::exp1(1.0) == Approx(0.21938393439552028).epsilon(1e-12));
    CHECK(num::exp1(10.0) == Approx(4.156968929685324e-6).epsilon(1e-10));
    // standard envelope E1(x) <= e^{-x}/x
    for (double x : {1.0, 5.0, 20.0, 100.0})
        CHECK(num::exp1(x) <= std::exp(-x) / x);
    CHECK_THROWS_AS(num::exp1(0.0), DomainError);
    CHECK_THROWS_AS(num::exp1(-2.0), DomainError);
}

TEST_CASE("laguerre recurrence") {
    CHECK(num::laguerre(0, 3, 17.0) == 1.0);
    CHECK(num::laguerre(1, 0, 2.0) == Approx(-1.0));
    CHECK(num::laguerre(2, 1, 3.0) == Approx(-1.5));  // 3 - 3u + u^2/2 at u = 3
    CHECK_THROWS_AS(num::laguerre(-1, 0, 1.0), DomainError);
}

TEST_CASE("gauss quadrature rules") {
    auto gh1 = num::gauss_quadrature(num::QuadKind::gauss_hermite, 1);
    REQUIRE(gh1.nodes.size() == 1);
    CHECK(gh1.nodes[0] == Approx(0.0).margin(1e-14));
    CHECK(gh1.weights[0] == Approx(std::sqrt(num::kPi)).epsilon(1e-14));

    auto gh = num::gauss_quadrature(num::QuadKind::gauss_hermite, 32);
    double wsum = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        wsum += gh.weights[i];
        m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
        m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
        CHECK(gh.weights[i] > 0.0);
        if (i > 0) CHECK(gh.nodes[i] > gh.nodes[i - 1]);
    }
    CHECK(wsum == Approx(std::sqrt(num::kPi)).epsilon(1e-12));
    CHECK(m2 == Approx(std::sqrt(num::kPi) / 2.0).epsilon(1e-12));
    CHECK(m4 == Approx(3.0 * std::sqrt(num::kPi) / 4.0).epsilon(1e-10));

    auto gl = num::gauss_quadrature(num::QuadKind::gauss_laguerre, 32);
    double first_moment = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        first_moment += gl.weights[i] * gl.nodes[i];
    CHECK(first_moment == Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(num::gauss_quadrature(num::QuadKind::adaptive_semiinfinite, 8),
                    ConfigError);
    CHECK_THROWS_AS(num::gauss_quadrature(num::QuadKind::gauss_hermite, 0),
                    DomainError);
}

TEST_CASE("laguerre orthogonality via quadrature") {
    for (int a : {0, 1, 3}) {
        auto rule = num::gauss_laguerre_general(48, a);
        for (int j = 0; j <= 5; ++j)
            for (int k = 0; k < j; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                    dot += rule.weights[i] * num::laguerre(j, a, rule.nodes[i]) *
                           num::laguerre(k, a, rule.nodes[i]);
                CHECK(std::fabs(dot) < 1e-8);
            }
    }
}

TEST_CASE("integrate_semiinfinite") {
    auto one = num::integrate_semiinfinite(
        [](double u) { return std::exp(-u); }, 1e-10);
    CHECK(one.value == Approx(1.0).epsilon(1e-10));

    auto chi = num::integrate_semiinfinite(
        [](double x) { return std::exp(num::chi2_logpdf(2, x)); }, 1e-10);
    CHECK(chi.value == Approx(1.0).epsilon(1e-10));

    // closed-form cross-check against exp1: int ln(1+u/2) chi2_2(u) du = e E1(1)
    auto mixed = num::integrate_semiinfinite(
        [](double u) { return std::log1p(u / 2.0) * 0.5 * std::exp(-u / 2.0); },
        1e-10);
    CHECK(mixed.value == Approx(std::exp(1.0) * num::exp1(1.0)).epsilon(1e-9));

    CHECK_THROWS_AS(num::integrate_semiinfinite([](double) { return 1.0; }, -1.0),
                    DomainError);
}

TEST_CASE("gamma_p sanity") {
    CHECK(num::chi2_cdf(2, 2.0) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(num::chi2_cdf(8, 0.0) == 0.0);
    CHECK(num::chi2_cdf(8, 1e3) == Approx(1.0).epsilon(1e-12));
}
