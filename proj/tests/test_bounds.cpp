#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fadecap/bounds.hpp"
#include "fadecap/exact_mi.hpp"
#include "fadecap/rng.hpp"

using namespace fadecap;
using namespace fadecap::bounds;
using channel::ChannelParams;
using constellation::lift_radial;
using Catch::Approx;

namespace {

ChannelParams random_params(rng::Stream& rs, int K, int L) {
    return ChannelParams::with_alpha_norm2(K, L, 0.05 + 0.95 * rs.uniform(),
                                           0.2 + rs.uniform(), 1.5 * rs.uniform());
}

constellation::Constellation product_lift(const constellation::Constellation& c1) {
    std::vector<constellation::CVector> syms;
    std::vector<double> probs;
    for (std::size_t i = 0; i < c1.size(); ++i)
        for (std::size_t j = 0; j < c1.size(); ++j) {
            constellation::CVector s(2);
            s(0) = c1.symbols()[i](0) / std::sqrt(2.0);
            s(1) = c1.symbols()[j](0) / std::sqrt(2.0);
            syms.push_back(s);
            probs.push_back(c1.probabilities()[i] * c1.probabilities()[j]);
        }
    return {syms, probs};
}

}  // namespace

TEST_CASE("covariance upper bounds") {
    SECTION("coherent K=1 anchor: ln 2") {
        auto p = ChannelParams::with_alpha_norm2(1, 1, 0.0, 1.0, 1.0);
        auto c = lift_radial(constellation::psk(), 4);
        auto ub = upper_bounds_covariance(c, p);
        CHECK(ub.separable_form.value == Approx(std::log(2.0)).epsilon(1e-12));
    }
    SECTION("deterministic symbol, no CSI: matrix form is exactly zero") {
        auto p = ChannelParams::with_alpha_norm2(2, 3, 0.7, 0.8, 0.0);
        constellation::CVector x(2);
        x(0) = std::complex<double>(0.6, 0.1);
        x(1) = std::complex<double>(-0.2, 0.75);
        constellation::Constellation c({x}, {1.0});
        auto ub = upper_bounds_covariance(c, p);
        CHECK(std::fabs(ub.matrix_form.value) < 1e-10);
    }
    SECTION("dense determinant vs rank-one identity, K=1, L=2") {
        channel::CVector alpha(2);
        alpha(0) = alpha(1) = 0.5;
        ChannelParams p(1, 2, 0.5, 1.0, alpha);
        auto c = lift_radial(constellation::amqam(2), 4);
        auto ub = upper_bounds_covariance(c, p);
        // |F| = prod d_l * (1 + sum |alpha_l|^2 / d_l), d_l = s^2 delta^2 + sigma2
        const double d = 1.0 * 0.25 + 1.0;
        const double det = d * d * (1.0 + (0.25 + 0.25) / d);
        double e_logdet = 0.0;
        const auto rings = constellation::amqam(2);
        for (const auto& pt : rings.points())
            e_logdet += pt.p * 2.0 * std::log(pt.r * pt.r * 0.25 + 1.0);
        CHECK(ub.matrix_form.value == Approx(std::log(det) - e_logdet).epsilon(1e-8));
    }
    SECTION("matrix form never exceeds the separable form") {
        rng::Stream rs(11, 0);
        for (int t = 0; t < 50; ++t) {
            const int K = 1 + static_cast<int>(rs.uniform() * 2.0);
            auto p = random_params(rs, K, 1 + static_cast<int>(rs.uniform() * 2.0));
            auto c1 = lift_radial(
                constellation::amqam(1 + static_cast<int>(rs.uniform() * 3.0)), 4);
            auto c = K == 1 ? c1 : product_lift(c1);
            auto ub = upper_bounds_covariance(c, p);
            CHECK(ub.matrix_form.value <= ub.separable_form.value + 1e-9);
        }
    }
}

TEST_CASE("quadratic upper bound") {
    SECTION("no CSI, unit fourth moment: E{E^2}/2 * sum delta^4 / sigma^4") {
        auto p = ChannelParams::with_alpha_norm2(1, 4, 1.0, 1.0, 0.0);
        auto c = lift_radial(constellation::psk(), 4);
        CHECK(upper_bound_quadratic(c, p).value == Approx(0.125).epsilon(1e-14));
    }
    SECTION("coherent reduction") {
        auto p = ChannelParams::with_alpha_norm2(2, 2, 0.0, 0.7, 1.3);
        auto c2 = product_lift(lift_radial(constellation::psk(), 4));
        CHECK(upper_bound_quadratic(c2, p).value ==
              Approx(2.0 * std::log1p(1.3 / (2.0 * 0.7))).epsilon(1e-12));
    }
    SECTION("dominates the separable covariance bound") {
        rng::Stream rs(13, 0);
        for (int t = 0; t < 50; ++t) {
            auto p = random_params(rs, 1, 1 + static_cast<int>(rs.uniform() * 3.0));
            auto c = lift_radial(
                constellation::amqam(1 + static_cast<int>(rs.uniform() * 4.0)), 4);
            auto ub = upper_bounds_covariance(c, p);
            CHECK(upper_bound_quadratic(c, p).value >=
                  ub.separable_form.value - 1e-9);
        }
    }
}

TEST_CASE("mmse lower bounds") {
    SECTION("isotropic specialization agrees with the general form") {
        rng::Stream rs(17, 0);
        for (int t = 0; t < 20; ++t) {
            auto p = random_params(rs, 1, 1 + static_cast<int>(rs.uniform() * 2.0));
            auto c = lift_radial(
                constellation::amqam(1 + static_cast<int>(rs.uniform() * 3.0)), 8);
            auto g = lower_bound_mmse(c, p, LowerVariant::discrete);
            auto s = lower_bound_mmse_isotropic(c, p, LowerVariant::discrete);
            CHECK(g.value == Approx(s.value).margin(1e-9));
            auto gc = lower_bound_mmse(c, p, LowerVariant::continuous, 1.0);
            auto sc = lower_bound_mmse_isotropic(c, p, LowerVariant::continuous, 1.0);
            CHECK(gc.value == Approx(sc.value).margin(1e-9));
        }
    }
    SECTION("coherent Gaussian continuous bound is the closed form") {
        for (double a : {0.4, 1.0, 2.5}) {
            auto p = ChannelParams::with_alpha_norm2(1, 1, 0.0, 1.0, a);
            auto c = lift_radial(constellation::psk(), 4);
            const double h = std::log(num::kPi * std::exp(1.0));
            auto b = lower_bound_mmse(c, p, LowerVariant::continuous, h);
            CHECK(b.value == Approx(std::log1p(a)).epsilon(1e-10));
        }
    }
    SECTION("discrete bound stays below the radial MI of the lifted law") {
        rng::Stream rs(19, 0);
        for (int t = 0; t < 15; ++t) {
            const int L = 1 + static_cast<int>(rs.uniform() * 2.0);
            auto p = random_params(rs, 1, L);
            auto rd = constellation::amqam(1 + static_cast<int>(rs.uniform() * 2.0));
            auto c = lift_radial(rd, 8);
            auto b = lower_bound_mmse(c, p, LowerVariant::discrete);
            exact::MiContext ctx{L, p.beta, p.sigma2, p.alpha_norm2(), {}};
            CHECK(std::max(0.0, b.value) <= exact::mi_radial(rd, ctx) + 1e-6);
        }
    }
    SECTION("preconditions") {
        auto p = ChannelParams::with_alpha_norm2(1, 1, 0.5, 1.0, 1.0);
        constellation::CVector s1(1), s2(1);
        s1(0) = 1.2;
        s2(0) = 0.4;
        constellation::Constellation skew({s1, s2}, {0.5, 0.5});
        CHECK_THROWS_AS(
            lower_bound_mmse_isotropic(skew, p, LowerVariant::discrete),
            PreconditionError);
        auto c = lift_radial(constellation::psk(), 4);
        CHECK_THROWS_AS(lower_bound_mmse(c, p, LowerVariant::continuous),
                        PreconditionError);
        constellation::CVector z(1);
        z(0) = 1.0;
        constellation::Constellation dup({z, z}, {0.5, 0.5});
        CHECK_THROWS_AS(lower_bound_mmse(dup, p, LowerVariant::discrete),
                        PreconditionError);
    }
}

TEST_CASE("phase rotation invariance") {
    rng::Stream rs(23, 0);
    channel::CVector alpha(2);
    alpha(0) = std::complex<double>(0.4, -0.3);
    alpha(1) = std::complex<double>(-0.1, 0.8);
    ChannelParams p(1, 2, 0.5, 0.9, alpha);
    auto c = lift_radial(constellation::amqam(2), 4);
    const double u0 = upper_bounds_covariance(c, p).matrix_form.value;
    const double l0 = lower_bound_mmse(c, p, LowerVariant::discrete).value;
    for (int t = 0; t < 10; ++t) {
        const double phi = 2.0 * num::kPi * rs.uniform();
        ChannelParams q(1, 2, 0.5, 0.9, std::polar(1.0, phi) * alpha);
        CHECK(upper_bounds_covariance(c, q).matrix_form.value ==
              Approx(u0).margin(1e-10));
        CHECK(lower_bound_mmse(c, q, LowerVariant::discrete).value ==
              Approx(l0).margin(1e-10));
    }
}

TEST_CASE("on-off bound, integral form") {
    SECTION("frozen references") {
        auto b16 = lower_bound_onoff(OnoffChannel::from_k(16, 1.0, 10, 1.0, 1.0, 0.0));
        // frozen against exact adaptive quadrature; the 64-node rules
        // carry a few-1e-6 discretization error
        CHECK(b16.value == Approx(0.22268738686076).margin(2e-5));
        auto b1 = lower_bound_onoff(OnoffChannel::from_k(1, 1.0, 10, 1.0, 1.0, 0.0));
        CHECK(b1.value == Approx(0.11809036556863).margin(2e-5));
        auto b4 = lower_bound_onoff(OnoffChannel::from_k(4, 2.0, 12, 0.5, 1.0, 0.3));
        CHECK(b4.value == Approx(0.10507698809496).margin(2e-5));
    }
    SECTION("cap by the entropy term") {
        for (int k : {1, 2, 8, 32}) {
            auto ch = OnoffChannel::from_k(k, 1.5, 8, 0.7, 1.0, 0.4);
            const double cap = (std::log(static_cast<double>(k)) +
                                std::log(ch.symbol_energy())) /
                               ch.symbol_energy();
            CHECK(lower_bound_onoff(ch).value <= cap + 1e-12);
        }
    }
    SECTION("closed form never exceeds the integral form") {
        struct Case {
            int k;
            double m;
            int l;
            double beta, a;
        };
        for (const auto& cs : std::vector<Case>{{16, 1.0, 10, 1.0, 0.0},
                                                {1, 1.0, 10, 1.0, 0.0},
                                                {4, 2.0, 12, 0.5, 0.3},
                                                {64, 3.0, 16, 0.9, 0.1},
                                                {2, 1.0, 6, 0.2, 0.9}}) {
            auto ch = OnoffChannel::from_k(cs.k, cs.m, cs.l, cs.beta, 1.0, cs.a);
            CHECK(lower_bound_onoff_closed_form(ch).value <=
                  lower_bound_onoff(ch).value + 1e-9);
        }
    }
    SECTION("closed-form frozen references") {
        auto ch = OnoffChannel::from_k(16, 1.0, 10, 1.0, 1.0, 0.0);
        CHECK(lower_bound_onoff_closed_form(ch).value ==
              Approx(-0.09487696131920).margin(2e-6));
        auto ch1 = OnoffChannel::from_k(1, 1.0, 10, 1.0, 1.0, 0.0);
        CHECK(lower_bound_onoff_closed_form(ch1).value ==
              Approx(0.02351449745189).margin(2e-6));
    }
    SECTION("large-L flag and preconditions") {
        auto small = OnoffChannel::from_k(2, 1.0, 4, 1.0, 1.0, 0.0);
        CHECK_FALSE(lower_bound_onoff(small).assumptions.large_l);
        CHECK(lower_bound_onoff(OnoffChannel::from_k(2, 1.0, 10, 1.0, 1.0, 0.0))
                  .assumptions.large_l);
        OnoffChannel bad{std::log(2.0), 0.01, 4, 1.0, 1.0, 0.0};
        CHECK_THROWS_AS(lower_bound_onoff(bad), PreconditionError);
    }
    SECTION("astronomical K through the closed form") {
        // K = e^{2mL}: stays finite, lands between 0.5 and 1/sigma2
        const double m = 50.0;
        const int l = 1000;
        OnoffChannel ch{2.0 * m * l, m, l, 1.0, 1.0, 0.0};
        const double v = lower_bound_onoff_closed_form(ch).value;
        CHECK(v > 0.5);
        CHECK(v < 1.0);
    }
}

TEST_CASE("asymptotic on-off closed form") {
    CHECK(asymptotic_onoff_bound(4, 100, 1.0) ==
          Approx(0.52195072593885).epsilon(1e-12));
    CHECK(asymptotic_onoff_bound(10, 400, 1.0) ==
          Approx(0.71703276995550).epsilon(1e-12));
    CHECK(asymptotic_onoff_bound(50, 1000, 1.0) ==
          Approx(0.88972223172417).epsilon(1e-12));
    CHECK(asymptotic_onoff_bound(4, 100, 1.0) < asymptotic_onoff_bound(10, 400, 1.0));
    CHECK(asymptotic_onoff_bound(10, 400, 1.0) <
          asymptotic_onoff_bound(50, 1000, 1.0));
    CHECK(asymptotic_onoff_bound(50, 1000, 1.0) < 1.0);
    // exact 1/sigma2 scaling
    for (double s2 : {0.1, 0.5, 2.0})
        CHECK(asymptotic_onoff_bound(7, 200, s2) ==
              Approx(asymptotic_onoff_bound(7, 200, 1.0) / s2).epsilon(1e-14));
    CHECK_THROWS_AS(asymptotic_onoff_bound(0.5, 100, 1.0), DomainError);
}

TEST_CASE("fourth moment vanishing bound") {
    auto c = lift_radial(constellation::psk(), 4);
    auto v = fourth_moment_vanishing_bound(c, {4, 8, 1000000}, 1.0);
    CHECK(v[0] == Approx(0.125).epsilon(1e-14));
    CHECK(v[1] == Approx(0.0625).epsilon(1e-14));  // halves as L doubles
    CHECK(v[2] < 1e-6);
}

TEST_CASE("sandwich on random radial cases") {
    rng::Stream rs(29, 0);
    int done = 0;
    while (done < 20) {
        const double r1 = 0.3 + 0.8 * rs.uniform();
        const double p1 = 0.2 + 0.6 * rs.uniform();
        const double r2sq = (1.0 - p1 * r1 * r1) / (1.0 - p1);
        if (r2sq <= r1 * r1 + 0.01) continue;
        ++done;
        constellation::RadialDistribution d({{r1, p1}, {std::sqrt(r2sq), 1.0 - p1}});
        const int L = 1 + static_cast<int>(rs.uniform() * 2.0);
        auto p = random_params(rs, 1, L);
        exact::MiContext ctx{L, p.beta, p.sigma2, p.alpha_norm2(), {}};
        const double mi = exact::mi_radial(d, ctx);
        auto lifted = lift_radial(d, 8);
        const double upper = upper_bound_quadratic(lifted, p).value;
        const double lower =
            lower_bound_mmse(lifted, p, LowerVariant::discrete).value;
        CHECK(std::max(0.0, lower) <= mi + 1e-6);
        CHECK(mi <= upper + 1e-6);
    }
}

TEST_CASE("bound report serialization") {
    auto p = ChannelParams::with_alpha_norm2(1, 1, 0.0, 1.0, 1.0);
    auto c = lift_radial(constellation::psk(), 4);
    auto j = to_json(upper_bounds_covariance(c, p).separable_form);
    CHECK(j["kind"] == "upper-L1-simplified");
    CHECK(j["assumptions"]["zero_mean"] == true);
    CHECK(j["value"].get<double>() == Approx(std::log(2.0)));
}
