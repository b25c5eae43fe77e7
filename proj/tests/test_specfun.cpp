#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <numbers>

#include "support.hpp"
#include "wishsv/specfun.hpp"

using namespace wishsv;

namespace {

// Raw integral representation with double-exponential quadrature.
double u_oracle(double a, double b, double z) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double t) { return std::exp(-z * t + (a - 1) * std::log(t) + (b - a - 1) * std::log1p(t)); };
    return integrator.integrate(f, 1e-14) / std::tgamma(a);
}

// E sqrt(c + x^2), x ~ N(0, 1), by quadrature over the half line.
double shifted_chi2_oracle(double c) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double x) { return std::sqrt(c + x * x) * std::exp(-0.5 * x * x); };
    return 2.0 * integrator.integrate(f, 1e-14) / std::sqrt(2 * std::numbers::pi);
}

}  // namespace

TEST_CASE("log_gamma spot values") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
    CHECK(log_gamma(7.0) == doctest::Approx(std::log(720.0)).epsilon(1e-14));
    CHECK_THROWS_AS(log_gamma(0.0), InvalidParameter);
    CHECK_THROWS_AS(log_gamma(-2.0), InvalidParameter);
}

TEST_CASE("log_gamma accuracy on [0.1, 200]") {
    for (double x = 0.1; x < 170; x *= 1.37) CHECK(testsupport::rel_err(std::exp(log_gamma(x)), std::tgamma(x)) < 1e-12);
}

TEST_CASE("sqrt_beta_moment") {
    CHECK(sqrt_beta_moment(1, 1.0, 1.0) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-13));
    CHECK(std::abs(sqrt_beta_moment(1, 1e6, 1.0) - 1.0) < 1e-5);

    testsupport::Ref ref(201);
    testsupport::Stat s;
    for (int i = 0; i < 1000000; ++i) s.add(std::sqrt(ref.beta(2.5, 0.5)));
    CHECK(s.z(sqrt_beta_moment(1, 5.0, 1.0)) < 4);

    CHECK_THROWS_AS(sqrt_beta_moment(3, 2.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(sqrt_beta_moment(1, 2.0, 0.0), InvalidParameter);
}

TEST_CASE("tricomi anchors") {
    CHECK(std::abs(tricomi_u({-0.5, 0.0, 0.0}) - 1.0 / std::sqrt(std::numbers::pi)) < 1e-12);
    // U(1, 1, z) = e^z E1(z)
    const double u111 = std::exp(1.0) * boost::math::expint(1, 1.0);
    CHECK(u111 == doctest::Approx(0.596347).epsilon(1e-6));
    CHECK(testsupport::rel_err(tricomi_u({1.0, 1.0, 1.0}), u111) < 1e-8);
    CHECK(testsupport::rel_err(tricomi_u({1.0, 1.0, 1.0}), u_oracle(1, 1, 1)) < 1e-8);
    CHECK(testsupport::rel_err(tricomi_u({0.5, 2.0, 100.0}), 0.1) < 0.02);
}

TEST_CASE("tricomi against the raw integral") {
    for (double a : {0.25, 0.5, 1.0, 2.5}) {
        for (double b : {-1.0, 0.0, 1.0, 2.0, 3.5}) {
            for (double z : {0.01, 0.1, 1.0, 7.0, 60.0}) {
                CAPTURE(a);
                CAPTURE(b);
                CAPTURE(z);
                CHECK(testsupport::rel_err(tricomi_u({a, b, z}), u_oracle(a, b, z)) < 1e-8);
            }
        }
    }
}

TEST_CASE("kummer self-consistency") {
    for (double z : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        CHECK(testsupport::rel_err(tricomi_u({-0.5, 0.0, z}), z * u_oracle(0.5, 2.0, z)) < 1e-8);
    }
}

TEST_CASE("chi-square bridge") {
    testsupport::Ref ref(202);
    for (double c : {0.0, 0.25, 1.0, 4.0}) {
        const double u = std::sqrt(2.0) * tricomi_u({-0.5, 0.0, c / 2});
        CHECK(testsupport::rel_err(u, shifted_chi2_oracle(c)) < 1e-8);
        CHECK(sqrt_shifted_chi2_mean(c) == doctest::Approx(u).epsilon(1e-15));
        testsupport::Stat s;
        for (int i = 0; i < 200000; ++i) s.add(std::sqrt(c + ref.chi2(1.0)));
        CHECK(s.z(u) < 4);
    }
}

TEST_CASE("tricomi(-1/2, 0, z) is increasing") {
    double prev = tricomi_u({-0.5, 0.0, 0.0});
    for (double z = 1e-6; z < 50; z *= 1.5) {
        const double u = tricomi_u({-0.5, 0.0, z});
        CHECK(u > prev);
        prev = u;
    }
}

TEST_CASE("tricomi rejects unsupported arguments") {
    CHECK_THROWS_AS(tricomi_u({-0.5, 1.0, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(tricomi_u({1.0, 1.0, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(tricomi_u({-1.0, 0.0, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(tricomi_u({-0.5, 0.0, -1.0}), InvalidParameter);
}
