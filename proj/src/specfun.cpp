#include "wishsv/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wishsv/matops.hpp"

namespace wishsv {

namespace {

constexpr unsigned kMaxDepth = 15;
constexpr double kQuadTol = 1e-13;

double gk_integrate(auto&& f, double lo, double hi) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, kMaxDepth, kQuadTol, &err);
}

// int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt for a > 0, z > 0, split at t = 1.
double tricomi_integral(double a, double b, double z) {
    // [0, 1]. For a < 1 substitute t = s^{1/a} (t^{a-1} dt = ds / a) to remove
    // the endpoint singularity.
    auto head = [a, b, z](double s) {
        if (a >= 1.0) return std::exp(-z * s + (a - 1.0) * std::log(s) + (b - a - 1.0) * std::log1p(s));
        if (s <= 0.0) return 1.0 / a;
        const double t = std::pow(s, 1.0 / a);
        return std::exp(-z * t + (b - a - 1.0) * std::log1p(t)) / a;
    };
    // [1, inf) with t = e^x: integrand exp(a x - z e^x + (b-a-1) log(1 + e^x)),
    // integrated over unit panels in x until the double-exponential decay
    // makes further panels negligible.
    auto tail = [a, b, z](double x) {
        const double t = std::exp(x);
        return std::exp(a * x - z * t + (b - a - 1.0) * std::log1p(t));
    };
    double total = gk_integrate(head, 0.0, 1.0);
    const double turn = std::log(std::max(1.0, (1.0 + std::abs(b)) / z));
    for (double x = 0.0;; x += 1.0) {
        const double piece = gk_integrate(tail, x, x + 1.0);
        total += piece;
        if (x > turn && piece <= 1e-17 * total) break;
    }
    return total;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw InvalidParameter("log_gamma: argument must be positive, got " + std::to_string(x));
    return std::lgamma(x);
}

double sqrt_beta_moment(int m, double n, double k) {
    const double s = n - m + 1.0;
    if (m < 1 || !(s > 0.0) || !(k > 0.0)) {
        throw InvalidParameter("sqrt_beta_moment: requires m >= 1, n - m + 1 > 0, k > 0");
    }
    return std::exp(log_gamma((s + 1.0) / 2.0) + log_gamma((s + k) / 2.0) - log_gamma(s / 2.0) -
                    log_gamma((s + k + 1.0) / 2.0));
}

double tricomi_u(const TricomiArgs& args) {
    const auto [a, b, z] = args;
    if (a == -0.5 && b == 0.0 && z >= 0.0) {
        if (z == 0.0) return 1.0 / std::sqrt(std::numbers::pi);
        return z * tricomi_u({0.5, 2.0, z});
    }
    if (a > 0.0 && z > 0.0 && std::isfinite(b) && std::isfinite(z)) {
        return tricomi_integral(a, b, z) / std::tgamma(a);
    }
    throw InvalidParameter("tricomi_u: unsupported arguments (a=" + std::to_string(a) + ", b=" + std::to_string(b) +
                           ", z=" + std::to_string(z) + ")");
}

double sqrt_shifted_chi2_mean(double c) {
    if (!(c >= 0.0)) throw InvalidParameter("sqrt_shifted_chi2_mean: shift must be nonnegative");
    return std::numbers::sqrt2 * tricomi_u({-0.5, 0.0, 0.5 * c});
}

}  // namespace wishsv
