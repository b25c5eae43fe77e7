#ifndef WISHSV_SPECFUN_HPP
#define WISHSV_SPECFUN_HPP

namespace wishsv {

struct TricomiArgs {
    double a;
    double b;
    double z;
};

double log_gamma(double x);

// E[sqrt(eta)] for eta ~ Beta((n - m + 1)/2, k/2), written as the gamma ratio
// G((n-m+2)/2) G((n-m+k+1)/2) / (G((n-m+1)/2) G((n-m+k+2)/2)).
double sqrt_beta_moment(int m, double n, double k);

// Tricomi's confluent hypergeometric function U(a, b, z) on the two regimes
// needed here:
//  * a > 0, z > 0: adaptive Gauss-Kronrod quadrature of the integral
//    (1/G(a)) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt;
//  * a = -1/2, b = 0, z >= 0: Kummer's relation U(a,b,z) = z^{1-b} U(a-b+1, 2-b, z),
//    i.e. z U(1/2, 2, z), with the z -> 0 limit 1/sqrt(pi).
double tricomi_u(const TricomiArgs& args);

// E[sqrt(c + theta)] for theta ~ chi2_1, c >= 0; equals sqrt(2) U(-1/2, 0, c/2).
double sqrt_shifted_chi2_mean(double c);

}  // namespace wishsv

#endif  // WISHSV_SPECFUN_HPP
