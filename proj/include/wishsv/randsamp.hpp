#ifndef WISHSV_RANDSAMP_HPP
#define WISHSV_RANDSAMP_HPP

#include <cstdint>
#include <random>

#include "wishsv/matops.hpp"

namespace wishsv {

// Name of the pinned generator, recorded in output metadata.
inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64-substreams";

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard. Uniform, normal and gamma transforms are
// implemented here rather than with <random> distributions, whose algorithms
// vary across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t seed() const { return seed_; }

    // Independent stream for job `index` derived from (seed, index).
    static Rng substream(std::uint64_t seed, std::uint64_t index);

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    // Gamma(shape, scale 1) for any shape > 0.
    double gamma(double shape);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct WishartSpec {
    double df;
    UpperTri scale_chol;  // P with scale A = P'P
};

double sample_chi2(double df, Rng& rng);
double sample_beta(double a, double b, Rng& rng);

// Bartlett factor U for Wishart_q(df, I): u_ii^2 ~ chi2_{df-i+1} (1-based i),
// standard normal above the diagonal. Requires df > q - 1.
UpperTri sample_bartlett_factor(int q, double df, Rng& rng);

// (UP)'(UP) when df > q - 1; a sum of df outer products of N(0, P'P) vectors
// when df is a positive integer below q (rank-deficient draw).
Matrix sample_wishart_bartlett(const WishartSpec& spec, Rng& rng);

// True when df admits a Wishart_q draw (full rank or integer rank-deficient).
bool valid_wishart_df(double df, int q);

// (T^{-1})' A1 T^{-1} with T = uchol(A1 + A2), A1 ~ Wishart(n1, I),
// A2 ~ Wishart(n2, I).
Matrix sample_matrix_beta(int q, double n1, double n2, Rng& rng);

// Zero-mean normal with covariance prec^{-1}.
Vector sample_mvnormal_prec(const SymPD& prec, Rng& rng);

}  // namespace wishsv

#endif  // WISHSV_RANDSAMP_HPP
