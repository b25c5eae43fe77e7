#ifndef WISHSV_COMPARE_HPP
#define WISHSV_COMPARE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wishsv/filter.hpp"
#include "wishsv/smoother.hpp"

namespace wishsv {

struct EmptyEnsemble : Error {
    using Error::Error;
};

// sum_t [ 1/2 log|Phi_t| - 1/2 r_t' Phi_t r_t - q/2 log(2 pi) ], t = 1..T.
double path_loglik(const PrecisionPath& path, const ReturnsSeries& data);

// max(x) + log sum exp(x - max(x)).
double log_sum_exp(std::span<const double> x);

// log of the ratio of posterior mean likelihoods, each side estimated as
// LSE(loglik) - log N.
double log_plr(std::span<const double> loglik_u, std::span<const double> loglik_b);
double log_plr(const SmoothedEnsemble& ens_u, const SmoothedEnsemble& ens_b, const ReturnsSeries& data);

// P(z = 1) from the two unnormalized log weights; invariant to a common shift.
double mixture_z_probability(double log_w1, double log_w0);

struct MixtureConfig {
    double a0 = 1.0;
    double b0 = 1.0;
    std::size_t iterations = 10000;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 0;
    // Harness mode: the BB path is overwritten by the UE path every iteration,
    // so both likelihood terms coincide.
    bool force_identical = false;

    void validate() const;
};

struct MixtureTrace {
    std::vector<double> alpha;                   // post burn-in
    std::vector<std::vector<std::uint8_t>> z;    // post burn-in, one row per iteration
    std::vector<double> beta_shape_sum;          // a1 + b1 for every iteration (including burn-in)
    std::size_t burn_in = 0;
    double alpha_init = 0.0;

    double mean_alpha() const;
};

// Missing-data augmented Gibbs sampler for the two-component mixture of the
// UE and BB return likelihoods with weight alpha ~ Beta(a0, b0).
MixtureTrace mixture_gibbs(const ReturnsSeries& data, const UEHyper& ue, const BBHyper& bb, const MixtureConfig& cfg);

// sd(batch means) / sqrt(n_batches) with the (n_batches - 1) divisor; a
// trailing remainder that does not fill a batch is dropped.
double batch_means_se(std::span<const double> samples, std::size_t n_batches);

struct PpcResult {
    double level = 0.95;
    std::vector<Vector> upper;               // half-widths per t (intervals are [-u, u])
    std::vector<Vector> length;              // 2u per t and coordinate
    std::vector<double> cumulative_coverage; // running fraction of covered r_{i,t}
};

// Central one-step predictive intervals from the univariate-t margins of the
// multivariate-t forecast: nu = prior_df - q + 1, scale^2 = discount D_{t-1,ii} / nu.
PpcResult ppc_intervals(const FilterOutput& filt, const ReturnsSeries& data, double level);

// Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace wishsv

#endif  // WISHSV_COMPARE_HPP
