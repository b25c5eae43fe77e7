#ifndef WISHSV_FILTER_HPP
#define WISHSV_FILTER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "wishsv/matops.hpp"
#include "wishsv/volproc.hpp"

namespace wishsv {

struct ReturnsSeries {
    int q = 0;
    std::vector<Vector> returns;
    std::vector<std::string> timestamps;  // empty or one per row

    std::size_t size() const { return returns.size(); }
    // Throws DimensionMismatch on ragged rows, InvalidParameter on non-finite values.
    void validate() const;
};

// Forward-filtered sufficient statistics. Index t runs over 0..T for the
// per-time state vectors and over 1..T (stored at t - 1) for forecasts.
struct FilterOutput {
    Model model = Model::UE;
    int q = 0;
    double k = 1.0;
    double discount = 0.0;    // lambda (UE) or b (BB)
    double beta = 0.0;        // BB only

    std::vector<SymPD> d;                // D_0..D_T
    std::vector<double> df;              // posterior df: n + k (UE) or k_t (BB), t = 0..T
    std::vector<UpperTri> p;             // uchol((k D_t)^{-1}), t = 0..T
    std::vector<double> prior_df;        // forecast df at t = 1..T: n (UE) or beta k_{t-1} (BB)
    std::vector<double> log_forecast;    // log p(r_t | D_{t-1}), t = 1..T
    double log_marginal = 0.0;

    std::size_t steps() const { return log_forecast.size(); }
};

// Rank-1 (k = 1) filters on returns, y_t = r_t r_t'.
FilterOutput ue_forward_filter(const ReturnsSeries& data, const UEHyper& ue);
FilterOutput bb_forward_filter(const ReturnsSeries& data, const BBHyper& bb);

// General-k filters on full-rank Wishart observations y_t (k > q - 1).
FilterOutput ue_forward_filter_wishart(const std::vector<Matrix>& y, const UEHyper& ue);
FilterOutput bb_forward_filter_wishart(const std::vector<Matrix>& y, const BBHyper& bb);

// k_t = beta k_{t-1} + k. Once the recursion has reached its fixed point to
// within rounding, the previous value is kept so the sequence is stationary
// in floating point as well.
double bb_next_df(double k_prev, double beta, double k);

// One-step multivariate-t forecast log density of r given the prior
// Wishart_q(n, (lambda D)^{-1}) on the precision (k = 1):
// log G((n+1)/2) - log G((n+1-q)/2) - 1/2 log|lambda D| - q/2 log pi
//   - (n+1)/2 log(1 + r'D^{-1}r / lambda).
double forecast_logdensity(const Vector& r, const SymPD& d_prev, double n, double lambda);

// Forecast log density of a full-rank Wishart observation y ~ Wishart(k, (k Phi)^{-1})
// given Phi ~ Wishart(n, (k lambda D)^{-1}).
double wishart_forecast_logdensity(const SymPD& y, const SymPD& d_prev, double n, double lambda, double k);

// log|lambda D + r r'| from log|D| by the rank-1 determinant identity.
double logdet_update(double logdet_prev, const Vector& r, const SymPD& d_prev, double lambda, int q);

// Sum of one-step forecast log densities, D_t advanced with D_t = lambda D_{t-1} + r_t r_t'
// and log|D_t| carried by logdet_update.
double marginal_loglik(const ReturnsSeries& data, double n, double lambda, const SymPD& d0);

struct GridPoint {
    double n;
    double lambda;
    double loglik;
};

struct GridResult {
    double n_star;
    double lambda_star;
    double best_loglik;
    std::vector<GridPoint> surface;  // n-major, in grid order
};

// Argmax of marginal_loglik over n_grid x lambda_grid. Ties go to the smallest
// n, then the smallest lambda. `workers` = 0 picks the hardware concurrency.
GridResult grid_search(const ReturnsSeries& data, const SymPD& d0, const std::vector<double>& n_grid,
                       const std::vector<double>& lambda_grid, unsigned workers = 0);

// Evenly spaced values start, start + step, ..., stop (inclusive, to rounding).
std::vector<double> linear_grid(double start, double stop, double step);

// lambda with 1/lambda = 1 + k/(n - q - 1).
double constrained_lambda(double n, double k, int q);

// log of the multivariate gamma function G_q(a).
double log_multigamma(double a, int q);

}  // namespace wishsv

#endif  // WISHSV_FILTER_HPP
