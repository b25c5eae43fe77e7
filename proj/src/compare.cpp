#include "wishsv/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace wishsv {

double path_loglik(const PrecisionPath& path, const ReturnsSeries& data) {
    if (path.phi.size() != data.size() + 1) {
        throw DimensionMismatch("path_loglik: path has " + std::to_string(path.phi.size()) + " states for " +
                                std::to_string(data.size()) + " observations");
    }
    const double c = 0.5 * path.q * std::log(2.0 * std::numbers::pi);
    double total = 0.0;
    for (std::size_t t = 1; t < path.phi.size(); ++t) {
        const SymPD& phi = path.phi[t];
        const Vector& r = data.returns[t - 1];
        if (r.size() != phi.dim()) throw DimensionMismatch("path_loglik: return length differs from q");
        // r' Phi r = |R r|^2 with Phi = R'R.
        const Vector rr = phi.chol().matrix() * r;
        total += 0.5 * logdet_spd(phi) - 0.5 * rr.squaredNorm() - c;
    }
    return total;
}

double log_sum_exp(std::span<const double> x) {
    if (x.empty()) throw EmptyEnsemble("log_sum_exp: empty input");
    const double mx = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : x) s += std::exp(v - mx);
    return mx + std::log(s);
}

double log_plr(std::span<const double> loglik_u, std::span<const double> loglik_b) {
    if (loglik_u.empty() || loglik_b.empty()) throw EmptyEnsemble("log_plr: empty ensemble");
    const double lu = log_sum_exp(loglik_u) - std::log(static_cast<double>(loglik_u.size()));
    const double lb = log_sum_exp(loglik_b) - std::log(static_cast<double>(loglik_b.size()));
    return lu - lb;
}

double log_plr(const SmoothedEnsemble& ens_u, const SmoothedEnsemble& ens_b, const ReturnsSeries& data) {
    if (ens_u.paths.empty() || ens_b.paths.empty()) throw EmptyEnsemble("log_plr: empty ensemble");
    for (const auto* ens : {&ens_u, &ens_b}) {
        if (ens->paths.front().phi.size() != data.size() + 1) {
            throw DimensionMismatch("log_plr: ensemble length differs from data");
        }
    }
    return log_plr(ens_u.loglik, ens_b.loglik);
}

double mixture_z_probability(double log_w1, double log_w0) {
    // 1 / (1 + exp(w0 - w1)), evaluated on the side that cannot overflow.
    const double d = log_w0 - log_w1;
    if (d > 0.0) {
        const double e = std::exp(-d);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(d));
}

void MixtureConfig::validate() const {
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw InvalidParameter("MixtureConfig: a0 and b0 must be positive");
    if (!(iterations > burn_in)) throw InvalidParameter("MixtureConfig: iterations must exceed burn-in");
}

double MixtureTrace::mean_alpha() const {
    if (alpha.empty()) throw EmptyEnsemble("MixtureTrace: no retained draws");
    return std::accumulate(alpha.begin(), alpha.end(), 0.0) / static_cast<double>(alpha.size());
}

namespace {

double log_normal_kernel(const Vector& r, const SymPD& phi) {
    const Vector rr = phi.chol().matrix() * r;
    return 0.5 * logdet_spd(phi) - 0.5 * rr.squaredNorm();
}

}  // namespace

MixtureTrace mixture_gibbs(const ReturnsSeries& data, const UEHyper& ue, const BBHyper& bb, const MixtureConfig& cfg) {
    cfg.validate();
    data.validate();
    if (data.size() == 0) throw InvalidParameter("mixture_gibbs: need T >= 1");
    if (data.q != ue.q || data.q != bb.q) throw DimensionMismatch("mixture_gibbs: dimension mismatch");
    const std::size_t T = data.size();

    Rng rng(cfg.seed);
    MixtureTrace trace;
    trace.burn_in = cfg.burn_in;

    double alpha = sample_beta(cfg.a0, cfg.b0, rng);
    trace.alpha_init = alpha;
    std::vector<std::uint8_t> z(T);
    for (auto& zt : z) zt = rng.uniform() < 0.5 ? 1 : 0;

    ReturnsSeries ru = data;
    ReturnsSeries rb = data;
    PrecisionPath phi_u = ue_backward_sample(ue_forward_filter(ru, ue), ue, rng);
    PrecisionPath phi_b = cfg.force_identical ? phi_u : bb_backward_sample(bb_forward_filter(rb, bb), bb, rng);

    trace.alpha.reserve(cfg.iterations - cfg.burn_in);
    trace.beta_shape_sum.reserve(cfg.iterations);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const double log_a = std::log(alpha);
        const double log_1ma = std::log1p(-alpha);
        std::size_t ones = 0;
        for (std::size_t t = 0; t < T; ++t) {
            const Vector& r = data.returns[t];
            // The missing return of the other component is integrated out, so
            // both weights use the observed r_t.
            const double w1 = log_a + log_normal_kernel(r, phi_u.phi[t + 1]);
            const double w0 = log_1ma + log_normal_kernel(r, phi_b.phi[t + 1]);
            z[t] = rng.uniform() < mixture_z_probability(w1, w0) ? 1 : 0;
            if (z[t]) {
                ru.returns[t] = r;
                rb.returns[t] = sample_mvnormal_prec(phi_b.phi[t + 1], rng);
                ++ones;
            } else {
                ru.returns[t] = sample_mvnormal_prec(phi_u.phi[t + 1], rng);
                rb.returns[t] = r;
            }
        }
        const double a1 = cfg.a0 + static_cast<double>(ones);
        const double b1 = cfg.b0 + static_cast<double>(T - ones);
        alpha = sample_beta(a1, b1, rng);
        trace.beta_shape_sum.push_back(a1 + b1);

        phi_u = ue_backward_sample(ue_forward_filter(ru, ue), ue, rng);
        phi_b = cfg.force_identical ? phi_u : bb_backward_sample(bb_forward_filter(rb, bb), bb, rng);

        if (it >= cfg.burn_in) {
            trace.alpha.push_back(alpha);
            trace.z.push_back(z);
        }
    }
    return trace;
}

double batch_means_se(std::span<const double> samples, std::size_t n_batches) {
    if (n_batches < 2) throw InvalidParameter("batch_means_se: need at least two batches");
    const std::size_t size = samples.size() / n_batches;
    if (size < 1) throw InvalidParameter("batch_means_se: batch size must be at least one");
    std::vector<double> means(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        const auto first = samples.begin() + static_cast<std::ptrdiff_t>(b * size);
        means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    const double sd = std::sqrt(ss / static_cast<double>(n_batches - 1));
    return sd / std::sqrt(static_cast<double>(n_batches));
}

PpcResult ppc_intervals(const FilterOutput& filt, const ReturnsSeries& data, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("ppc_intervals: level must lie in (0, 1)");
    if (filt.steps() != data.size()) throw DimensionMismatch("ppc_intervals: filter length differs from data");
    const int q = filt.q;
    PpcResult out;
    out.level = level;
    std::size_t covered = 0;
    std::size_t seen = 0;
    for (std::size_t t = 1; t <= data.size(); ++t) {
        const double nu = filt.prior_df[t - 1] - q + 1.0;
        const boost::math::students_t dist(nu);
        const double tq = boost::math::quantile(dist, 0.5 * (1.0 + level));
        const Matrix& d = filt.d[t - 1].matrix();
        Vector u(q);
        for (int i = 0; i < q; ++i) {
            u(i) = tq * std::sqrt(filt.discount * d(i, i) / nu);
            const double r = data.returns[t - 1](i);
            if (std::abs(r) <= u(i)) ++covered;
            ++seen;
        }
        out.upper.push_back(u);
        out.length.push_back(2.0 * u);
        out.cumulative_coverage.push_back(static_cast<double>(covered) / static_cast<double>(seen));
    }
    return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InvalidParameter("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace wishsv
