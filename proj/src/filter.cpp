#include "wishsv/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "wishsv/specfun.hpp"

namespace wishsv {

namespace {

UpperTri precision_scale_chol(const SymPD& d, double k) {
    return uchol(inverse_spd(d) / k);
}

// Shared recursion: D_t = discount D_{t-1} + y_t. `observe(t)` returns y_t,
// `logdens(t, D_{t-1}, prior_df)` the forecast log density of observation t.
template <class Observe, class LogDens>
FilterOutput run_filter(Model model, const SymPD& d0, double k, double discount, double beta, double k0,
                        double ue_n, std::size_t steps, Observe&& observe, LogDens&& logdens) {
    FilterOutput out;
    out.model = model;
    out.q = d0.dim();
    out.k = k;
    out.discount = discount;
    out.beta = beta;
    out.d.reserve(steps + 1);
    out.d.push_back(d0);
    out.df.push_back(k0);
    out.p.push_back(precision_scale_chol(d0, k));
    for (std::size_t t = 1; t <= steps; ++t) {
        const SymPD& prev = out.d.back();
        const double k_prev = out.df.back();
        const double prior_df = model == Model::UE ? ue_n : beta * k_prev;
        const double lf = logdens(t, prev, prior_df);
        out.prior_df.push_back(prior_df);
        out.log_forecast.push_back(lf);
        out.log_marginal += lf;
        out.d.emplace_back(symmetrize(discount * prev.matrix() + observe(t)));
        out.df.push_back(model == Model::UE ? k_prev : bb_next_df(k_prev, beta, k));
        out.p.push_back(precision_scale_chol(out.d.back(), k));
    }
    return out;
}

void require_rank_one(double k, const char* what) {
    if (k != 1.0) throw InvalidParameter(std::string(what) + ": returns filtering requires k = 1");
}

void check_bb_path(const BBHyper& bb) {
    // k_t is monotone between k0 and its fixed point, so min_df bounds the path.
    if (!(bb.beta * bb.min_df() - bb.q + 1 > 0.0)) {
        throw InvalidParameter("bb_forward_filter: beta k_t - q + 1 must stay positive");
    }
}

}  // namespace

void ReturnsSeries::validate() const {
    if (q < 1) throw DimensionMismatch("ReturnsSeries: q must be positive");
    if (!timestamps.empty() && timestamps.size() != returns.size()) {
        throw DimensionMismatch("ReturnsSeries: timestamp count differs from row count");
    }
    for (std::size_t t = 0; t < returns.size(); ++t) {
        if (returns[t].size() != q) {
            throw DimensionMismatch("ReturnsSeries: row " + std::to_string(t) + " has length " +
                                    std::to_string(returns[t].size()) + ", expected " + std::to_string(q));
        }
        if (!returns[t].allFinite()) {
            throw InvalidParameter("ReturnsSeries: non-finite value in row " + std::to_string(t));
        }
    }
}

double bb_next_df(double k_prev, double beta, double k) {
    const double next = beta * k_prev + k;
    if (std::abs(next - k_prev) <= 4.0 * std::numeric_limits<double>::epsilon() * k_prev) return k_prev;
    return next;
}

double log_multigamma(double a, int q) {
    double s = 0.25 * q * (q - 1) * std::log(std::numbers::pi);
    for (int j = 0; j < q; ++j) s += log_gamma(a - 0.5 * j);
    return s;
}

double forecast_logdensity(const Vector& r, const SymPD& d_prev, double n, double lambda) {
    const int q = d_prev.dim();
    if (r.size() != q) throw DimensionMismatch("forecast_logdensity: length mismatch");
    if (!(n > q - 1)) throw InvalidParameter("forecast_logdensity: n must exceed q - 1");
    if (!(lambda > 0.0)) throw InvalidParameter("forecast_logdensity: lambda must be positive");
    const double quad = quad_form(r, d_prev) / lambda;
    return log_gamma(0.5 * (n + 1.0)) - log_gamma(0.5 * (n + 1.0 - q)) -
           0.5 * (q * std::log(lambda) + logdet_spd(d_prev)) - 0.5 * q * std::log(std::numbers::pi) -
           0.5 * (n + 1.0) * std::log1p(quad);
}

double wishart_forecast_logdensity(const SymPD& y, const SymPD& d_prev, double n, double lambda, double k) {
    const int q = d_prev.dim();
    if (y.dim() != q) throw DimensionMismatch("wishart_forecast_logdensity: dimension mismatch");
    if (!(n > q - 1) || !(k > q - 1)) {
        throw InvalidParameter("wishart_forecast_logdensity: n and k must exceed q - 1");
    }
    const SymPD ld(lambda * d_prev.matrix());
    const SymPD post(ld.matrix() + y.matrix());
    return log_multigamma(0.5 * (n + k), q) - log_multigamma(0.5 * n, q) - log_multigamma(0.5 * k, q) +
           0.5 * (k - q - 1.0) * logdet_spd(y) + 0.5 * n * logdet_spd(ld) - 0.5 * (n + k) * logdet_spd(post);
}

double logdet_update(double logdet_prev, const Vector& r, const SymPD& d_prev, double lambda, int q) {
    return std::log1p(quad_form(r, d_prev) / lambda) + q * std::log(lambda) + logdet_prev;
}

FilterOutput ue_forward_filter(const ReturnsSeries& data, const UEHyper& ue) {
    data.validate();
    if (data.q != ue.q) throw DimensionMismatch("ue_forward_filter: data dimension differs from hyperparameters");
    require_rank_one(ue.k, "ue_forward_filter");
    return run_filter(
        Model::UE, ue.d0, ue.k, ue.lambda, 0.0, ue.n + ue.k, ue.n, data.size(),
        [&](std::size_t t) -> Matrix { const Vector& r = data.returns[t - 1]; return r * r.transpose(); },
        [&](std::size_t t, const SymPD& prev, double df) {
            return forecast_logdensity(data.returns[t - 1], prev, df, ue.lambda);
        });
}

FilterOutput bb_forward_filter(const ReturnsSeries& data, const BBHyper& bb) {
    data.validate();
    if (data.q != bb.q) throw DimensionMismatch("bb_forward_filter: data dimension differs from hyperparameters");
    require_rank_one(bb.k, "bb_forward_filter");
    check_bb_path(bb);
    return run_filter(
        Model::BB, bb.d0, bb.k, bb.b, bb.beta, bb.k0, 0.0, data.size(),
        [&](std::size_t t) -> Matrix { const Vector& r = data.returns[t - 1]; return r * r.transpose(); },
        [&](std::size_t t, const SymPD& prev, double df) {
            return forecast_logdensity(data.returns[t - 1], prev, df, bb.b);
        });
}

FilterOutput ue_forward_filter_wishart(const std::vector<Matrix>& y, const UEHyper& ue) {
    if (!(ue.k > ue.q - 1)) throw InvalidParameter("ue_forward_filter_wishart: requires k > q - 1");
    std::vector<SymPD> obs(y.begin(), y.end());
    return run_filter(
        Model::UE, ue.d0, ue.k, ue.lambda, 0.0, ue.n + ue.k, ue.n, obs.size(),
        [&](std::size_t t) -> Matrix { return obs[t - 1].matrix(); },
        [&](std::size_t t, const SymPD& prev, double df) {
            return wishart_forecast_logdensity(obs[t - 1], prev, df, ue.lambda, ue.k);
        });
}

FilterOutput bb_forward_filter_wishart(const std::vector<Matrix>& y, const BBHyper& bb) {
    if (!(bb.k > bb.q - 1)) throw InvalidParameter("bb_forward_filter_wishart: requires k > q - 1");
    check_bb_path(bb);
    std::vector<SymPD> obs(y.begin(), y.end());
    return run_filter(
        Model::BB, bb.d0, bb.k, bb.b, bb.beta, bb.k0, 0.0, obs.size(),
        [&](std::size_t t) -> Matrix { return obs[t - 1].matrix(); },
        [&](std::size_t t, const SymPD& prev, double df) {
            return wishart_forecast_logdensity(obs[t - 1], prev, df, bb.b, bb.k);
        });
}

double marginal_loglik(const ReturnsSeries& data, double n, double lambda, const SymPD& d0) {
    data.validate();
    const int q = d0.dim();
    if (data.q != q) throw DimensionMismatch("marginal_loglik: data dimension differs from d0");
    if (!(n > q - 1)) throw InvalidParameter("marginal_loglik: n must exceed q - 1");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidParameter("marginal_loglik: lambda must lie in (0, 1)");
    const double norm = log_gamma(0.5 * (n + 1.0)) - log_gamma(0.5 * (n + 1.0 - q)) -
                        0.5 * q * std::log(std::numbers::pi) - 0.5 * q * std::log(lambda);
    double logdet = logdet_spd(d0);
    double total = 0.0;
    SymPD d = d0;
    for (const Vector& r : data.returns) {
        const double quad = quad_form(r, d) / lambda;
        total += norm - 0.5 * logdet - 0.5 * (n + 1.0) * std::log1p(quad);
        logdet = logdet_update(logdet, r, d, lambda, q);
        d = SymPD(symmetrize(lambda * d.matrix() + r * r.transpose()));
    }
    return total;
}

std::vector<double> linear_grid(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start)) throw InvalidParameter("linear_grid: need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = start + static_cast<double>(i) * step;
    return g;
}

GridResult grid_search(const ReturnsSeries& data, const SymPD& d0, const std::vector<double>& n_grid,
                       const std::vector<double>& lambda_grid, unsigned workers) {
    if (n_grid.empty() || lambda_grid.empty()) throw InvalidParameter("grid_search: empty grid");
    const int q = d0.dim();
    for (double n : n_grid) {
        if (!(n > q - 1)) throw InvalidParameter("grid_search: every n must exceed q - 1");
    }
    for (double l : lambda_grid) {
        if (!(l > 0.0 && l < 1.0)) throw InvalidParameter("grid_search: every lambda must lie in (0, 1)");
    }
    data.validate();

    const std::size_t total = n_grid.size() * lambda_grid.size();
    std::vector<GridPoint> surface(total);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

    auto evaluate = [&](std::size_t idx) {
        const double n = n_grid[idx / lambda_grid.size()];
        const double l = lambda_grid[idx % lambda_grid.size()];
        surface[idx] = {n, l, marginal_loglik(data, n, l, d0)};
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < total; ++i) evaluate(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < total; i += workers) evaluate(i);
            });
        }
    }

    // Order-independent argmax with deterministic tie-breaking.
    const GridPoint* best = &surface.front();
    for (const GridPoint& g : surface) {
        const bool better = g.loglik > best->loglik ||
                            (g.loglik == best->loglik &&
                             (g.n < best->n || (g.n == best->n && g.lambda < best->lambda)));
        if (better) best = &g;
    }
    return {best->n, best->lambda, best->loglik, std::move(surface)};
}

double constrained_lambda(double n, double k, int q) {
    if (!(n > q + 1)) throw InvalidParameter("constrained_lambda: requires n > q + 1");
    if (!(k > 0.0)) throw InvalidParameter("constrained_lambda: requires k > 0");
    return (n - q - 1.0) / (n - q - 1.0 + k);
}

}  // namespace wishsv
