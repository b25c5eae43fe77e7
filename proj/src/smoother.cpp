#include "wishsv/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wishsv/compare.hpp"

namespace wishsv {

namespace {

UpperTri scale_chol_of(const SymPD& d, double k) {
    return uchol(inverse_spd(d) / k);
}

std::vector<std::pair<int, int>> vech_index(int q) {
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < q; ++i) {
        for (int j = i; j < q; ++j) idx.emplace_back(i, j);
    }
    return idx;
}

struct Accumulator {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::size_t count = 0;

    explicit Accumulator(std::size_t m) : sum(m, 0.0), sumsq(m, 0.0) {}

    void add(const std::vector<double>& x) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum[i] += x[i];
            sumsq[i] += x[i] * x[i];
        }
        ++count;
    }
    double mean(std::size_t i) const { return sum[i] / static_cast<double>(count); }
    double var(std::size_t i) const {
        const double n = static_cast<double>(count);
        const double m = mean(i);
        return std::max(0.0, (sumsq[i] - n * m * m) / (n - 1.0));
    }
};

}  // namespace

SymPD ue_backward_step(const SymPD& phi_next, const UpperTri& p_t, double lambda, double k, Rng& rng) {
    const Matrix z = sample_wishart_bartlett({k, p_t}, rng);
    return SymPD(symmetrize(lambda * phi_next.matrix() + z));
}

SymPD bb_backward_step(const SymPD& phi_next, const UpperTri& p_t, double b, double beta, double k_t, Rng& rng) {
    const int q = phi_next.dim();
    const double chi_df = (1.0 - beta) * k_t;
    if (!(chi_df > 0.0)) throw InvalidParameter("bb_backward_step: (1 - beta) k_t must be positive");
    const Matrix pinv = inv_upper(p_t).matrix();
    const UpperTri ut = uchol(symmetrize(b * pinv.transpose() * phi_next.matrix() * pinv));
    Matrix u = ut.matrix();
    for (int i = 0; i < q; ++i) u(i, i) = std::sqrt(u(i, i) * u(i, i) + sample_chi2(chi_df, rng));
    return SymPD(crossprod(UpperTri(std::move(u)) * p_t));
}

PrecisionPath ue_backward_sample(const FilterOutput& filt, const UEHyper& ue, Rng& rng) {
    if (filt.model != Model::UE) throw InvalidParameter("ue_backward_sample: filter output is not UE");
    const std::size_t steps = filt.steps();
    PrecisionPath path;
    path.q = filt.q;
    path.seed = rng.seed();
    std::vector<SymPD> rev;
    rev.reserve(steps + 1);
    rev.emplace_back(crossprod(sample_bartlett_factor(filt.q, ue.n + ue.k, rng) * filt.p[steps]));
    for (std::size_t t = steps; t-- > 0;) {
        rev.push_back(ue_backward_step(rev.back(), filt.p[t], ue.lambda, ue.k, rng));
    }
    path.phi.assign(rev.rbegin(), rev.rend());
    return path;
}

PrecisionPath bb_backward_sample(const FilterOutput& filt, const BBHyper& bb, Rng& rng, BBTrace* trace) {
    if (filt.model != Model::BB) throw InvalidParameter("bb_backward_sample: filter output is not BB");
    const int q = filt.q;
    const std::size_t steps = filt.steps();
    const double sqrt_b = std::sqrt(bb.b);

    std::vector<UpperTri> pinv;
    pinv.reserve(steps + 1);
    for (const UpperTri& p : filt.p) pinv.push_back(inv_upper(p));

    PrecisionPath path;
    path.q = q;
    path.seed = rng.seed();
    path.phi.resize(steps + 1);
    if (trace) {
        trace->u_star.assign(steps + 1, UpperTri());
        trace->u_tilde.assign(steps, UpperTri());
        trace->theta.assign(steps, Vector());
    }

    UpperTri u_star = sample_bartlett_factor(q, filt.df[steps], rng);
    path.phi[steps] = SymPD(crossprod(u_star * filt.p[steps]));
    if (trace) trace->u_star[steps] = u_star;
    if (steps == 0) return path;

    UpperTri u_tilde = (u_star * filt.p[steps] * pinv[steps - 1]).scaled(sqrt_b);
    for (std::size_t t = steps; t >= 1; --t) {
        const double chi_df = (1.0 - bb.beta) * filt.df[t - 1];
        if (!(chi_df > 0.0)) throw InvalidParameter("bb_backward_sample: (1 - beta) k_t must be positive");
        Matrix u = u_tilde.matrix();
        Vector theta(q);
        for (int i = 0; i < q; ++i) {
            theta(i) = sample_chi2(chi_df, rng);
            u(i, i) = std::sqrt(u(i, i) * u(i, i) + theta(i));
        }
        u_star = UpperTri(std::move(u));
        const UpperTri up = u_star * filt.p[t - 1];
        path.phi[t - 1] = SymPD(crossprod(up));
        if (trace) {
            trace->u_tilde[t - 1] = u_tilde;
            trace->u_star[t - 1] = u_star;
            trace->theta[t - 1] = theta;
        }
        if (t >= 2) u_tilde = (up * pinv[t - 2]).scaled(sqrt_b);
    }
    return path;
}

PrecisionPath backward_sample(const FilterOutput& filt, const Hyper& hyper, Rng& rng) {
    if (const auto* ue = std::get_if<UEHyper>(&hyper)) return ue_backward_sample(filt, *ue, rng);
    return bb_backward_sample(filt, std::get<BBHyper>(hyper), rng);
}

SmoothedEnsemble sample_ensemble(const FilterOutput& filt, const Hyper& hyper, const ReturnsSeries& data,
                                 std::size_t n_draws, std::uint64_t seed, unsigned workers) {
    if (n_draws == 0) throw InvalidParameter("sample_ensemble: need at least one draw");
    SmoothedEnsemble ens;
    ens.model = filt.model;
    ens.paths.resize(n_draws);
    ens.loglik.resize(n_draws);
    auto job = [&](std::size_t i) {
        Rng rng = Rng::substream(seed, i);
        PrecisionPath p = backward_sample(filt, hyper, rng);
        p.seed = seed;
        p.draw = i;
        ens.loglik[i] = path_loglik(p, data);
        ens.paths[i] = std::move(p);
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_draws; ++i) job(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n_draws; i += workers) job(i);
            });
        }
    }
    return ens;
}

std::pair<SymPD, SymPD> sample_joint_slice(const Hyper& hyper, JointRoute route, const SymPD& d_t, double k_t,
                                           Rng& rng) {
    if (const auto* ue = std::get_if<UEHyper>(&hyper)) {
        const UpperTri p = scale_chol_of(d_t, ue->k);
        if (route == JointRoute::Forward) {
            SymPD phi_t(crossprod(sample_bartlett_factor(ue->q, ue->n + ue->k, rng) * p));
            SymPD phi_next = ue_evolve(phi_t, *ue, rng);
            return {std::move(phi_t), std::move(phi_next)};
        }
        // Prior at t + 1: Wishart(n, (k lambda D_t)^{-1}).
        SymPD phi_next(crossprod(sample_bartlett_factor(ue->q, ue->n, rng) * p.scaled(1.0 / std::sqrt(ue->lambda))));
        SymPD phi_t = ue_backward_step(phi_next, p, ue->lambda, ue->k, rng);
        return {std::move(phi_t), std::move(phi_next)};
    }
    const BBHyper& bb = std::get<BBHyper>(hyper);
    const UpperTri p = scale_chol_of(d_t, bb.k);
    if (route == JointRoute::Forward) {
        const UpperTri u = sample_bartlett_factor(bb.q, k_t, rng);
        SymPD phi_t(crossprod(u * p));
        SymPD phi_next = bb_evolve_factors(u, p, k_t, bb, rng);
        return {std::move(phi_t), std::move(phi_next)};
    }
    // Prior at t + 1: Wishart(beta k_t, (k b D_t)^{-1}).
    SymPD phi_next(crossprod(sample_bartlett_factor(bb.q, bb.beta * k_t, rng) * p.scaled(1.0 / std::sqrt(bb.b))));
    SymPD phi_t = bb_backward_step(phi_next, p, bb.b, bb.beta, k_t, rng);
    return {std::move(phi_t), std::move(phi_next)};
}

double MomentReport::max_abs_z() const {
    double m = 0.0;
    for (const auto& s : stats) m = std::max(m, std::abs(s.z));
    return m;
}

double MomentReport::max_abs_z(int order, bool offdiag_only) const {
    double m = 0.0;
    for (const auto& s : stats) {
        if (s.order == order && (!offdiag_only || s.offdiag)) m = std::max(m, std::abs(s.z));
    }
    return m;
}

MomentReport joint_consistency_oracle(const Hyper& hyper_a, JointRoute route_a, const Hyper& hyper_b,
                                      JointRoute route_b, const SymPD& d_t, double k_t, std::size_t n_draws,
                                      Rng& rng) {
    const int q = d_t.dim();
    auto dim_of = [](const Hyper& h) { return std::visit([](const auto& x) { return x.q; }, h); };
    if (dim_of(hyper_a) != q || dim_of(hyper_b) != q) {
        throw InvalidParameter("joint_consistency_oracle: hyperparameter dimension differs from D_t");
    }
    if (n_draws < 2) throw InvalidParameter("joint_consistency_oracle: need at least two draws");

    const auto idx = vech_index(q);
    const std::size_t m = 2 * idx.size();
    std::vector<std::string> names;
    std::vector<bool> off;
    for (int slot = 0; slot < 2; ++slot) {
        for (const auto& [i, j] : idx) {
            names.push_back(std::string(slot == 0 ? "phi_t" : "phi_t1") + "(" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
            off.push_back(i != j);
        }
    }
    const std::size_t n_stats = m + m * (m + 1) / 2;

    auto run = [&](const Hyper& h, JointRoute route) {
        Accumulator acc(n_stats);
        std::vector<double> x(m), s(n_stats);
        for (std::size_t d = 0; d < n_draws; ++d) {
            const auto [phi_t, phi_next] = sample_joint_slice(h, route, d_t, k_t, rng);
            std::size_t c = 0;
            for (const auto& [i, j] : idx) x[c++] = phi_t(i, j);
            for (const auto& [i, j] : idx) x[c++] = phi_next(i, j);
            std::size_t o = 0;
            for (std::size_t e = 0; e < m; ++e) s[o++] = x[e];
            for (std::size_t e = 0; e < m; ++e) {
                for (std::size_t f = e; f < m; ++f) s[o++] = x[e] * x[f];
            }
            acc.add(s);
        }
        return acc;
    };
    const Accumulator a = run(hyper_a, route_a);
    const Accumulator b = run(hyper_b, route_b);

    MomentReport report;
    auto push = [&](std::size_t o, std::string label, int order, bool offdiag) {
        const double se = std::sqrt(a.var(o) / a.count + b.var(o) / b.count);
        const double diff = a.mean(o) - b.mean(o);
        report.stats.push_back({std::move(label), order, offdiag, a.mean(o), b.mean(o), se > 0.0 ? diff / se : 0.0});
    };
    std::size_t o = 0;
    for (std::size_t e = 0; e < m; ++e) push(o++, "E[" + names[e] + "]", 1, off[e]);
    for (std::size_t e = 0; e < m; ++e) {
        for (std::size_t f = e; f < m; ++f) push(o++, "E[" + names[e] + "*" + names[f] + "]", 2, off[e] || off[f]);
    }
    return report;
}

MomentReport joint_consistency_oracle(const Hyper& hyper, const SymPD& d_t, double k_t, std::size_t n_draws,
                                      Rng& rng) {
    return joint_consistency_oracle(hyper, JointRoute::Forward, hyper, JointRoute::Backward, d_t, k_t, n_draws, rng);
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidParameter("empirical_quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("empirical_quantile: level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
}

std::vector<std::vector<double>> correlation_summary(const SmoothedEnsemble& ens, std::pair<int, int> pair,
                                                     const std::vector<double>& quantiles) {
    if (ens.paths.size() < 2) throw InvalidParameter("correlation_summary: need at least two draws");
    const int q = ens.paths.front().q;
    const auto [i, j] = pair;
    if (i == j || i < 0 || j < 0 || i >= q || j >= q) throw InvalidParameter("correlation_summary: bad index pair");
    for (double p : quantiles) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("correlation_summary: quantile outside [0, 1]");
    }
    const std::size_t len = ens.paths.front().phi.size();
    std::vector<std::vector<double>> out(len);
    std::vector<double> rho(ens.paths.size());
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t d = 0; d < ens.paths.size(); ++d) {
            const Matrix s = inverse_spd(ens.paths[d].phi.at(t));
            rho[d] = std::clamp(s(i, j) / std::sqrt(s(i, i) * s(j, j)), -1.0, 1.0);
        }
        for (double p : quantiles) out[t].push_back(empirical_quantile(rho, p));
    }
    return out;
}

}  // namespace wishsv
