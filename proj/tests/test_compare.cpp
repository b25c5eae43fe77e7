#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <numbers>

#include "support.hpp"
#include "wishsv/compare.hpp"
#include "wishsv/io.hpp"

using namespace wishsv;
using testsupport::Ref;
using testsupport::Stat;

namespace {

PrecisionPath constant_path(int q, std::size_t T, const Matrix& phi) {
    PrecisionPath p;
    p.q = q;
    for (std::size_t t = 0; t <= T; ++t) p.phi.emplace_back(phi);
    return p;
}

ReturnsSeries zeros(int q, std::size_t T) {
    ReturnsSeries r;
    r.q = q;
    r.returns.assign(T, Vector::Zero(q));
    return r;
}

// Direct multivariate normal log density via determinant and inverse.
double naive_loglik(const PrecisionPath& p, const ReturnsSeries& data) {
    double s = 0;
    for (std::size_t t = 1; t < p.phi.size(); ++t) {
        const Matrix cov = p.phi[t].matrix().inverse();
        const Vector& r = data.returns[t - 1];
        const double quad = r.dot(cov.ldlt().solve(r));
        s += -0.5 * std::log(cov.determinant()) - 0.5 * quad - 0.5 * p.q * std::log(2 * std::numbers::pi);
    }
    return s;
}

}  // namespace

TEST_CASE("path log-likelihood") {
    CHECK(path_loglik(constant_path(1, 2, Matrix::Identity(1, 1)), zeros(1, 2)) ==
          doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(1e-15));
    CHECK(-std::log(2 * std::numbers::pi) == doctest::Approx(-1.837877).epsilon(1e-6));

    // scaling every state by c adds (T q / 2) log c when r = 0
    const Matrix a = (Matrix(2, 2) << 2, 0.5, 0.5, 1).finished();
    const double base = path_loglik(constant_path(2, 7, a), zeros(2, 7));
    CHECK(path_loglik(constant_path(2, 7, 3.5 * a), zeros(2, 7)) - base ==
          doctest::Approx(7.0 * 2 / 2 * std::log(3.5)).epsilon(1e-12));

    Ref ref(601);
    for (int rep = 0; rep < 20; ++rep) {
        PrecisionPath p;
        p.q = 2;
        for (int t = 0; t <= 6; ++t) p.phi.emplace_back(testsupport::random_spd(2, ref));
        const ReturnsSeries data = testsupport::random_returns(2, 6, ref);
        CHECK(std::abs(path_loglik(p, data) - naive_loglik(p, data)) < 1e-10);
    }

    CHECK_THROWS_AS(path_loglik(constant_path(1, 3, Matrix::Identity(1, 1)), zeros(1, 2)), DimensionMismatch);
    CHECK_THROWS_AS(path_loglik(constant_path(2, 2, Matrix::Identity(2, 2)), zeros(1, 2)), DimensionMismatch);
}

TEST_CASE("log-sum-exp") {
    const std::vector<double> pair{-1000.0, -1000.0};
    CHECK(log_sum_exp(pair) == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
    const std::vector<double> big{1e4, 1e4 - 1, -1e4};
    CHECK(std::isfinite(log_sum_exp(big)));
    CHECK(log_sum_exp(big) == doctest::Approx(1e4 + std::log1p(std::exp(-1.0))).epsilon(1e-15));
    CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), EmptyEnsemble);

    Ref ref(602);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(1 + rep % 17);
        for (auto& v : x) v = 50 * ref.normal();
        const double l = log_sum_exp(x);
        const double mx = *std::max_element(x.begin(), x.end());
        CHECK(l >= mx);
        CHECK(l <= mx + std::log(static_cast<double>(x.size())) + 1e-12);
        std::vector<double> shifted = x;
        for (auto& v : shifted) v += 123.25;
        CHECK(log_sum_exp(shifted) == doctest::Approx(l + 123.25).epsilon(1e-13));
    }
}

TEST_CASE("log posterior likelihood ratio") {
    Ref ref(603);
    std::vector<double> a(200), b(150);
    for (auto& v : a) v = -300 + 5 * ref.normal();
    for (auto& v : b) v = -305 + 5 * ref.normal();
    CHECK(log_plr(a, a) == 0.0);
    CHECK(log_plr(a, b) == -log_plr(b, a));

    std::vector<double> shifted = a;
    for (auto& v : shifted) v -= 7.5;
    CHECK(log_plr(a, shifted) == doctest::Approx(7.5).epsilon(1e-12));

    // unequal sizes are normalized per side: duplicating an ensemble changes nothing
    std::vector<double> doubled = a;
    doubled.insert(doubled.end(), a.begin(), a.end());
    CHECK(std::abs(log_plr(doubled, a)) < 1e-12);

    std::vector<double> huge_u(50), huge_b(50);
    for (auto& v : huge_u) v = -1e4 + ref.normal();
    for (auto& v : huge_b) v = 1e4 + ref.normal();
    const double l = log_plr(huge_u, huge_b);
    CHECK(std::isfinite(l));
    CHECK(l == doctest::Approx(-2e4).epsilon(1e-3));

    CHECK_THROWS_AS(log_plr(std::vector<double>{}, a), EmptyEnsemble);
}

TEST_CASE("log PLR from smoothed ensembles") {
    Ref ref(604);
    const UEHyper ue(1, 5, 0.9, SymPD(testsupport::random_spd(2, ref)));
    const BBHyper bb = match_ue_to_bb(ue);
    const ReturnsSeries data = testsupport::random_returns(2, 30, ref);
    const SmoothedEnsemble eu = sample_ensemble(ue_forward_filter(data, ue), ue, data, 40, 3, 1);
    const SmoothedEnsemble eb = sample_ensemble(bb_forward_filter(data, bb), bb, data, 40, 3, 1);
    CHECK(log_plr(eu, eu, data) == 0.0);
    CHECK(log_plr(eu, eb, data) == -log_plr(eb, eu, data));
    CHECK(std::isfinite(log_plr(eu, eb, data)));
    CHECK_THROWS_AS(log_plr(SmoothedEnsemble{}, eb, data), EmptyEnsemble);
    CHECK_THROWS_AS(log_plr(eu, eb, testsupport::random_returns(2, 29, ref)), DimensionMismatch);
}

TEST_CASE("mixture indicator probability") {
    CHECK(mixture_z_probability(0.0, 0.0) == 0.5);
    CHECK(mixture_z_probability(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-15));
    Ref ref(605);
    for (int rep = 0; rep < 200; ++rep) {
        const double w1 = 20 * ref.normal(), w0 = 20 * ref.normal(), c = 1e3 * ref.normal();
        const double p = mixture_z_probability(w1, w0);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(mixture_z_probability(w1 + c, w0 + c) == doctest::Approx(p).epsilon(1e-12));
        CHECK(mixture_z_probability(w0, w1) == doctest::Approx(1 - p).epsilon(1e-12));
    }
    CHECK(mixture_z_probability(-1e300, 0.0) == 0.0);
    CHECK(mixture_z_probability(1e4, -1e4) == 1.0);
}

TEST_CASE("mixture Gibbs with identical likelihoods recovers the prior") {
    Ref ref(606);
    const UEHyper ue(1, 3, 0.9, SymPD::identity(1));
    const BBHyper bb = match_ue_to_bb(ue);
    const ReturnsSeries data = testsupport::random_returns(1, 5, ref);
    for (const auto [a0, b0] : {std::pair{1.0, 1.0}, std::pair{10.0, 1.0}}) {
        MixtureConfig cfg;
        cfg.a0 = a0;
        cfg.b0 = b0;
        cfg.iterations = 61000;
        cfg.burn_in = 1000;
        cfg.seed = 606;
        cfg.force_identical = true;
        const MixtureTrace tr = mixture_gibbs(data, ue, bb, cfg);
        REQUIRE(tr.alpha.size() == 60000);
        REQUIRE(tr.beta_shape_sum.size() == 61000);
        for (double s : tr.beta_shape_sum) REQUIRE(s == a0 + b0 + 5);
        for (double a : tr.alpha) {
            REQUIRE(a > 0.0);
            REQUIRE(a < 1.0);
        }
        // lag-1 autocorrelation is T / (a0 + b0 + T); thin well past it
        std::vector<double> thin;
        for (std::size_t i = 0; i < tr.alpha.size(); i += 30) thin.push_back(tr.alpha[i]);
        const boost::math::beta_distribution<> prior(a0, b0);
        CAPTURE(a0);
        CHECK(testsupport::ks(thin, [&](double v) { return boost::math::cdf(prior, v); }) <
              1.95 / std::sqrt(static_cast<double>(thin.size())));
    }
}

TEST_CASE("mixture Gibbs alpha update is conjugate") {
    Ref ref(607);
    const UEHyper ue(1, 4, 0.85, SymPD(testsupport::random_spd(2, ref)));
    const BBHyper bb = match_ue_to_bb(ue);
    const ReturnsSeries data = testsupport::random_returns(2, 10, ref);

    // all-ones indicator rows: alpha | z ~ Beta(11, 1) under a uniform prior
    MixtureConfig cfg;
    cfg.iterations = 40000;
    cfg.burn_in = 0;
    cfg.seed = 607;
    cfg.force_identical = true;
    const MixtureTrace tr = mixture_gibbs(data, ue, bb, cfg);
    std::vector<double> ones;
    for (std::size_t i = 0; i < tr.alpha.size(); ++i) {
        if (std::all_of(tr.z[i].begin(), tr.z[i].end(), [](std::uint8_t v) { return v == 1; })) {
            ones.push_back(tr.alpha[i]);
        }
    }
    REQUIRE(ones.size() > 1000);
    CHECK(testsupport::ks(ones, [](double v) { return std::pow(v, 11.0); }) <
          1.95 / std::sqrt(static_cast<double>(ones.size())));

    // with real likelihoods, each alpha has a Beta(a0 + sum z, b0 + T - sum z)
    // probability integral transform that is uniform
    cfg.force_identical = false;
    cfg.iterations = 4000;
    cfg.burn_in = 400;
    cfg.a0 = 2;
    cfg.b0 = 3;
    const MixtureTrace real = mixture_gibbs(data, ue, bb, cfg);
    REQUIRE(real.alpha.size() == 3600);
    REQUIRE(real.z.size() == 3600);
    std::vector<double> pit;
    for (std::size_t i = 0; i < real.alpha.size(); ++i) {
        const double s = std::accumulate(real.z[i].begin(), real.z[i].end(), 0.0);
        pit.push_back(boost::math::cdf(boost::math::beta_distribution<>(2 + s, 3 + 10 - s), real.alpha[i]));
    }
    CHECK(testsupport::ks(pit, [](double v) { return v; }) < 1.95 / std::sqrt(3600.0));
    for (double s : real.beta_shape_sum) CHECK(s == 15.0);
}

TEST_CASE("mixture Gibbs configuration and reproducibility") {
    Ref ref(608);
    const UEHyper ue(1, 4, 0.85, SymPD::identity(2));
    const BBHyper bb = match_ue_to_bb(ue);
    const ReturnsSeries data = testsupport::random_returns(2, 8, ref);
    MixtureConfig cfg;
    cfg.iterations = 300;
    cfg.burn_in = 30;
    cfg.seed = 9;
    const MixtureTrace a = mixture_gibbs(data, ue, bb, cfg);
    const MixtureTrace b = mixture_gibbs(data, ue, bb, cfg);
    CHECK(a.alpha == b.alpha);
    CHECK(a.z == b.z);
    CHECK(a.burn_in == 30);
    CHECK(a.alpha_init == b.alpha_init);
    CHECK(a.mean_alpha() > 0.0);
    CHECK(a.mean_alpha() < 1.0);

    MixtureConfig bad = cfg;
    bad.a0 = 0;
    CHECK_THROWS_AS(mixture_gibbs(data, ue, bb, bad), InvalidParameter);
    bad = cfg;
    bad.burn_in = bad.iterations;
    CHECK_THROWS_AS(mixture_gibbs(data, ue, bb, bad), InvalidParameter);
    CHECK_THROWS_AS(mixture_gibbs(zeros(2, 0), ue, bb, cfg), InvalidParameter);
    CHECK_THROWS_AS(mixture_gibbs(zeros(3, 4), ue, bb, cfg), DimensionMismatch);
}

TEST_CASE("mixture prior sensitivity (reported)") {
    Ref ref(609);
    const UEHyper ue(1, 50, 0.98, SymPD::identity(2));
    const BBHyper bb = match_ue_to_bb(ue);
    const Simulation sim = simulate(ue, 60, 609);
    double means[2];
    int i = 0;
    for (const auto [a0, b0] : {std::pair{1.0, 1.0}, std::pair{10.0, 1.0}}) {
        MixtureConfig cfg;
        cfg.a0 = a0;
        cfg.b0 = b0;
        cfg.iterations = 2000;
        cfg.burn_in = 200;
        cfg.seed = 609;
        means[i++] = mixture_gibbs(sim.data, ue, bb, cfg).mean_alpha();
    }
    MESSAGE("posterior mean of alpha: prior (1,1) -> " << means[0] << ", prior (10,1) -> " << means[1]);
    CHECK(means[1] < 10.0 / 11.0);
}

TEST_CASE("batch means standard error") {
    const std::vector<double> constant(1000, 3.25);
    CHECK(batch_means_se(constant, 10) == 0.0);

    Ref ref(610);
    std::vector<double> iid(10000);
    for (auto& v : iid) v = ref.normal();
    CHECK(batch_means_se(iid, 100) == doctest::Approx(0.01).epsilon(0.5));

    std::vector<double> ar(100000);
    double x = ref.normal() / std::sqrt(1 - 0.81);
    for (auto& v : ar) {
        x = 0.9 * x + ref.normal();
        v = x;
    }
    // stationary variance 1 / (1 - 0.81); inflation of the SE of the mean is sqrt(1.9 / 0.1)
    const double iid_se = std::sqrt(1.0 / (1 - 0.81) / 1e5);
    CHECK(batch_means_se(ar, 100) / iid_se == doctest::Approx(std::sqrt(19.0)).epsilon(0.3));

    // a trailing remainder is dropped
    std::vector<double> tail{1, 2, 3, 4, 100};
    CHECK(batch_means_se(tail, 2) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(batch_means_se(iid, 1), InvalidParameter);
    CHECK_THROWS_AS(batch_means_se(std::vector<double>{1.0}, 2), InvalidParameter);
}

TEST_CASE("predictive intervals") {
    Ref ref(611);
    // large n keeps the simulated precisions well conditioned over long paths
    const UEHyper ue(1, 50, 0.98, SymPD(testsupport::random_spd(3, ref)));
    const BBHyper bb = match_ue_to_bb(ue);
    const Simulation sim = simulate(ue, 2000, 611);
    const PpcResult pu = ppc_intervals(ue_forward_filter(sim.data, ue), sim.data, 0.95);
    const PpcResult pb = ppc_intervals(bb_forward_filter(sim.data, bb), sim.data, 0.95);
    REQUIRE(pu.upper.size() == 2000);
    REQUIRE(pu.cumulative_coverage.size() == 2000);
    for (std::size_t t = 0; t < 2000; ++t) {
        CHECK((pu.upper[t].array() > 0).all());
        CHECK(pu.length[t] == 2.0 * pu.upper[t]);
        CHECK(pu.upper[t] == pb.upper[t]);
        CHECK(pu.cumulative_coverage[t] == pb.cumulative_coverage[t]);
        const double c = pu.cumulative_coverage[t];
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        if (t > 0) CHECK(std::abs(c - pu.cumulative_coverage[t - 1]) <= 1.0 / (t + 1) + 1e-15);
    }
    const double terminal = pu.cumulative_coverage.back();
    CHECK(terminal >= 0.935);
    CHECK(terminal <= 0.965);

    // wider level, wider intervals
    const PpcResult p99 = ppc_intervals(ue_forward_filter(sim.data, ue), sim.data, 0.99);
    CHECK((p99.upper[10].array() > pu.upper[10].array()).all());

    // q = 1, first step: nu = n, scale^2 = lambda D0 / n
    const UEHyper one(1, 4, 0.8, SymPD(Matrix::Constant(1, 1, 2.0)));
    ReturnsSeries r1;
    r1.q = 1;
    r1.returns.push_back(Vector::Constant(1, 0.1));
    const PpcResult p1 = ppc_intervals(ue_forward_filter(r1, one), r1, 0.95);
    // Student t 0.975 quantile with 4 df
    CHECK(p1.upper[0](0) == doctest::Approx(2.7764451051977987 * std::sqrt(0.8 * 2.0 / 4.0)).epsilon(1e-12));
    CHECK(p1.cumulative_coverage[0] == 1.0);

    CHECK_THROWS_AS(ppc_intervals(ue_forward_filter(r1, one), r1, 1.0), InvalidParameter);
    CHECK_THROWS_AS(ppc_intervals(ue_forward_filter(r1, one), zeros(1, 2), 0.9), DimensionMismatch);
}

TEST_CASE("KS statistic") {
    CHECK(ks_statistic({0.5}, [](double v) { return v; }) == 0.5);
    CHECK(ks_statistic({0.25, 0.75}, [](double v) { return v; }) == 0.25);
    CHECK_THROWS_AS(ks_statistic({}, [](double v) { return v; }), InvalidParameter);
}
