#include "wishsv/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <typeinfo>

#include "wishsv/compare.hpp"

namespace wishsv {

namespace {

using nlohmann::json;

struct Prepared {
    ReturnsSeries data;
    SymPD d0;
    json warnings = json::array();
};

int header_width(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open returns file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        return static_cast<int>(std::count(line.begin(), line.end(), ',')) ;
    }
    throw ParseError(1, 1, "missing header row");
}

SymPD matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    const auto q = static_cast<Eigen::Index>(rows.size());
    Matrix m(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != q) throw DimensionMismatch("d0 must be a square matrix");
        for (Eigen::Index j = 0; j < q; ++j) m(i, j) = rows[i][j];
    }
    return SymPD(m);
}

Prepared prepare_data(const RunConfig& cfg) {
    if (!cfg.input) throw InvalidParameter(cfg.command + ": an input returns file is required");
    const int q = cfg.q > 0 ? cfg.q : header_width(*cfg.input);
    ReturnsSeries all = load_returns_csv(*cfg.input, q);
    Prepared p;
    if (cfg.presample > 0) {
        auto [head, tail] = split_presample(all, cfg.presample);
        if (cfg.demean) {
            Vector mean = Vector::Zero(q);
            for (const Vector& r : head.returns) mean += r;
            mean /= static_cast<double>(head.size());
            for (Vector& r : head.returns) r -= mean;
            for (Vector& r : tail.returns) r -= mean;
        }
        if (cfg.d0) {
            p.d0 = matrix_from_rows(*cfg.d0);
        } else {
            PresampleScale ps = d0_from_presample(head, cfg.ridge);
            if (ps.warning) p.warnings.push_back(*ps.warning);
            p.d0 = ps.d0;
        }
        p.data = std::move(tail);
    } else {
        if (!cfg.d0) throw InvalidParameter(cfg.command + ": supply d0 or a presample window");
        p.d0 = matrix_from_rows(*cfg.d0);
        p.data = std::move(all);
    }
    if (p.d0.dim() != q) throw DimensionMismatch("d0 dimension differs from the data");
    return p;
}

UEHyper make_ue(const RunConfig& cfg, const SymPD& d0) {
    return UEHyper(cfg.k, cfg.n, cfg.lambda, d0);
}

BBHyper make_bb(const RunConfig& cfg, const SymPD& d0) {
    if (cfg.model == ModelSelector::BB && cfg.beta && cfg.b && cfg.k0) {
        return BBHyper(cfg.k, *cfg.beta, *cfg.b, *cfg.k0, d0);
    }
    return match_ue_to_bb(make_ue(cfg, d0));
}

std::vector<Model> models_of(ModelSelector s) {
    switch (s) {
        case ModelSelector::UE: return {Model::UE};
        case ModelSelector::BB: return {Model::BB};
        case ModelSelector::Matched: return {Model::UE, Model::BB};
    }
    return {};
}

Hyper hyper_for(Model m, const RunConfig& cfg, const SymPD& d0) {
    if (m == Model::UE) return make_ue(cfg, d0);
    return make_bb(cfg, d0);
}

FilterOutput filter_for(const Hyper& h, const ReturnsSeries& data) {
    if (const auto* ue = std::get_if<UEHyper>(&h)) return ue_forward_filter(data, *ue);
    return bb_forward_filter(data, std::get<BBHyper>(h));
}

void assert_matched_forecasts(const FilterOutput& ue, const FilterOutput& bb) {
    for (std::size_t t = 0; t < ue.log_forecast.size(); ++t) {
        if (std::abs(ue.log_forecast[t] - bb.log_forecast[t]) > 1e-10) {
            throw Error("matched UE and BB forecast densities disagree at t = " + std::to_string(t + 1));
        }
    }
}

std::vector<std::string> vech_names(const std::string& prefix, int q) {
    std::vector<std::string> names;
    for (int i = 0; i < q; ++i) {
        for (int j = i; j < q; ++j) names.push_back(prefix + "_" + std::to_string(i + 1) + std::to_string(j + 1));
    }
    return names;
}

void append_vech(std::vector<double>& row, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) row.push_back(m(i, j));
    }
}

std::string quantile_name(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "q%g", p);
    return buf;
}

ResultsBundle cmd_simulate(const RunConfig& cfg) {
    if (cfg.q < 1) throw InvalidParameter("simulate: q must be given");
    const SymPD d0 = cfg.d0 ? matrix_from_rows(*cfg.d0) : SymPD::identity(cfg.q);
    const Model m = cfg.model == ModelSelector::BB ? Model::BB : Model::UE;
    const Simulation sim = simulate(hyper_for(m, cfg, d0), cfg.steps, cfg.seed);
    std::filesystem::create_directories(cfg.out);
    write_returns_csv(cfg.out / "returns.csv", sim.data);

    ResultsBundle b;
    Table truth;
    truth.columns = {"t"};
    for (auto& s : vech_names("phi", cfg.q)) truth.columns.push_back(s);
    for (std::size_t t = 0; t < sim.truth.phi.size(); ++t) {
        std::vector<double> row{static_cast<double>(t)};
        append_vech(row, sim.truth.phi[t].matrix());
        truth.rows.push_back(std::move(row));
    }
    b.tables["truth"] = std::move(truth);
    b.scalars["steps"] = static_cast<double>(cfg.steps);
    b.metadata["model"] = model_name(m);
    return b;
}

ResultsBundle cmd_filter(const RunConfig& cfg) {
    Prepared p = prepare_data(cfg);
    ResultsBundle b;
    std::vector<FilterOutput> outs;
    for (Model m : models_of(cfg.model)) {
        FilterOutput f = filter_for(hyper_for(m, cfg, p.d0), p.data);
        Table t;
        t.columns = {"t", "logdet_D", "df", "log_forecast"};
        for (auto& s : vech_names("D", f.q)) t.columns.push_back(s);
        for (std::size_t s = 0; s <= f.steps(); ++s) {
            std::vector<double> row{static_cast<double>(s), logdet_spd(f.d[s]), f.df[s],
                                    s == 0 ? 0.0 : f.log_forecast[s - 1]};
            append_vech(row, f.d[s].matrix());
            t.rows.push_back(std::move(row));
        }
        b.tables[std::string("filtered_") + model_name(m)] = std::move(t);
        b.scalars[std::string("log_marginal_") + model_name(m)] = f.log_marginal;
        outs.push_back(std::move(f));
    }
    if (outs.size() == 2) assert_matched_forecasts(outs[0], outs[1]);
    b.metadata["warnings"] = p.warnings;
    return b;
}

ResultsBundle cmd_grid_search(const RunConfig& cfg) {
    Prepared p = prepare_data(cfg);
    std::vector<double> n_grid = cfg.n_grid;
    if (n_grid.empty()) {
        for (int n = 3; n <= 20; ++n) n_grid.push_back(n);
    }
    const std::vector<double> lgrid = linear_grid(cfg.lambda_start, cfg.lambda_stop, cfg.lambda_step);
    const GridResult g = grid_search(p.data, p.d0, n_grid, lgrid, cfg.workers);

    ResultsBundle b;
    Table t;
    t.columns = {"n", "lambda", "loglik"};
    for (const auto& pt : g.surface) t.rows.push_back({pt.n, pt.lambda, pt.loglik});
    b.tables["surface"] = std::move(t);
    b.scalars["n_star"] = g.n_star;
    b.scalars["lambda_star"] = g.lambda_star;
    b.scalars["best_loglik"] = g.best_loglik;

    // Maximizer along the constrained curve 1/lambda = 1 + k/(n - q - 1).
    const int q = p.d0.dim();
    double best = -std::numeric_limits<double>::infinity();
    for (double n : n_grid) {
        if (!(n > q + 1)) continue;
        const double l = constrained_lambda(n, cfg.k, q);
        const double ll = marginal_loglik(p.data, n, l, p.d0);
        if (ll > best) {
            best = ll;
            b.scalars["constrained_n_star"] = n;
            b.scalars["constrained_lambda_star"] = l;
            b.scalars["constrained_best_loglik"] = ll;
        }
    }
    b.metadata["warnings"] = p.warnings;
    return b;
}

ResultsBundle cmd_smooth(const RunConfig& cfg) {
    Prepared p = prepare_data(cfg);
    ResultsBundle b;
    for (Model m : models_of(cfg.model)) {
        const Hyper h = hyper_for(m, cfg, p.d0);
        const FilterOutput f = filter_for(h, p.data);
        const SmoothedEnsemble ens = sample_ensemble(f, h, p.data, cfg.draws, cfg.seed, cfg.workers);
        const int q = f.q;
        for (int i = 0; i < q; ++i) {
            for (int j = i + 1; j < q; ++j) {
                const auto curves = correlation_summary(ens, {i, j}, cfg.quantiles);
                Table t;
                t.columns = {"t"};
                for (double qq : cfg.quantiles) t.columns.push_back(quantile_name(qq));
                for (std::size_t s = 0; s < curves.size(); ++s) {
                    std::vector<double> row{static_cast<double>(s)};
                    row.insert(row.end(), curves[s].begin(), curves[s].end());
                    t.rows.push_back(std::move(row));
                }
                b.tables["correlation_" + std::string(model_name(m)) + "_" + std::to_string(i + 1) +
                         std::to_string(j + 1)] = std::move(t);
            }
        }
        Table ll;
        ll.columns = {"draw", "loglik"};
        for (std::size_t d = 0; d < ens.loglik.size(); ++d) ll.rows.push_back({static_cast<double>(d), ens.loglik[d]});
        b.tables[std::string("loglik_") + model_name(m)] = std::move(ll);
    }
    b.metadata["warnings"] = p.warnings;
    return b;
}

ResultsBundle cmd_compare_plr(const RunConfig& cfg) {
    Prepared p = prepare_data(cfg);
    // Matched: UE against BB. A single model is compared against itself.
    const Model ma = cfg.model == ModelSelector::BB ? Model::BB : Model::UE;
    const Model mb = cfg.model == ModelSelector::UE ? Model::UE : Model::BB;
    const Hyper ha = hyper_for(ma, cfg, p.d0);
    const Hyper hb = hyper_for(mb, cfg, p.d0);
    const FilterOutput fa = filter_for(ha, p.data);
    const FilterOutput fb = filter_for(hb, p.data);
    if (cfg.model == ModelSelector::Matched) assert_matched_forecasts(fa, fb);
    const SmoothedEnsemble ea = sample_ensemble(fa, ha, p.data, cfg.draws, cfg.seed, cfg.workers);
    const SmoothedEnsemble eb = sample_ensemble(fb, hb, p.data, cfg.draws, cfg.seed, cfg.workers);

    ResultsBundle b;
    b.scalars["log_plr"] = log_plr(ea, eb, p.data);
    Table t;
    t.columns = {"draw", std::string("loglik_a_") + model_name(ma), std::string("loglik_b_") + model_name(mb)};
    for (std::size_t d = 0; d < cfg.draws; ++d) t.rows.push_back({static_cast<double>(d), ea.loglik[d], eb.loglik[d]});
    b.tables["loglik"] = std::move(t);
    b.metadata["warnings"] = p.warnings;
    return b;
}

ResultsBundle cmd_compare_mixture(const RunConfig& cfg) {
    Prepared p = prepare_data(cfg);
    const UEHyper ue = make_ue(cfg, p.d0);
    const BBHyper bb = make_bb(cfg, p.d0);
    MixtureConfig mc;
    mc.a0 = cfg.a0;
    mc.b0 = cfg.b0;
    mc.iterations = cfg.iterations;
    mc.burn_in = cfg.burn_in.value_or(cfg.iterations / 10);
    mc.seed = cfg.seed;
    const MixtureTrace tr = mixture_gibbs(p.data, ue, bb, mc);

    std::vector<double> below(tr.alpha.size());
    for (std::size_t i = 0; i < tr.alpha.size(); ++i) below[i] = tr.alpha[i] < 0.5 ? 1.0 : 0.0;
    ResultsBundle b;
    b.scalars["alpha_mean"] = tr.mean_alpha();
    b.scalars["alpha_mean_se"] = batch_means_se(tr.alpha, cfg.batches);
    b.scalars["p_alpha_below_half"] = std::accumulate(below.begin(), below.end(), 0.0) / below.size();
    b.scalars["p_alpha_below_half_se"] = batch_means_se(below, cfg.batches);
    b.scalars["burn_in"] = static_cast<double>(mc.burn_in);
    b.scalars["alpha_init"] = tr.alpha_init;
    Table t;
    t.columns = {"iteration", "alpha", "z_mean"};
    for (std::size_t i = 0; i < tr.alpha.size(); ++i) {
        const auto& z = tr.z[i];
        const double zm = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
        t.rows.push_back({static_cast<double>(mc.burn_in + i), tr.alpha[i], zm});
    }
    b.tables["alpha_trace"] = std::move(t);
    b.metadata["initialization"] = "alpha from prior; z iid Bernoulli(1/2); paths from filter + backward sampler";
    b.metadata["warnings"] = p.warnings;
    return b;
}

ResultsBundle cmd_ppc(const RunConfig& cfg) {
    Prepared p = prepare_data(cfg);
    ResultsBundle b;
    std::vector<PpcResult> results;
    for (Model m : models_of(cfg.model)) {
        const FilterOutput f = filter_for(hyper_for(m, cfg, p.d0), p.data);
        PpcResult r = ppc_intervals(f, p.data, cfg.level);
        Table t;
        t.columns = {"t"};
        for (int i = 0; i < f.q; ++i) t.columns.push_back("length_" + std::to_string(i + 1));
        t.columns.push_back("cumulative_coverage");
        for (std::size_t s = 0; s < r.length.size(); ++s) {
            std::vector<double> row{static_cast<double>(s + 1)};
            for (int i = 0; i < f.q; ++i) row.push_back(r.length[s](i));
            row.push_back(r.cumulative_coverage[s]);
            t.rows.push_back(std::move(row));
        }
        b.tables[std::string("ppc_") + model_name(m)] = std::move(t);
        b.scalars[std::string("coverage_") + model_name(m)] =
            r.cumulative_coverage.empty() ? 0.0 : r.cumulative_coverage.back();
        results.push_back(std::move(r));
    }
    b.metadata["warnings"] = p.warnings;
    return b;
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void maybe(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

ModelSelector parse_model_selector(const std::string& s) {
    if (s == "ue") return ModelSelector::UE;
    if (s == "bb") return ModelSelector::BB;
    if (s == "matched") return ModelSelector::Matched;
    throw InvalidParameter("unknown model '" + s + "' (expected ue, bb or matched)");
}

const char* selector_name(ModelSelector m) {
    switch (m) {
        case ModelSelector::UE: return "ue";
        case ModelSelector::BB: return "bb";
        case ModelSelector::Matched: return "matched";
    }
    return "?";
}

json RunConfig::to_json() const {
    json j;
    j["command"] = command;
    j["model"] = selector_name(model);
    j["n"] = n;
    j["lambda"] = lambda;
    j["k"] = k;
    if (beta) j["beta"] = *beta;
    if (b) j["b"] = *b;
    if (k0) j["k0"] = *k0;
    if (input) j["input"] = input->string();
    j["q"] = q;
    if (d0) j["d0"] = *d0;
    j["presample"] = presample;
    if (ridge) j["ridge"] = *ridge;
    j["demean"] = demean;
    j["steps"] = steps;
    j["n_grid"] = n_grid;
    j["lambda_grid"] = {lambda_start, lambda_stop, lambda_step};
    j["seed"] = seed;
    j["draws"] = draws;
    j["quantiles"] = quantiles;
    j["a0"] = a0;
    j["b0"] = b0;
    j["iterations"] = iterations;
    if (burn_in) j["burn_in"] = *burn_in;
    j["batches"] = batches;
    j["level"] = level;
    j["out"] = out.string();
    j["workers"] = workers;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    maybe(j, "command", c.command);
    if (j.contains("model")) c.model = parse_model_selector(j.at("model").get<std::string>());
    maybe(j, "n", c.n);
    maybe(j, "lambda", c.lambda);
    maybe(j, "k", c.k);
    maybe(j, "beta", c.beta);
    maybe(j, "b", c.b);
    maybe(j, "k0", c.k0);
    if (j.contains("input")) c.input = j.at("input").get<std::string>();
    maybe(j, "q", c.q);
    maybe(j, "d0", c.d0);
    maybe(j, "presample", c.presample);
    maybe(j, "ridge", c.ridge);
    maybe(j, "demean", c.demean);
    maybe(j, "steps", c.steps);
    maybe(j, "n_grid", c.n_grid);
    if (j.contains("lambda_grid")) {
        const auto g = j.at("lambda_grid").get<std::vector<double>>();
        if (g.size() != 3) throw InvalidParameter("lambda_grid must be [start, stop, step]");
        c.lambda_start = g[0];
        c.lambda_stop = g[1];
        c.lambda_step = g[2];
    }
    maybe(j, "seed", c.seed);
    maybe(j, "draws", c.draws);
    maybe(j, "quantiles", c.quantiles);
    maybe(j, "a0", c.a0);
    maybe(j, "b0", c.b0);
    maybe(j, "iterations", c.iterations);
    maybe(j, "burn_in", c.burn_in);
    maybe(j, "batches", c.batches);
    maybe(j, "level", c.level);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    maybe(j, "workers", c.workers);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    return config_from_json(json::parse(in));
}

ResultsBundle run_command(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ResultsBundle b;
    if (cfg.command == "simulate") {
        b = cmd_simulate(cfg);
    } else if (cfg.command == "filter") {
        b = cmd_filter(cfg);
    } else if (cfg.command == "grid-search") {
        b = cmd_grid_search(cfg);
    } else if (cfg.command == "smooth") {
        b = cmd_smooth(cfg);
    } else if (cfg.command == "compare-plr") {
        b = cmd_compare_plr(cfg);
    } else if (cfg.command == "compare-mixture") {
        b = cmd_compare_mixture(cfg);
    } else if (cfg.command == "ppc") {
        b = cmd_ppc(cfg);
    } else {
        throw InvalidParameter("unknown command '" + cfg.command + "'");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    b.metadata["command"] = cfg.command;
    b.metadata["config"] = cfg.to_json();
    b.metadata["seed"] = cfg.seed;
    b.metadata["rng"] = kRngAlgorithm;
    b.metadata["version"] = kVersion;
    b.metadata["wall_time_s"] = wall;
    if (!b.metadata.contains("warnings")) b.metadata["warnings"] = json::array();
    write_bundle(cfg.out, b);
    return b;
}

json error_record(const std::exception& e) {
    std::string kind = "Error";
    if (dynamic_cast<const ParseError*>(&e)) kind = "ParseError";
    else if (dynamic_cast<const DimensionMismatch*>(&e)) kind = "DimensionMismatch";
    else if (dynamic_cast<const NotPositiveDefinite*>(&e)) kind = "NotPositiveDefinite";
    else if (dynamic_cast<const SingularMatrix*>(&e)) kind = "SingularMatrix";
    else if (dynamic_cast<const InvalidParameter*>(&e)) kind = "InvalidParameter";
    else if (dynamic_cast<const EmptyEnsemble*>(&e)) kind = "EmptyEnsemble";
    return {{"status", "error"}, {"kind", kind}, {"message", e.what()}};
}

}  // namespace wishsv
