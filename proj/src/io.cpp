#include "wishsv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wishsv {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_finite(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Howard Hinnant's civil-from-days.
std::string civil_from_days(long long z) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", y + (m <= 2), m, d);
    return buf;
}

}  // namespace

ParseError::ParseError(std::size_t row_, std::size_t column_, const std::string& what)
    : Error("line " + std::to_string(row_) + ", column " + std::to_string(column_) + ": " + what),
      row(row_),
      column(column_) {}

ReturnsSeries parse_returns_csv(std::istream& in, int q) {
    if (q < 1) throw InvalidParameter("parse_returns_csv: q must be positive");
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::vector<std::string>> header;
    while (!header && std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) header = split_fields(line);
    }
    if (!header) throw ParseError(lineno, 1, "missing header row");
    if (header->size() != static_cast<std::size_t>(q) + 1) {
        throw DimensionMismatch("returns file has " + std::to_string(header->size() - 1) + " return columns, expected " +
                                std::to_string(q));
    }
    ReturnsSeries out;
    out.q = q;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != static_cast<std::size_t>(q) + 1) {
            throw ParseError(lineno, std::min(fields.size(), static_cast<std::size_t>(q) + 1) + 1,
                             "expected " + std::to_string(q + 1) + " fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) throw ParseError(lineno, 1, "empty timestamp");
        Vector r(q);
        for (int i = 0; i < q; ++i) {
            const auto v = parse_finite(fields[i + 1]);
            if (!v) throw ParseError(lineno, i + 2, "not a finite number: '" + fields[i + 1] + "'");
            r(i) = *v;
        }
        out.timestamps.push_back(fields[0]);
        out.returns.push_back(std::move(r));
    }
    return out;
}

ReturnsSeries load_returns_csv(const std::filesystem::path& path, int q) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open returns file " + path.string());
    return parse_returns_csv(in, q);
}

void write_returns_csv(const std::filesystem::path& path, const ReturnsSeries& data,
                       const std::vector<std::string>& column_names) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << "timestamp";
    for (int i = 0; i < data.q; ++i) {
        os << ',' << (static_cast<std::size_t>(i) < column_names.size() ? column_names[i] : "r" + std::to_string(i + 1));
    }
    os << '\n';
    for (std::size_t t = 0; t < data.size(); ++t) {
        os << (t < data.timestamps.size() ? data.timestamps[t] : synthetic_date(t));
        for (int i = 0; i < data.q; ++i) os << ',' << format_double(data.returns[t](i));
        os << '\n';
    }
}

PresampleScale d0_from_presample(const ReturnsSeries& presample, std::optional<double> ridge) {
    presample.validate();
    if (presample.size() == 0) throw InvalidParameter("d0_from_presample: empty presample");
    const int q = presample.q;
    Matrix avg = Matrix::Zero(q, q);
    for (const Vector& r : presample.returns) avg.noalias() += r * r.transpose();
    avg /= static_cast<double>(presample.size());
    avg = symmetrize(avg);

    if (ridge) {
        if (!(*ridge >= 0.0)) throw InvalidParameter("d0_from_presample: ridge must be nonnegative");
        const Matrix m = avg + (*ridge) * (avg.trace() / q) * Matrix::Identity(q, q);
        return {SymPD(m), *ridge, std::nullopt};
    }
    try {
        return {SymPD(avg), 0.0, std::nullopt};
    } catch (const NotPositiveDefinite&) {
        const double mean_diag = avg.trace() / q;
        const double auto_ridge = 1e-8;
        const Matrix m = avg + auto_ridge * mean_diag * Matrix::Identity(q, q);
        return {SymPD(m), auto_ridge,
                "presample average is not positive definite; added ridge 1e-8 x mean diagonal"};
    }
}

std::pair<ReturnsSeries, ReturnsSeries> split_presample(const ReturnsSeries& data, std::size_t count) {
    if (count > data.size()) throw InvalidParameter("split_presample: presample longer than data");
    ReturnsSeries head, tail;
    head.q = tail.q = data.q;
    head.returns.assign(data.returns.begin(), data.returns.begin() + static_cast<std::ptrdiff_t>(count));
    tail.returns.assign(data.returns.begin() + static_cast<std::ptrdiff_t>(count), data.returns.end());
    if (!data.timestamps.empty()) {
        head.timestamps.assign(data.timestamps.begin(), data.timestamps.begin() + static_cast<std::ptrdiff_t>(count));
        tail.timestamps.assign(data.timestamps.begin() + static_cast<std::ptrdiff_t>(count), data.timestamps.end());
    }
    return {head, tail};
}

std::string synthetic_date(std::size_t offset) {
    // 2000-01-03 is day 10959 of the Unix epoch.
    return civil_from_days(10959 + static_cast<long long>(offset));
}

Simulation simulate(const Hyper& hyper, std::size_t steps, std::uint64_t seed) {
    Rng rng(seed);
    Simulation sim;
    const int q = std::visit([](const auto& h) { return h.q; }, hyper);
    sim.data.q = q;
    sim.truth.q = q;
    sim.truth.seed = seed;

    auto emit = [&](const SymPD& phi, std::size_t t) {
        sim.data.returns.push_back(sample_mvnormal_prec(phi, rng));
        sim.data.timestamps.push_back(synthetic_date(t));
    };

    if (const auto* ue = std::get_if<UEHyper>(&hyper)) {
        if (ue->k != 1.0) throw InvalidParameter("simulate: returns are generated with k = 1");
        const UpperTri p0 = uchol(inverse_spd(ue->d0) / ue->k);
        sim.truth.phi.emplace_back(crossprod(sample_bartlett_factor(q, ue->n + ue->k, rng) * p0));
        for (std::size_t t = 1; t <= steps; ++t) {
            sim.truth.phi.push_back(ue_evolve(sim.truth.phi.back(), *ue, rng));
            emit(sim.truth.phi.back(), t - 1);
        }
        return sim;
    }

    const BBHyper& bb = std::get<BBHyper>(hyper);
    if (bb.k != 1.0) throw InvalidParameter("simulate: returns are generated with k = 1");
    SymPD d = bb.d0;
    double k_t = bb.k0;
    UpperTri p = uchol(inverse_spd(d) / bb.k);
    UpperTri u = sample_bartlett_factor(q, k_t, rng);
    sim.truth.phi.emplace_back(crossprod(u * p));
    for (std::size_t t = 1; t <= steps; ++t) {
        SymPD phi = bb_evolve_factors(u, p, k_t, bb, rng);
        emit(phi, t - 1);
        const Vector& r = sim.data.returns.back();
        d = SymPD(symmetrize(bb.b * d.matrix() + r * r.transpose()));
        k_t = bb_next_df(k_t, bb.beta, bb.k);
        p = uchol(inverse_spd(d) / bb.k);
        u = uchol(phi) * inv_upper(p);
        sim.truth.phi.push_back(std::move(phi));
    }
    return sim;
}

nlohmann::json to_json(const ResultsBundle& bundle) {
    nlohmann::json j;
    j["scalars"] = bundle.scalars;
    j["metadata"] = bundle.metadata;
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& [name, t] : bundle.tables) tables[name] = {{"columns", t.columns}, {"rows", t.rows}};
    j["tables"] = tables;
    return j;
}

ResultsBundle bundle_from_json(const nlohmann::json& j) {
    ResultsBundle b;
    b.scalars = j.at("scalars").get<std::map<std::string, double>>();
    b.metadata = j.at("metadata");
    for (const auto& [name, t] : j.at("tables").items()) {
        b.tables[name] = Table{t.at("columns").get<std::vector<std::string>>(),
                               t.at("rows").get<std::vector<std::vector<double>>>()};
    }
    return b;
}

void write_table_csv(std::ostream& os, const Table& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << '\n';
    }
}

Table read_table_csv(std::istream& is) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw ParseError(1, 1, "missing header row");
    ++lineno;
    t.columns = split_fields(line);
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != t.columns.size()) throw ParseError(lineno, fields.size(), "ragged row");
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(fields[c].data(), fields[c].data() + fields[c].size(), v);
            if (ec != std::errc() || ptr != fields[c].data() + fields[c].size()) {
                throw ParseError(lineno, c + 1, "not a number: '" + fields[c] + "'");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_bundle(const std::filesystem::path& dir, const ResultsBundle& bundle) {
    std::filesystem::create_directories(dir);
    nlohmann::json summary;
    summary["scalars"] = bundle.scalars;
    summary["metadata"] = bundle.metadata;
    summary["tables"] = nlohmann::json::array();
    for (const auto& [name, t] : bundle.tables) {
        summary["tables"].push_back(name);
        std::ofstream os(dir / (name + ".csv"));
        if (!os) throw Error("cannot write table " + name);
        write_table_csv(os, t);
    }
    std::ofstream os(dir / "summary.json");
    if (!os) throw Error("cannot write summary.json");
    os << summary.dump(2) << '\n';
}

ResultsBundle read_bundle(const std::filesystem::path& dir) {
    std::ifstream in(dir / "summary.json");
    if (!in) throw Error("cannot read " + (dir / "summary.json").string());
    const nlohmann::json summary = nlohmann::json::parse(in);
    ResultsBundle b;
    b.scalars = summary.at("scalars").get<std::map<std::string, double>>();
    b.metadata = summary.at("metadata");
    for (const auto& name : summary.at("tables")) {
        std::ifstream ts(dir / (name.get<std::string>() + ".csv"));
        if (!ts) throw Error("missing table file for " + name.get<std::string>());
        b.tables[name.get<std::string>()] = read_table_csv(ts);
    }
    return b;
}

}  // namespace wishsv
