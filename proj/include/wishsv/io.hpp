#ifndef WISHSV_IO_HPP
#define WISHSV_IO_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wishsv/filter.hpp"
#include "wishsv/smoother.hpp"

namespace wishsv {

struct ParseError : Error {
    ParseError(std::size_t row, std::size_t column, const std::string& what);
    std::size_t row;     // 1-based line number in the file
    std::size_t column;  // 1-based field index
};

// Header row, then one ISO-8601 timestamp column followed by q numeric columns.
ReturnsSeries load_returns_csv(const std::filesystem::path& path, int q);
ReturnsSeries parse_returns_csv(std::istream& in, int q);
void write_returns_csv(const std::filesystem::path& path, const ReturnsSeries& data,
                       const std::vector<std::string>& column_names = {});

struct PresampleScale {
    SymPD d0;
    double ridge = 0.0;            // multiple of (trace / q) I that was added
    std::optional<std::string> warning;
};

// (1/T0) sum r_t r_t' + ridge (trace/q) I. With `ridge` unset the raw average
// is tried first and, if it is not positive definite, a ridge of 1e-8 times the
// mean diagonal is added and a warning is recorded.
PresampleScale d0_from_presample(const ReturnsSeries& presample, std::optional<double> ridge);

// Splits the first `count` rows off as a presample.
std::pair<ReturnsSeries, ReturnsSeries> split_presample(const ReturnsSeries& data, std::size_t count);

struct Simulation {
    ReturnsSeries data;
    PrecisionPath truth;  // Phi_0..Phi_T
};

// Phi_0 from the model prior, states evolved by the model, r_t ~ N(0, Phi_t^{-1}).
// The BB evolution uses the filter-context P_{t-1} = uchol((k D_{t-1})^{-1}).
Simulation simulate(const Hyper& hyper, std::size_t steps, std::uint64_t seed);

// ISO-8601 date `offset` days after 2000-01-03.
std::string synthetic_date(std::size_t offset);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    bool operator==(const Table&) const = default;
};

struct ResultsBundle {
    std::map<std::string, Table> tables;
    std::map<std::string, double> scalars;
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const ResultsBundle& bundle);
ResultsBundle bundle_from_json(const nlohmann::json& j);

// <dir>/summary.json (scalars + metadata) and <dir>/<table>.csv per table.
void write_bundle(const std::filesystem::path& dir, const ResultsBundle& bundle);
ResultsBundle read_bundle(const std::filesystem::path& dir);

void write_table_csv(std::ostream& os, const Table& table);
Table read_table_csv(std::istream& is);

}  // namespace wishsv

#endif  // WISHSV_IO_HPP
