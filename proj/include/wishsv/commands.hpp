#ifndef WISHSV_COMMANDS_HPP
#define WISHSV_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wishsv/io.hpp"

namespace wishsv {

inline constexpr const char* kVersion = "0.1.0";

enum class ModelSelector { UE, BB, Matched };

ModelSelector parse_model_selector(const std::string& s);
const char* selector_name(ModelSelector m);

struct RunConfig {
    std::string command;
    ModelSelector model = ModelSelector::Matched;

    // Hyperparameters (UE parametrization; BB via the matching map unless
    // beta/b/k0 are given explicitly for model = bb).
    double n = 5.0;
    double lambda = 0.8;
    double k = 1.0;
    std::optional<double> beta, b, k0;

    // Data and D0.
    std::optional<std::filesystem::path> input;
    int q = 0;
    std::optional<std::vector<std::vector<double>>> d0;
    std::size_t presample = 0;
    std::optional<double> ridge;
    bool demean = false;

    // simulate
    std::size_t steps = 500;

    // grid-search
    std::vector<double> n_grid;
    double lambda_start = 0.600, lambda_stop = 0.990, lambda_step = 0.001;

    // smooth / compare
    std::uint64_t seed = 1;
    std::size_t draws = 1000;
    std::vector<double> quantiles{0.025, 0.5, 0.975};

    // compare-mixture
    double a0 = 1.0, b0 = 1.0;
    std::size_t iterations = 10000;
    std::optional<std::size_t> burn_in;
    std::size_t batches = 50;

    // ppc
    double level = 0.95;

    std::filesystem::path out = "out";
    unsigned workers = 1;

    nlohmann::json to_json() const;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Dispatches cfg.command, writes the bundle to cfg.out and returns it.
ResultsBundle run_command(const RunConfig& cfg);

// Machine-readable error record written to <out>/error.json on failure.
nlohmann::json error_record(const std::exception& e);

}  // namespace wishsv

#endif  // WISHSV_COMMANDS_HPP
