#pragma once

#include "mtdiff/experiment.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mtdiff {

/// Parse or schema error in a configuration file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Grid = std::vector<std::vector<double>>;
/// Named rule or explicit N x N entries.
using MatrixSetting = std::variant<std::string, Grid>;

struct RegionConfig {
    std::string shape = "rectangle";  // "rectangle" | "annulus"
    std::vector<double> origin{0.0, 0.0};
    double width = 1.0;
    double height = 1.0;
    double inner_radius = 0.0;
    double outer_radius = 1.0;
    bool operator==(const RegionConfig&) const = default;
};

struct GeneratorConfig {
    std::string kind = "random_geometric";
    int n_nodes = 1;
    RegionConfig region;
    double radius = 1.0;
    std::uint64_t seed = 1;
    int n_clusters = 1;
    std::string assignment = "random";  // "random" | "grow"
    int filter_length = 2;
    bool operator==(const GeneratorConfig&) const = default;
};

struct InlineNetworkConfig {
    int n_nodes = 1;
    int filter_length = 1;
    std::vector<std::vector<int>> edges;
    std::vector<int> clusters;
    std::optional<Grid> positions;
    bool operator==(const InlineNetworkConfig&) const = default;
};

struct NetworkConfig {
    std::variant<InlineNetworkConfig, GeneratorConfig> source;
    bool operator==(const NetworkConfig&) const = default;
};

struct LinearModelConfig {
    Grid optima;
    std::vector<double> sigma2_x;  // one value broadcasts to every node
    std::vector<double> sigma2_z;
    bool operator==(const LinearModelConfig&) const = default;
};

struct LocalizationModelConfig {
    Grid targets;
    std::vector<double> sigma_alpha;
    std::vector<double> sigma_beta;
    std::vector<double> sigma_v;
    bool operator==(const LocalizationModelConfig&) const = default;
};

struct ModelConfig {
    std::variant<LinearModelConfig, LocalizationModelConfig> kind;
    bool operator==(const ModelConfig&) const = default;
};

struct AlgorithmConfig {
    std::vector<std::string> variants{"clustered"};
    std::vector<Hyperparams> hyperparams;
    MatrixSetting A = std::string("uniform");
    MatrixSetting C = std::string("identity");
    MatrixSetting P = std::string("uniform");
    bool operator==(const AlgorithmConfig&) const = default;
};

struct RunConfig {
    int n_runs = 100;
    int n_iters = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    bool operator==(const RunConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "results";
    std::vector<std::string> formats{"csv"};
    bool operator==(const OutputConfig&) const = default;
};

/// Typed mirror of the configuration file.
struct ConfigFile {
    std::string name = "experiment";
    NetworkConfig network;
    ModelConfig model;
    AlgorithmConfig algorithm;
    RunConfig experiment;
    OutputConfig output;
    bool operator==(const ConfigFile&) const = default;
};

ConfigFile parse_config(const nlohmann::json& j);
ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);
nlohmann::json to_json(const ConfigFile& cfg);

NetworkSpec build_network(const NetworkConfig& cfg);
DataModel build_model(const ModelConfig& cfg, const NetworkSpec& network);
/// Builds network, model and rules. Throws ConfigError on malformed
/// sections; NetworkError and ModelError propagate unchanged.
ExperimentConfig to_experiment(const ConfigFile& cfg);

}  // namespace mtdiff
