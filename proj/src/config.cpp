#include "mtdiff/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace mtdiff {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    expect_object(j, where);
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json& required(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + ": missing key '" + key + "'");
    return *it;
}

template <class T>
T get_as(const json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    return get_as<T>(required(j, key, where), where + "." + key);
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
    auto it = j.find(key);
    return it == j.end() ? fallback : get_as<T>(*it, where + "." + key);
}

// Number or array of numbers.
std::vector<double> scalar_or_list(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>()};
    return get_as<std::vector<double>>(j, where);
}

json scalar_or_list_json(const std::vector<double>& v) {
    if (v.size() == 1) return v.front();
    return v;
}

MatrixSetting matrix_setting(const json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    return get_as<Grid>(j, where);
}

json matrix_setting_json(const MatrixSetting& m) {
    if (const auto* s = std::get_if<std::string>(&m)) return *s;
    return std::get<Grid>(m);
}

NetworkConfig parse_network(const json& j) {
    const std::string where = "network";
    if (j.contains("generator")) {
        allow_keys(j, {"generator"}, where);
        const json& g = j["generator"];
        const std::string gw = where + ".generator";
        allow_keys(g, {"kind", "n_nodes", "region", "radius", "seed", "n_clusters", "assignment", "filter_length"}, gw);
        GeneratorConfig gen;
        gen.kind = field_or<std::string>(g, "kind", "random_geometric", gw);
        if (gen.kind != "random_geometric") throw ConfigError(gw + ".kind: unsupported generator '" + gen.kind + "'");
        gen.n_nodes = field<int>(g, "n_nodes", gw);
        gen.radius = field<double>(g, "radius", gw);
        gen.seed = field<std::uint64_t>(g, "seed", gw);
        gen.n_clusters = field_or<int>(g, "n_clusters", 1, gw);
        gen.filter_length = field_or<int>(g, "filter_length", 2, gw);
        gen.assignment = field_or<std::string>(g, "assignment", "random", gw);
        if (gen.assignment != "random" && gen.assignment != "grow")
            throw ConfigError(gw + ".assignment: expected 'random' or 'grow'");
        const json& r = required(g, "region", gw);
        const std::string rw = gw + ".region";
        allow_keys(r, {"shape", "origin", "width", "height", "inner_radius", "outer_radius"}, rw);
        gen.region.shape = field_or<std::string>(r, "shape", "rectangle", rw);
        if (gen.region.shape != "rectangle" && gen.region.shape != "annulus")
            throw ConfigError(rw + ".shape: expected 'rectangle' or 'annulus'");
        gen.region.origin = field_or<std::vector<double>>(r, "origin", {0.0, 0.0}, rw);
        if (gen.region.origin.size() != 2) throw ConfigError(rw + ".origin: expected two coordinates");
        gen.region.width = field_or<double>(r, "width", 1.0, rw);
        gen.region.height = field_or<double>(r, "height", 1.0, rw);
        gen.region.inner_radius = field_or<double>(r, "inner_radius", 0.0, rw);
        gen.region.outer_radius = field_or<double>(r, "outer_radius", 1.0, rw);
        return NetworkConfig{gen};
    }
    allow_keys(j, {"n_nodes", "filter_length", "edges", "clusters", "positions"}, where);
    InlineNetworkConfig net;
    net.n_nodes = field<int>(j, "n_nodes", where);
    net.filter_length = field<int>(j, "filter_length", where);
    net.edges = field<std::vector<std::vector<int>>>(j, "edges", where);
    for (const auto& e : net.edges)
        if (e.size() != 2) throw ConfigError(where + ".edges: every edge needs two endpoints");
    net.clusters = field<std::vector<int>>(j, "clusters", where);
    if (j.contains("positions")) net.positions = field<Grid>(j, "positions", where);
    return NetworkConfig{net};
}

ModelConfig parse_model(const json& j) {
    const std::string where = "model";
    expect_object(j, where);
    const auto kind = field<std::string>(j, "kind", where);
    if (kind == "linear") {
        allow_keys(j, {"kind", "optima", "sigma2_x", "sigma2_z"}, where);
        LinearModelConfig m;
        m.optima = field<Grid>(j, "optima", where);
        m.sigma2_x = scalar_or_list(required(j, "sigma2_x", where), where + ".sigma2_x");
        m.sigma2_z = scalar_or_list(required(j, "sigma2_z", where), where + ".sigma2_z");
        return ModelConfig{m};
    }
    if (kind == "localization") {
        allow_keys(j, {"kind", "targets", "sigma_alpha", "sigma_beta", "sigma_v"}, where);
        LocalizationModelConfig m;
        m.targets = field<Grid>(j, "targets", where);
        m.sigma_alpha = scalar_or_list(required(j, "sigma_alpha", where), where + ".sigma_alpha");
        m.sigma_beta = scalar_or_list(required(j, "sigma_beta", where), where + ".sigma_beta");
        m.sigma_v = scalar_or_list(required(j, "sigma_v", where), where + ".sigma_v");
        return ModelConfig{m};
    }
    throw ConfigError(where + ".kind: expected 'linear' or 'localization'");
}

AlgorithmConfig parse_algorithm(const json& j) {
    const std::string where = "algorithm";
    allow_keys(j, {"variants", "hyperparams", "A", "C", "P"}, where);
    AlgorithmConfig a;
    a.variants = field_or<std::vector<std::string>>(j, "variants", {"clustered"}, where);
    for (const auto& v : a.variants) {
        try {
            (void)variant_from_string(v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ".variants: " + e.what());
        }
    }
    const json& hps = required(j, "hyperparams", where);
    if (!hps.is_array() || hps.empty()) throw ConfigError(where + ".hyperparams: expected a non-empty array");
    for (const auto& h : hps) {
        const std::string hw = where + ".hyperparams[]";
        allow_keys(h, {"mu", "tau"}, hw);
        Hyperparams hp{field<double>(h, "mu", hw), field_or<double>(h, "tau", 0.0, hw)};
        if (!(hp.mu >= 0.0) || !(hp.tau >= 0.0)) throw ConfigError(hw + ": mu and tau must be nonnegative");
        a.hyperparams.push_back(hp);
    }
    if (j.contains("A")) a.A = matrix_setting(j["A"], where + ".A");
    if (j.contains("C")) a.C = matrix_setting(j["C"], where + ".C");
    if (j.contains("P")) a.P = matrix_setting(j["P"], where + ".P");
    return a;
}

RunConfig parse_run(const json& j) {
    const std::string where = "experiment";
    allow_keys(j, {"n_runs", "n_iters", "seed", "workers"}, where);
    RunConfig r;
    r.n_runs = field_or<int>(j, "n_runs", 100, where);
    r.n_iters = field_or<int>(j, "n_iters", 1000, where);
    r.seed = field_or<std::uint64_t>(j, "seed", 1, where);
    r.workers = field_or<int>(j, "workers", 1, where);
    if (r.n_runs < 1) throw ConfigError(where + ".n_runs: must be at least 1");
    if (r.n_iters < 0) throw ConfigError(where + ".n_iters: must be nonnegative");
    if (r.workers < 1) throw ConfigError(where + ".workers: must be at least 1");
    return r;
}

OutputConfig parse_output(const json& j) {
    const std::string where = "output";
    allow_keys(j, {"directory", "formats"}, where);
    OutputConfig o;
    o.directory = field_or<std::string>(j, "directory", "results", where);
    o.formats = field_or<std::vector<std::string>>(j, "formats", {"csv"}, where);
    for (const auto& f : o.formats)
        if (f != "csv" && f != "gnuplot") throw ConfigError(where + ".formats: unknown format '" + f + "'");
    return o;
}

MatrixXd to_matrix(const Grid& g, int n, const std::string& where) {
    if (g.size() != static_cast<std::size_t>(n)) throw ConfigError(where + ": expected " + std::to_string(n) + " rows");
    MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        if (g[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(n))
            throw ConfigError(where + ": expected " + std::to_string(n) + " columns");
        for (int j = 0; j < n; ++j) m(i, j) = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

MatrixRule to_rule(const MatrixSetting& s, int n, const std::string& where) {
    if (const auto* name = std::get_if<std::string>(&s)) return *name;
    return to_matrix(std::get<Grid>(s), n, where);
}

std::vector<double> broadcast(const std::vector<double>& v, int n, const std::string& where) {
    if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(n), v.front());
    if (v.size() != static_cast<std::size_t>(n))
        throw ConfigError(where + ": expected one value or one per node (" + std::to_string(n) + ")");
    return v;
}

}  // namespace

ConfigFile parse_config(const json& j) {
    allow_keys(j, {"name", "network", "model", "algorithm", "experiment", "output"}, "config");
    ConfigFile cfg;
    cfg.name = field_or<std::string>(j, "name", "experiment", "config");
    cfg.network = parse_network(required(j, "network", "config"));
    cfg.model = parse_model(required(j, "model", "config"));
    cfg.algorithm = parse_algorithm(required(j, "algorithm", "config"));
    cfg.experiment = parse_run(j.value("experiment", json::object()));
    cfg.output = parse_output(j.value("output", json::object()));
    return cfg;
}

ConfigFile parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

json to_json(const ConfigFile& cfg) {
    json j;
    j["name"] = cfg.name;

    json net;
    if (const auto* in = std::get_if<InlineNetworkConfig>(&cfg.network.source)) {
        net["n_nodes"] = in->n_nodes;
        net["filter_length"] = in->filter_length;
        net["edges"] = in->edges;
        net["clusters"] = in->clusters;
        if (in->positions) net["positions"] = *in->positions;
    } else {
        const auto& g = std::get<GeneratorConfig>(cfg.network.source);
        json region{{"shape", g.region.shape}, {"origin", g.region.origin}};
        if (g.region.shape == "rectangle") {
            region["width"] = g.region.width;
            region["height"] = g.region.height;
        } else {
            region["inner_radius"] = g.region.inner_radius;
            region["outer_radius"] = g.region.outer_radius;
        }
        net["generator"] = json{{"kind", g.kind},         {"n_nodes", g.n_nodes},       {"region", region},
                                {"radius", g.radius},     {"seed", g.seed},             {"n_clusters", g.n_clusters},
                                {"assignment", g.assignment}, {"filter_length", g.filter_length}};
    }
    j["network"] = net;

    if (const auto* lin = std::get_if<LinearModelConfig>(&cfg.model.kind)) {
        j["model"] = json{{"kind", "linear"},
                          {"optima", lin->optima},
                          {"sigma2_x", scalar_or_list_json(lin->sigma2_x)},
                          {"sigma2_z", scalar_or_list_json(lin->sigma2_z)}};
    } else {
        const auto& loc = std::get<LocalizationModelConfig>(cfg.model.kind);
        j["model"] = json{{"kind", "localization"},
                          {"targets", loc.targets},
                          {"sigma_alpha", scalar_or_list_json(loc.sigma_alpha)},
                          {"sigma_beta", scalar_or_list_json(loc.sigma_beta)},
                          {"sigma_v", scalar_or_list_json(loc.sigma_v)}};
    }

    json hps = json::array();
    for (const auto& hp : cfg.algorithm.hyperparams) hps.push_back(json{{"mu", hp.mu}, {"tau", hp.tau}});
    j["algorithm"] = json{{"variants", cfg.algorithm.variants},
                          {"hyperparams", hps},
                          {"A", matrix_setting_json(cfg.algorithm.A)},
                          {"C", matrix_setting_json(cfg.algorithm.C)},
                          {"P", matrix_setting_json(cfg.algorithm.P)}};
    j["experiment"] = json{{"n_runs", cfg.experiment.n_runs},
                           {"n_iters", cfg.experiment.n_iters},
                           {"seed", cfg.experiment.seed},
                           {"workers", cfg.experiment.workers}};
    j["output"] = json{{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
    return j;
}

NetworkSpec build_network(const NetworkConfig& cfg) {
    if (const auto* in = std::get_if<InlineNetworkConfig>(&cfg.source)) {
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : in->edges) edges.emplace_back(e[0], e[1]);
        std::optional<std::vector<Point2>> pos;
        if (in->positions) {
            pos.emplace();
            for (const auto& p : *in->positions) {
                if (p.size() != 2) throw ConfigError("network.positions: expected 2-vectors");
                pos->push_back({p[0], p[1]});
            }
        }
        return NetworkSpec(in->n_nodes, in->filter_length, edges, in->clusters, std::move(pos));
    }
    const auto& g = std::get<GeneratorConfig>(cfg.source);
    Region region;
    region.shape = g.region.shape == "annulus" ? Region::Shape::Annulus : Region::Shape::Rectangle;
    region.x0 = g.region.origin[0];
    region.y0 = g.region.origin[1];
    region.width = g.region.width;
    region.height = g.region.height;
    region.inner_radius = g.region.inner_radius;
    region.outer_radius = g.region.outer_radius;
    const auto assignment = g.assignment == "grow" ? ClusterAssignment::Grow : ClusterAssignment::Random;
    return random_geometric_network(g.n_nodes, region, g.radius, g.seed, g.n_clusters, g.filter_length, 1000,
                                    assignment);
}

DataModel build_model(const ModelConfig& cfg, const NetworkSpec& network) {
    const int n = network.n_nodes();
    if (const auto* lin = std::get_if<LinearModelConfig>(&cfg.kind)) {
        LinearModelSpec m;
        for (const auto& w : lin->optima) m.optima.push_back(Eigen::Map<const VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
        m.sigma2_x = broadcast(lin->sigma2_x, n, "model.sigma2_x");
        m.sigma2_z = broadcast(lin->sigma2_z, n, "model.sigma2_z");
        return m;
    }
    const auto& loc = std::get<LocalizationModelConfig>(cfg.kind);
    if (!network.positions()) throw ConfigError("model: localization requires node positions in the network");
    LocalizationSpec m;
    m.node_positions = *network.positions();
    for (const auto& t : loc.targets) {
        if (t.size() != 2) throw ConfigError("model.targets: expected 2-vectors");
        m.targets.push_back({t[0], t[1]});
    }
    m.sigma_alpha = broadcast(loc.sigma_alpha, n, "model.sigma_alpha");
    m.sigma_beta = broadcast(loc.sigma_beta, n, "model.sigma_beta");
    m.sigma_v = broadcast(loc.sigma_v, n, "model.sigma_v");
    return m;
}

ExperimentConfig to_experiment(const ConfigFile& cfg) {
    ExperimentConfig ex;
    ex.name = cfg.name;
    NetworkSpec net = build_network(cfg.network);
    DataModel model = build_model(cfg.model, net);
    check_model(model, net);
    ex.scenario = Scenario{std::move(net), std::move(model)};
    const int n = ex.scenario.truth.n_nodes();
    ex.rules.A = to_rule(cfg.algorithm.A, n, "algorithm.A");
    ex.rules.C = to_rule(cfg.algorithm.C, n, "algorithm.C");
    ex.rules.P = to_rule(cfg.algorithm.P, n, "algorithm.P");
    ex.variants.clear();
    for (const auto& v : cfg.algorithm.variants) ex.variants.push_back(variant_from_string(v));
    ex.hyperparams = cfg.algorithm.hyperparams;
    ex.n_runs = cfg.experiment.n_runs;
    ex.n_iters = cfg.experiment.n_iters;
    ex.seed = cfg.experiment.seed;
    ex.workers = cfg.experiment.workers;
    return ex;
}

}  // namespace mtdiff
