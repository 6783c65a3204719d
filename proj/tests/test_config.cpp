#include "mtdiff/config.hpp"
#include "mtdiff/experiment.hpp"

#include <doctest.h>

using namespace mtdiff;

namespace {

const char* kSmall = R"({
  "name": "small",
  "network": {"n_nodes": 4, "filter_length": 2,
              "edges": [[0, 1], [1, 2], [2, 3]], "clusters": [0, 0, 1, 1]},
  "model": {"kind": "linear", "optima": [[0.5, -0.4], [0.3, 0.2]],
            "sigma2_x": 1.0, "sigma2_z": [0.01, 0.02, 0.01, 0.02]},
  "algorithm": {"variants": ["clustered", "noncooperative"],
                "hyperparams": [{"mu": 0.05, "tau": 0.1}]},
  "experiment": {"n_runs": 4, "n_iters": 50, "seed": 3},
  "output": {"directory": "out/small", "formats": ["csv"]}
})";

}  // namespace

TEST_CASE("parse and round trip") {
    const auto cfg = parse_config_text(kSmall);
    CHECK(cfg.name == "small");
    CHECK(cfg.experiment.n_runs == 4);
    const auto again = parse_config(to_json(cfg));
    CHECK(again == cfg);
    CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("bundled configs round trip") {
    for (const char* f : {"/model_validation.json", "/localization.json", "/localization_desk.json"}) {
        const auto cfg = load_config(data_dir() + f);
        CHECK(parse_config(to_json(cfg)) == cfg);
    }
}

TEST_CASE("scalar variances broadcast") {
    const auto ex = to_experiment(parse_config_text(kSmall));
    const auto& lin = std::get<LinearModelSpec>(ex.scenario.model);
    CHECK(lin.sigma2_x == std::vector<double>(4, 1.0));
    CHECK(ex.variants.size() == 2);
    CHECK(ex.scenario.truth.n_clusters() == 2);
}

TEST_CASE("unknown keys are rejected") {
    auto j = nlohmann::json::parse(kSmall);
    j["experiment"]["n_run"] = 3;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = nlohmann::json::parse(kSmall);
    j["extra"] = true;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("malformed values are rejected") {
    auto j = nlohmann::json::parse(kSmall);
    j["experiment"]["n_runs"] = "many";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("inconsistent network surfaces as a network error") {
    auto j = nlohmann::json::parse(kSmall);
    j["network"]["edges"] = {{0, 1}, {2, 3}};
    CHECK_THROWS_AS(to_experiment(parse_config(j)), NetworkError);
}

TEST_CASE("explicit matrix that is not left stochastic fails validation") {
    auto j = nlohmann::json::parse(kSmall);
    j["algorithm"]["A"] = {{0.5, 0.5, 0, 0}, {0.4, 0.5, 0, 0}, {0, 0, 0.5, 0.5}, {0, 0, 0.5, 0.5}};
    const auto ex = to_experiment(parse_config(j));
    const auto s = build_strategy(Variant::Clustered, ex.scenario.truth, ex.rules);
    const auto v = validate(s.network, s.A, s.C, s.P, 0.1);
    REQUIRE(v);
    CHECK(v->kind == ViolationKind::NotLeftStochastic);
    CHECK_THROWS_AS(monte_carlo(ex), NetworkError);
}
