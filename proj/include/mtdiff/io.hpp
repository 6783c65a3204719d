#pragma once

#include "mtdiff/config.hpp"
#include "mtdiff/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mtdiff {

/// Curve CSV: header "iteration,msd_linear,msd_db,flag", one row per
/// iteration, "." decimal separator, '\n' line ends.
void write_curve_csv(std::ostream& out, const std::vector<double>& msd, const std::string& flag);

std::string format_double(double v);

struct ManifestEntry {
    std::string file;
    std::string variant;
    Hyperparams hp;
    std::string kind;  // "sim" | "theory-transient" | "theory-steady"
};

/// Writes config.json, one CSV per curve, steady_state.csv (when theory is
/// present), manifest.csv and, if requested, plot.gp. Returns the manifest.
std::vector<ManifestEntry> write_results(const std::filesystem::path& dir, const ExperimentResult& result,
                                         const ConfigFile& config);

/// Theory-only report: report.json plus one transient CSV per hyperparameter
/// pair and steady_state.csv.
struct TheoryReportEntry {
    Hyperparams hp;
    double step_bound = 0.0;
    double rho_B = 0.0;
    double rho_K = 0.0;
    bool rho_K_converged = false;
    double bias_norm = 0.0;
    std::optional<double> steady;
    std::vector<double> transient;
};

std::vector<TheoryReportEntry> evaluate_theory(const ExperimentConfig& config);
void write_theory(const std::filesystem::path& dir, const std::vector<TheoryReportEntry>& entries,
                  const ConfigFile& config);

}  // namespace mtdiff
