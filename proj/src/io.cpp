#include "mtdiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace mtdiff {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

void write_curve_csv(std::ostream& out, const std::vector<double>& msd, const std::string& flag) {
    out << "iteration,msd_linear,msd_db,flag\n";
    for (std::size_t n = 0; n < msd.size(); ++n)
        out << n << ',' << format_double(msd[n]) << ',' << format_double(to_db(msd[n])) << ',' << flag << '\n';
}

namespace {

std::string tag(const Hyperparams& hp) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "mu%g_tau%g", hp.mu, hp.tau);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

template <class F>
void write_with(const fs::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    body(out);
}

void write_manifest(const fs::path& dir, const std::vector<ManifestEntry>& entries) {
    write_with(dir / "manifest.csv", [&](std::ostream& out) {
        out << "file,variant,mu,tau,kind\n";
        for (const auto& e : entries)
            out << e.file << ',' << e.variant << ',' << format_double(e.hp.mu) << ',' << format_double(e.hp.tau)
                << ',' << e.kind << '\n';
    });
}

void write_gnuplot(const fs::path& dir, const std::vector<ManifestEntry>& entries) {
    write_with(dir / "plot.gp", [&](std::ostream& out) {
        out << "set datafile separator ','\nset key autotitle columnhead\n"
               "set xlabel 'iteration'\nset ylabel 'MSD (dB)'\nplot \\\n";
        bool first = true;
        for (const auto& e : entries) {
            if (e.kind == "theory-steady") continue;
            if (!first) out << ", \\\n";
            first = false;
            out << "  '" << e.file << "' using 1:3 with lines title '" << e.variant << " " << tag(e.hp) << " "
                << e.kind << "'";
        }
        out << '\n';
    });
}

bool wants(const ConfigFile& cfg, const char* format) {
    for (const auto& f : cfg.output.formats)
        if (f == format) return true;
    return false;
}

}  // namespace

std::vector<ManifestEntry> write_results(const fs::path& dir, const ExperimentResult& result, const ConfigFile& config) {
    fs::create_directories(dir);
    write_file(dir / "config.json", to_json(config).dump(2) + "\n");

    std::vector<ManifestEntry> manifest;
    bool any_steady = false;
    for (const auto& c : result.curves) {
        const std::string base = to_string(c.variant) + "_" + tag(c.hp);
        const std::string sim = base + "_sim.csv";
        write_with(dir / sim, [&](std::ostream& out) { write_curve_csv(out, c.sim_msd, "sim"); });
        manifest.push_back({sim, to_string(c.variant), c.hp, "sim"});
        if (c.theory_msd) {
            const std::string th = base + "_theory.csv";
            write_with(dir / th, [&](std::ostream& out) { write_curve_csv(out, *c.theory_msd, "theory"); });
            manifest.push_back({th, to_string(c.variant), c.hp, "theory-transient"});
        }
        if (c.theory_steady) {
            any_steady = true;
            manifest.push_back({"steady_state.csv", to_string(c.variant), c.hp, "theory-steady"});
        }
    }
    if (any_steady) {
        write_with(dir / "steady_state.csv", [&](std::ostream& out) {
            out << "variant,mu,tau,msd_linear,msd_db,sim_final_db\n";
            for (const auto& c : result.curves) {
                if (!c.theory_steady) continue;
                const double sim_final = c.sim_msd.empty() ? std::nan("") : c.sim_msd.back();
                out << to_string(c.variant) << ',' << format_double(c.hp.mu) << ',' << format_double(c.hp.tau) << ','
                    << format_double(*c.theory_steady) << ',' << format_double(to_db(*c.theory_steady)) << ','
                    << format_double(to_db(sim_final)) << '\n';
            }
        });
    }
    write_manifest(dir, manifest);
    if (wants(config, "gnuplot")) write_gnuplot(dir, manifest);
    return manifest;
}

std::vector<TheoryReportEntry> evaluate_theory(const ExperimentConfig& config) {
    if (!std::holds_alternative<LinearModelSpec>(config.scenario.model))
        throw TheoryError("theory requires the linear data model; localization regressors are not white Gaussian");
    const auto strategy = build_strategy(Variant::Clustered, config.scenario.truth, config.rules);
    std::vector<TheoryReportEntry> out;
    for (const auto& hp : config.hyperparams) {
        const auto m = build_moments(strategy, config.scenario, hp);
        TheoryReportEntry e;
        e.hp = hp;
        e.step_bound = step_size_bound(m);
        e.rho_B = spectral_radius_B(m);
        const auto k = k_spectral_radius(m.B, 1e-10, 200000);
        e.rho_K = k.radius;
        e.rho_K_converged = k.converged;
        if (e.rho_B < 1.0) {
            if (hp.mu * hp.tau != 0.0) e.bias_norm = bias_limit(m).norm();
            e.steady = steady_state_msd(m);
        }
        auto curve = transient_msd(m, config.n_iters);
        e.transient = std::move(curve.zeta);
        out.push_back(std::move(e));
    }
    return out;
}

void write_theory(const fs::path& dir, const std::vector<TheoryReportEntry>& entries, const ConfigFile& config) {
    fs::create_directories(dir);
    write_file(dir / "config.json", to_json(config).dump(2) + "\n");
    nlohmann::json report = nlohmann::json::array();
    std::vector<ManifestEntry> manifest;
    for (const auto& e : entries) {
        const std::string file = "clustered_" + tag(e.hp) + "_theory.csv";
        write_with(dir / file, [&](std::ostream& out) { write_curve_csv(out, e.transient, "theory"); });
        manifest.push_back({file, "clustered", e.hp, "theory-transient"});
        nlohmann::json j{{"mu", e.hp.mu},
                         {"tau", e.hp.tau},
                         {"step_size_bound", e.step_bound},
                         {"rho_B", e.rho_B},
                         {"rho_K", e.rho_K},
                         {"rho_K_converged", e.rho_K_converged},
                         {"bias_norm", e.bias_norm}};
        if (e.steady) {
            j["steady_state_msd"] = *e.steady;
            j["steady_state_msd_db"] = to_db(*e.steady);
            manifest.push_back({"steady_state.csv", "clustered", e.hp, "theory-steady"});
        } else {
            j["steady_state_msd"] = nullptr;
            j["note"] = "no steady state (rho(K) >= 1)";
        }
        report.push_back(j);
    }
    write_file(dir / "report.json", report.dump(2) + "\n");
    write_with(dir / "steady_state.csv", [&](std::ostream& out) {
        out << "variant,mu,tau,msd_linear,msd_db\n";
        for (const auto& e : entries) {
            if (!e.steady) continue;
            out << "clustered," << format_double(e.hp.mu) << ',' << format_double(e.hp.tau) << ','
                << format_double(*e.steady) << ',' << format_double(to_db(*e.steady)) << '\n';
        }
    });
    write_manifest(dir, manifest);
    if (wants(config, "gnuplot")) write_gnuplot(dir, manifest);
}

}  // namespace mtdiff
