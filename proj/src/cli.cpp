// fe: spectral densities of products of operator-valued free elements,
// plus a random-matrix cross-check. Subcommands: density | simulate | compare.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fe/config.hpp"
#include "fe/density.hpp"
#include "fe/rmt.hpp"
#include "fe/subordination.hpp"
#include "fe/svg.hpp"
#include "fe/version.hpp"

namespace {

using fe::ConfigError;

struct Flags {
    std::optional<double> epsilon, tol, damping, threshold;
    std::optional<std::string> grid, output_dir;
    std::optional<int> grid_points, max_iter, trials, size, bins, unwrap_k;
    std::optional<std::uint64_t> seed;
    bool skip_bad_points = false;
    bool svg = false;
    bool dump_eigenvalues = false;
    std::string config_path;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("config", f.config_path, "config file (JSON)")->required();
    cmd->add_option("--epsilon", f.epsilon, "Stieltjes offset Im z");
    cmd->add_option("--grid", f.grid, "density grid as <min>:<max>:<points>");
    cmd->add_option("--grid-points", f.grid_points, "override the grid point count only");
    cmd->add_option("--tol", f.tol, "fixed-point tolerance");
    cmd->add_option("--max-iter", f.max_iter, "fixed-point iteration cap");
    cmd->add_option("--damping", f.damping, "fixed-point damping in (0,1]");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials");
    cmd->add_option("--size", f.size, "Monte Carlo block size N");
    cmd->add_option("--seed", f.seed, "Monte Carlo base seed");
    cmd->add_option("--bins", f.bins, "histogram bins");
    cmd->add_option("--unwrap-k", f.unwrap_k, "embedding factor k");
    cmd->add_flag("--skip-bad-points", f.skip_bad_points,
                  "record failed grid points as 0 instead of aborting");
    cmd->add_option("--threshold", f.threshold, "compare pass threshold on L1 (default 0.1)");
    cmd->add_flag("--svg", f.svg, "write an SVG plot next to the CSVs");
    cmd->add_flag("--dump-eigenvalues", f.dump_eigenvalues,
                  "write the raw eigenvalue list (compare)");
    cmd->add_option("--output-dir", f.output_dir, "override config output_dir");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// flags override config fields; bad flag values are config errors (exit 2)
void apply_flags(fe::RunConfig& cfg, const Flags& f) {
    if (f.epsilon) {
        if (*f.epsilon <= 0) throw ConfigError("--epsilon: must be positive");
        cfg.grid.epsilon = *f.epsilon;
    }
    if (f.grid) {
        double lo = 0, hi = 0;
        int pts = 0, used = 0;
        if (std::sscanf(f.grid->c_str(), "%lf:%lf:%d%n", &lo, &hi, &pts, &used) != 3 ||
            used != static_cast<int>(f.grid->size()))
            throw ConfigError("--grid: expected <min>:<max>:<points>, got '" + *f.grid + "'");
        if (!(lo < hi)) throw ConfigError("--grid: min must be < max");
        if (pts < 2) throw ConfigError("--grid: need at least 2 points");
        cfg.grid.t_min = lo;
        cfg.grid.t_max = hi;
        cfg.grid.points = pts;
    }
    if (f.grid_points) {
        if (*f.grid_points < 2) throw ConfigError("--grid-points: need at least 2 points");
        cfg.grid.points = *f.grid_points;
    }
    if (f.tol) {
        if (*f.tol <= 0) throw ConfigError("--tol: must be positive");
        cfg.iteration.tol = *f.tol;
    }
    if (f.max_iter) {
        if (*f.max_iter < 1) throw ConfigError("--max-iter: must be >= 1");
        cfg.iteration.max_iter = *f.max_iter;
    }
    if (f.damping) {
        if (!(*f.damping > 0 && *f.damping <= 1))
            throw ConfigError("--damping: must be in (0, 1]");
        cfg.iteration.damping = *f.damping;
    }
    if (f.trials) {
        if (*f.trials < 1) throw ConfigError("--trials: must be >= 1");
        cfg.sim_trials = *f.trials;
    }
    if (f.size) {
        if (*f.size < 2) throw ConfigError("--size: must be >= 2");
        cfg.sim_size = *f.size;
    }
    if (f.seed) cfg.sim_seed = *f.seed;
    if (f.bins) {
        if (*f.bins < 10) throw ConfigError("--bins: must be >= 10");
        cfg.sim_bins = *f.bins;
    }
    if (f.unwrap_k) {
        if (*f.unwrap_k < 1) throw ConfigError("--unwrap-k: must be >= 1");
        cfg.unwrap_k = *f.unwrap_k;
    }
    if (f.output_dir) cfg.output_dir = *f.output_dir;
}

fe::RunConfig load(const Flags& f, std::string* hash) {
    const std::string text = read_file(f.config_path);
    *hash = fe::config_hash(text);
    std::vector<std::string> warnings;
    fe::RunConfig cfg = fe::parse_config(text, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    apply_flags(cfg, f);
    return cfg;
}

std::string g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

using Meta = std::vector<std::pair<std::string, std::string>>;

Meta base_meta(const fe::RunConfig& cfg, const std::string& hash, const char* command) {
    return {{"tool_version", fe::kVersion},
            {"config_hash", hash},
            {"command", command},
            {"tol", g(cfg.iteration.tol)},
            {"max_iter", std::to_string(cfg.iteration.max_iter)}};
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

fe::DensityCurve run_density(const fe::RunConfig& cfg, bool skip_bad) {
    fe::DensityCurve curve =
        fe::density_grid(cfg.x_model, cfg.y_model, cfg.grid, cfg.iteration, skip_bad);
    if (cfg.unwrap_k > 1) curve = fe::unwrap_embedding(curve, cfg.unwrap_k);
    return curve;
}

void write_simulate_meta(const std::string& path, const fe::RunConfig& cfg,
                         const std::string& hash, size_t eig_count, double wall) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fe::Error("cannot write " + path);
    for (const auto& [k, v] : base_meta(cfg, hash, "simulate")) out << k << "=" << v << "\n";
    out << "epsilon=" << g(cfg.grid.epsilon) << "\n"
        << "iterations_min=0\niterations_median=0\niterations_max=0\n"
        << "seed=" << cfg.sim_seed << "\nsize=" << cfg.sim_size
        << "\ntrials=" << cfg.sim_trials << "\nbins=" << cfg.sim_bins
        << "\nunwrap_k=" << cfg.unwrap_k << "\neigenvalues=" << eig_count
        << "\nwall_ms=" << g(wall) << "\n";
}

int cmd_density(const Flags& f) {
    std::string hash;
    const fe::RunConfig cfg = load(f, &hash);
    const auto t0 = std::chrono::steady_clock::now();
    const fe::DensityCurve curve = run_density(cfg, f.skip_bad_points);
    const double wall = wall_ms_since(t0);

    std::filesystem::create_directories(cfg.output_dir);
    const std::string csv = cfg.output_dir + "/density.csv";
    Meta meta = base_meta(cfg, hash, "density");
    meta.emplace_back("grid", g(cfg.grid.t_min) + ":" + g(cfg.grid.t_max) + ":" +
                                  std::to_string(cfg.grid.points));
    meta.emplace_back("wall_ms", g(wall));
    fe::csv_export(curve, csv, meta);
    if (f.svg) fe::svg_overlay(curve, nullptr, cfg.output_dir + "/density.svg");
    std::cout << "wrote " << csv << " (mass=" << g(curve.total_mass) << ")\n";
    return 0;
}

int cmd_simulate(const Flags& f) {
    std::string hash;
    const fe::RunConfig cfg = load(f, &hash);
    const auto t0 = std::chrono::steady_clock::now();
    const fe::EmpiricalSpectrum emp = fe::product_spectrum(cfg.simulation());
    const double wall = wall_ms_since(t0);

    std::filesystem::create_directories(cfg.output_dir);
    fe::eigenvalues_csv(emp, cfg.output_dir + "/eigenvalues.csv");
    fe::histogram_csv(emp, cfg.output_dir + "/histogram.csv");
    write_simulate_meta(cfg.output_dir + "/simulate.meta", cfg, hash, emp.eigenvalues.size(),
                        wall);
    const auto b = fe::suggested_grid_bounds(emp);
    std::cout << "wrote " << cfg.output_dir << "/histogram.csv (" << emp.eigenvalues.size()
              << " eigenvalues, grid hint " << g(b.first) << ":" << g(b.second) << ")\n";
    return 0;
}

int cmd_compare(const Flags& f) {
    std::string hash;
    const fe::RunConfig cfg = load(f, &hash);
    const double threshold = f.threshold ? *f.threshold : 0.1;

    const auto t0 = std::chrono::steady_clock::now();
    const fe::DensityCurve curve = run_density(cfg, f.skip_bad_points);
    const fe::EmpiricalSpectrum emp = fe::product_spectrum(cfg.simulation());
    const double l1 = fe::l1_distance(curve, emp);
    const double wall = wall_ms_since(t0);

    std::filesystem::create_directories(cfg.output_dir);
    Meta meta = base_meta(cfg, hash, "compare");
    meta.emplace_back("grid", g(cfg.grid.t_min) + ":" + g(cfg.grid.t_max) + ":" +
                                  std::to_string(cfg.grid.points));
    meta.emplace_back("seed", std::to_string(cfg.sim_seed));
    meta.emplace_back("l1", g(l1));
    meta.emplace_back("wall_ms", g(wall));
    fe::csv_export(curve, cfg.output_dir + "/density.csv", meta);
    fe::histogram_csv(emp, cfg.output_dir + "/histogram.csv");
    if (f.dump_eigenvalues) fe::eigenvalues_csv(emp, cfg.output_dir + "/eigenvalues.csv");
    if (f.svg) fe::svg_overlay(curve, &emp, cfg.output_dir + "/overlay.svg");

    std::cout << "l1=" << g(l1) << "\n";
    return l1 <= threshold ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral density of a product of free operator-valued elements"};
    app.set_version_flag("--version", fe::kVersion);
    app.require_subcommand(1);

    Flags fd, fs, fc;
    add_common(app.add_subcommand("density", "fixed-point density on a real grid"), fd);
    add_common(app.add_subcommand("simulate", "random-matrix product spectrum"), fs);
    add_common(app.add_subcommand("compare", "density vs simulation, prints l1=<value>"), fc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand("density")) return cmd_density(fd);
        if (app.got_subcommand("simulate")) return cmd_simulate(fs);
        return cmd_compare(fc);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
