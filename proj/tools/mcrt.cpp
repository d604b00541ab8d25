#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcrt/experiments.hpp"
#include "mcrt/io.hpp"
#include "mcrt/map_builder.hpp"
#include "mcrt/walk.hpp"

namespace {

// exit codes: 0 tolerances met, 2 completed with failures, 1 execution error
constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFailures = 2;

struct KindFlags {
    mcrt::ExperimentConfig values;
    std::string config_path;
    std::string out_dir = "mcrt-out";

    CLI::Option* gamma = nullptr;
    CLI::Option* window = nullptr;
    CLI::Option* mesh = nullptr;
    CLI::Option* samples = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* radii = nullptr;
    CLI::Option* n_max = nullptr;
    CLI::Option* trunc = nullptr;
    CLI::Option* drop_budget = nullptr;
    CLI::Option* walkers = nullptr;
    CLI::Option* max_time = nullptr;
    CLI::Option* r_max = nullptr;
    CLI::Option* max_vertices = nullptr;
    CLI::Option* m_steps = nullptr;
    CLI::Option* instances = nullptr;
    CLI::Option* tolerance = nullptr;
    CLI::Option* synthetic = nullptr;
};

/// Registers every config-mirroring flag on `cmd`. Which of them matter
/// depends on the experiment kind, exactly as in the config file format.
void add_config_flags(CLI::App* cmd, KindFlags& f) {
    cmd->add_option("--config", f.config_path,
                    "Config file to start from (flags override its values)");
    cmd->add_option("--out", f.out_dir, "Report output directory")
        ->capture_default_str();
    f.gamma = cmd->add_option("--gamma", f.values.gamma, "Coupling parameter in (0,2)");
    f.window = cmd->add_option("--window", f.values.window_n,
                               "Half-width n of the cell window (-n, n]");
    f.mesh = cmd->add_option("--mesh", f.values.mesh_k,
                             "Mesh samples per unit time step");
    f.samples = cmd->add_option("--samples", f.values.samples,
                                "Independent map samples");
    f.seed = cmd->add_option("--seed", f.values.seed, "Master seed");
    f.radii = cmd->add_option("--radii", f.values.radii,
                              "Comma-separated ball radii (green log-law)")
                  ->delimiter(',');
    f.n_max = cmd->add_option("--n-max", f.values.n_max,
                              "Evolution horizon in even steps (specdim)");
    f.trunc = cmd->add_option("--trunc", f.values.trunc,
                              "Per-entry truncation threshold (specdim)");
    f.drop_budget = cmd->add_option("--drop-budget", f.values.drop_budget,
                                    "Total dropped-mass budget (specdim)");
    f.walkers = cmd->add_option("--walkers", f.values.walkers,
                                "Monte Carlo walkers per sample");
    f.max_time = cmd->add_option("--max-time", f.values.max_time,
                                 "Top of the displacement time grid");
    f.r_max = cmd->add_option("--r-max", f.values.r_max,
                              "Largest ball radius (volume)");
    f.max_vertices = cmd->add_option("--max-vertices", f.values.max_vertices,
                                     "Largest random instance size");
    f.m_steps = cmd->add_option("--m-steps", f.values.m_steps,
                                "Lazy-walk horizon cap (appendixa)");
    f.instances = cmd->add_option("--instances", f.values.instances,
                                  "Random instances for the sweep kinds");
    f.tolerance = cmd->add_option("--tolerance", f.values.tolerance,
                                  "Acceptance tolerance (0 = kind default)");
    f.synthetic = cmd->add_flag("--synthetic", f.values.synthetic,
                                "Run specdim on the injected 1/n series");
}

/// Builds the effective config: file first (when given), then flag overrides.
mcrt::ExperimentConfig resolve_config(mcrt::ExperimentKind kind, const KindFlags& f) {
    mcrt::ExperimentConfig c;
    if (!f.config_path.empty()) {
        c = mcrt::parse_config(mcrt::read_text_file(f.config_path));
        if (c.kind != kind) {
            throw std::invalid_argument("config file is for '" + to_string(c.kind) +
                                        "', not '" + to_string(kind) + "'");
        }
    }
    c.kind = kind;
    if (*f.gamma) c.gamma = f.values.gamma;
    if (*f.window) c.window_n = f.values.window_n;
    if (*f.mesh) c.mesh_k = f.values.mesh_k;
    if (*f.samples) c.samples = f.values.samples;
    if (*f.seed) c.seed = f.values.seed;
    if (*f.radii) c.radii = f.values.radii;
    if (*f.n_max) c.n_max = f.values.n_max;
    if (*f.trunc) c.trunc = f.values.trunc;
    if (*f.drop_budget) c.drop_budget = f.values.drop_budget;
    if (*f.walkers) c.walkers = f.values.walkers;
    if (*f.max_time) c.max_time = f.values.max_time;
    if (*f.r_max) c.r_max = f.values.r_max;
    if (*f.max_vertices) c.max_vertices = f.values.max_vertices;
    if (*f.m_steps) c.m_steps = f.values.m_steps;
    if (*f.instances) c.instances = f.values.instances;
    if (*f.tolerance) c.tolerance = f.values.tolerance;
    if (*f.synthetic) c.synthetic = f.values.synthetic;
    return c;
}

int run_and_report(mcrt::ExperimentKind kind, const KindFlags& f) {
    const mcrt::ExperimentConfig config = resolve_config(kind, f);
    const mcrt::ExperimentReport report = mcrt::run_experiment(config);
    mcrt::write_report(report, f.out_dir);
    mcrt::write_text_file(
        (std::filesystem::path(f.out_dir) / "config.txt").string(),
        mcrt::format_config(config));

    std::size_t ok = 0;
    for (const auto& s : report.samples) ok += s.ok;
    std::printf("%s: %zu/%zu samples ok, %s%s -> %s\n",
                to_string(config.kind).c_str(), ok, report.samples.size(),
                report.pass ? "pass" : "fail",
                report.complete ? "" : " (incomplete)", f.out_dir.c_str());
    return report.pass ? kExitPass : kExitFailures;
}

int show_report(const std::string& in_path) {
    namespace fs = std::filesystem;
    fs::path path(in_path);
    if (fs::is_directory(path)) path /= "report.json";
    const nlohmann::json doc = nlohmann::json::parse(mcrt::read_text_file(path.string()));

    std::printf("kind: %s\n", doc["config"]["kind"].get<std::string>().c_str());
    std::printf("seed: %llu\n",
                (unsigned long long)doc["config"]["seed"].get<std::uint64_t>());
    std::size_t ok = 0;
    for (const auto& s : doc["samples"]) ok += s["ok"].get<bool>();
    std::printf("samples: %zu/%zu ok\n", ok, doc["samples"].size());
    for (const auto& s : doc["samples"]) {
        if (!s["ok"].get<bool>()) {
            std::printf("  sample %llu aborted: %s\n",
                        (unsigned long long)s["index"].get<std::uint64_t>(),
                        s["note"].get<std::string>().c_str());
        }
    }
    std::printf("aggregate:\n");
    for (const auto& [key, value] : doc["aggregate"].items()) {
        std::printf("  %s = %.17g\n", key.c_str(), value.get<double>());
    }
    const bool pass = doc["pass"].get<bool>();
    std::printf("pass: %s\ncomplete: %s\n", pass ? "yes" : "no",
                doc["complete"].get<bool>() ? "yes" : "no");
    return pass ? kExitPass : kExitFailures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for mated-CRT random planar maps"};
    app.require_subcommand(1);

    // gen: draw a correlated walk and persist it
    auto* gen = app.add_subcommand("gen", "Generate a correlated walk file");
    mcrt::WalkParams gen_params;
    gen_params.window_n = 1000;
    gen_params.seed = 1;
    std::string gen_out = "walk.mcrtwalk";
    gen->add_option("--gamma", gen_params.gamma, "Coupling parameter in (0,2)")
        ->capture_default_str();
    gen->add_option("--window", gen_params.window_n, "Half-width n of the window")
        ->capture_default_str();
    gen->add_option("--mesh", gen_params.mesh_k, "Mesh samples per unit step")
        ->capture_default_str();
    gen->add_option("--seed", gen_params.seed, "Walk seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output walk file")->capture_default_str();

    // build: adjacency from a stored or freshly drawn walk
    auto* build = app.add_subcommand("build", "Build the cell adjacency graph");
    mcrt::WalkParams build_params;
    build_params.window_n = 1000;
    build_params.seed = 1;
    std::string build_walk, build_out = "graph.mcrtgraf";
    build->add_option("--walk", build_walk, "Input walk file (else draw one)");
    build->add_option("--gamma", build_params.gamma, "Coupling parameter in (0,2)")
        ->capture_default_str();
    build->add_option("--window", build_params.window_n, "Half-width n of the window")
        ->capture_default_str();
    build->add_option("--mesh", build_params.mesh_k, "Mesh samples per unit step")
        ->capture_default_str();
    build->add_option("--seed", build_params.seed, "Walk seed")->capture_default_str();
    build->add_option("--out", build_out, "Output graph file")->capture_default_str();

    auto* resist = app.add_subcommand(
        "resist", "Ball resistance vs log radius on mated maps");
    KindFlags resist_flags;
    add_config_flags(resist, resist_flags);
    bool triple = false;
    resist->add_flag("--triple", triple,
                     "Run the Dirichlet/Thomson/Monte-Carlo agreement sweep instead");

    auto* specdim = app.add_subcommand(
        "specdim", "Spectral dimension from exact return probabilities");
    KindFlags specdim_flags;
    add_config_flags(specdim, specdim_flags);

    auto* displace = app.add_subcommand(
        "displace", "Displacement exponent from sampled walks");
    KindFlags displace_flags;
    add_config_flags(displace, displace_flags);

    auto* volume = app.add_subcommand("volume", "Ball-volume growth exponent");
    KindFlags volume_flags;
    add_config_flags(volume, volume_flags);

    auto* transfer = app.add_subcommand(
        "transfer", "Energy transfer inequality over random instances");
    KindFlags transfer_flags;
    add_config_flags(transfer, transfer_flags);

    auto* appendixa = app.add_subcommand(
        "appendixa", "Subdivision, reweighting, and lazy-walk identity sweep");
    KindFlags appendixa_flags;
    add_config_flags(appendixa, appendixa_flags);

    auto* report_cmd = app.add_subcommand("report", "Summarize an existing report");
    std::string report_in = "mcrt-out";
    report_cmd->add_option("--in", report_in, "Report directory or report.json path")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitError;
    }

    try {
        if (*gen) {
            mcrt::save_walk(mcrt::generate_walk(gen_params), gen_out);
            std::printf("wrote %s\n", gen_out.c_str());
            return kExitPass;
        }
        if (*build) {
            const mcrt::CorrelatedWalk walk =
                build_walk.empty() ? mcrt::generate_walk(build_params)
                                   : mcrt::load_walk(build_walk);
            const mcrt::MatedCrtGraph graph = mcrt::build_adjacency(walk);
            mcrt::save_graph(graph, build_out);
            std::printf("wrote %s (%llu vertices, %zu edges)\n", build_out.c_str(),
                        (unsigned long long)graph.vertex_count(),
                        graph.edges().size());
            return kExitPass;
        }
        if (*resist) {
            return run_and_report(triple ? mcrt::ExperimentKind::resistance_triple
                                         : mcrt::ExperimentKind::green_loglaw,
                                  resist_flags);
        }
        if (*specdim) {
            return run_and_report(mcrt::ExperimentKind::specdim, specdim_flags);
        }
        if (*displace) {
            return run_and_report(mcrt::ExperimentKind::displacement, displace_flags);
        }
        if (*volume) {
            return run_and_report(mcrt::ExperimentKind::volume, volume_flags);
        }
        if (*transfer) {
            return run_and_report(mcrt::ExperimentKind::transfer_sweep, transfer_flags);
        }
        if (*appendixa) {
            return run_and_report(mcrt::ExperimentKind::appendix_a, appendixa_flags);
        }
        if (*report_cmd) {
            return show_report(report_in);
        }
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kExitError;
    }
    return kExitError;
}
