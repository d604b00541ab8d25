#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mcrt {

/// The experiments the toolkit can orchestrate end to end.
enum class ExperimentKind {
    green_loglaw,      ///< ball resistance vs log radius on mated maps
    specdim,           ///< spectral dimension from exact return probabilities
    displacement,      ///< displacement exponent from sampled walks
    volume,            ///< ball-volume growth exponent
    resistance_triple, ///< Dirichlet / Thomson / Monte Carlo agreement sweep
    appendix_a,        ///< subdivision, reweighting, and lazy-walk identities
    transfer_sweep,    ///< energy transfer inequality over random instances
};

std::string to_string(ExperimentKind kind);
/// Inverse of to_string; throws std::invalid_argument for unknown names.
ExperimentKind experiment_kind_of(const std::string& name);

/// Full description of one experiment run. Common fields first; the rest are
/// read by the kinds noted per field. `tolerance` is the kind's acceptance
/// dial: specdim = allowed |mean d_s - 2| (default 0.3), resistance_triple =
/// relative agreement of the deterministic resistances (default 1e-8),
/// appendix_a = total-variation bound (default 1e-12); 0 selects the default
/// everywhere, and the remaining kinds have fixed pass rules.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::green_loglaw;
    double gamma = 1.4142135623730951;  // sqrt(2)
    std::int64_t window_n = 1000000;
    std::uint32_t mesh_k = 1;
    std::uint32_t samples = 20;
    std::uint64_t seed = 1;

    std::vector<std::int32_t> radii{8, 16, 32, 64, 128, 256};  // green_loglaw
    std::uint32_t n_max = 4096;       // specdim: evolution horizon
    double trunc = 1e-15;             // specdim: per-entry truncation threshold
    double drop_budget = 1e-9;        // specdim: total dropped-mass budget
    std::uint32_t walkers = 10000;    // displacement, resistance_triple
    std::uint64_t max_time = 100000;  // displacement: top of the time grid
    std::int32_t r_max = 64;          // volume
    std::uint32_t max_vertices = 50;  // resistance_triple, appendix_a, transfer_sweep
    std::uint32_t m_steps = 50;       // appendix_a: lazy-walk horizon cap
    std::uint32_t instances = 500;    // resistance_triple, appendix_a, transfer_sweep
    double tolerance = 0.0;           // see above; 0 = kind default
    bool synthetic = false;           // specdim: run on an injected 1/n series

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

    /// Throws std::invalid_argument when a field is outside its documented
    /// range for this kind.
    void validate() const;
    /// The tolerance actually applied (kind default when the field is 0).
    double effective_tolerance() const;
};

/// Canonical text form: common keys, then one "[kind-name]" section holding
/// every kind-specific key. parse_config(format_config(c)) == c for any valid
/// config; unknown keys, malformed values, or a section not matching the kind
/// throw format_error.
std::string format_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);

/// Outcome of one independent sample (one map, or one random instance batch
/// element). `values` holds the kind's named scalars in a fixed order.
struct SampleResult {
    std::uint32_t index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string note;  ///< abort reason when !ok (e.g. window contamination)
    std::vector<std::pair<std::string, double>> values;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<SampleResult> samples;
    std::map<std::string, double> aggregate;
    bool pass = false;      ///< configured tolerances met
    bool complete = false;  ///< no sample aborted
    std::string json;       ///< full report document
    /// CSV bodies keyed by file name, byte-stable for identical configs.
    std::vector<std::pair<std::string, std::string>> csv_files;
};

/// Runs the configured experiment: derives one substream seed per sample,
/// executes samples on up to thread_budget() worker threads, aggregates in
/// fixed sample order, and assembles the JSON report and CSV bodies. Nothing
/// is written to disk. A sample that trips a contamination guard or throws is
/// recorded as not ok with its reason; the report is then marked incomplete.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes report.json plus every CSV into `out_dir` (created if missing).
void write_report(const ExperimentReport& report, const std::string& out_dir);

/// Worker-thread cap: the MCRT_THREADS environment variable when set (>= 1),
/// otherwise the hardware concurrency.
std::uint32_t thread_budget();

}  // namespace mcrt
