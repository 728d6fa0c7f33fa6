#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cmdp/agents.hpp"
#include "cmdp/generator.hpp"

namespace cmdp {

/// Log-log decay-rate fit of an average-gap sequence. Degenerate inputs (a
/// zero gap at an included point: perfect learning) are flagged and reported
/// with the -inf sentinel slope.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool degenerate = false;
};

/// OLS of log(avg_gap) on log(n) over the trailing `window` episodes of each
/// geometric checkpoint n = 2^k within [lo, hi]. Requires
/// len >= 4 * window. hi <= 0 means "up to the full sequence".
SlopeFit fit_decay_slope(std::span<const double> avg_gap, int window, long lo = 1, long hi = 0);

struct ExperimentConfig {
    // instance block
    Dims dims;
    ModelKind model_kind = ModelKind::ModelI;
    std::uint64_t instance_seed = 0;
    int class_size = 1;
    int reward_class_size = 1;
    double mix_eps = 0.0;
    std::string instance_file; // optional; honored by `check` (validate + deterministic suite)

    // agent block (seed filled per run)
    AgentConfig agent;

    // run block
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "out";
    int slope_window = 8;
    long slope_lo = 64;
    long slope_hi = 0; // 0 = N

    // check block
    int deterministic_trials = 200;
    std::vector<int> check_episodes = {8, 64, 512};
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path); // throws ConfigError

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One CSV data row per episode:
/// schema_version,episode,context,gap,avg_gap,mean_tbonus,mean_rbonus,mle_correct
/// Floats carry 17 significant digits.
std::string run_log_to_csv(const RunLog& log);

/// Exit codes: 0 success, 2 config error, 3 runtime failure.
int cli_run(const std::string& config_path, const std::vector<std::string>& overrides = {});

/// Deterministic + probabilistic diagnostics battery. Exit codes: 0 all
/// within bounds, 4 deterministic-check failure, 1 probabilistic violation
/// frequency beyond slack, 2 config error, 3 runtime failure.
int cli_check(const std::string& config_path);

/// Emits "n<TAB>avg_gap" rows (mean curve over seeds) from a summary.json.
int cli_plot_data(const std::string& summary_path);

/// Worker-pool width: CMDP_LAB_THREADS if set, else available parallelism.
int worker_pool_size();

} // namespace cmdp
