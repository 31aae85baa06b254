#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "msbl/bounds.hpp"
#include "msbl/model.hpp"
#include "msbl/solvers.hpp"

namespace msbl {

enum class Algorithm {
    kMsbl,
    kCmsbl,
    kSomp,
    kColasso,
    kOsga,
};

enum class MatrixPolicy {
    kFreshPerTrial,
    kFixed,
};

enum class ExtractionPolicy {
    kThreshold,
    kTopK,
};

struct ExperimentConfig {
    int m = 8;
    int n = 20;
    int K = 3;       // sparsity budget passed to cmsbl
    int k_true = 3;  // realized support size
    std::vector<int> l_grid = {5, 10, 20, 40, 80, 160};
    double sigma2 = 0.1;
    double gamma_min = 1.0;
    double gamma_max = 1.0;
    int trials = 100;
    MatrixPolicy matrix_policy = MatrixPolicy::kFreshPerTrial;
    MatrixNormalization matrix_normalization = MatrixNormalization::kUnitColumns;
    Algorithm algorithm = Algorithm::kMsbl;
    ExtractionPolicy extraction = ExtractionPolicy::kTopK;
    std::uint64_t master_seed = 1;
    int threads = 1;
    MsblConfig solver;
    double colasso_lambda = 1e-4;
    bool record_timings = false;  // off by default: timing breaks byte-level determinism

    void validate() const;
};

struct CellResult {
    int l = 0;
    int successes = 0;
    int trials = 0;
    int numerical_failures = 0;  // counted inside "trials" as failed trials
    double error_rate = 1.0;
    double mean_iters = 0.0;
    double wall_time_ms = 0.0;
};

enum class TrialOutcome {
    kSuccess,
    kFailure,
    kNumericalFailure,
};

struct TrialStats {
    TrialOutcome outcome = TrialOutcome::kFailure;
    int iters = 0;
};

// Single seeded trial at a given number of MMVs; success means the recovered
// support matches the realized support exactly.
TrialStats run_trial(const ExperimentConfig& cfg, int num_mmv, std::uint64_t cell_seed,
                     std::uint64_t trial_index);

// One CellResult per entry of cfg.l_grid; trials are distributed over
// cfg.threads with per-trial seeds, so results do not depend on thread count.
std::vector<CellResult> error_curve(const ExperimentConfig& cfg);

struct PhaseDiagram {
    std::vector<int> m_grid;
    std::vector<int> k_grid;
    std::vector<std::vector<double>> error_rate;  // [mi][ki]
    int trials = 0;
};

// Error-rate grid at fixed L = cfg.l_grid.front().
PhaseDiagram phase_diagram(const ExperimentConfig& cfg_base, const std::vector<int>& m_grid,
                           const std::vector<int>& k_grid);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int used_cells = 0;
    int excluded_cells = 0;
};

// OLS of log(error_rate) against L; cells at rate 0 or 1 are excluded.
// Throws std::runtime_error when fewer than 3 usable cells remain.
DecayFit decay_fit(const std::vector<CellResult>& cells);

// One-sided bootstrap p-value for slope < 0 under per-cell binomial
// resampling: fraction of resampled slopes >= 0.
double decay_slope_bootstrap_pvalue(const std::vector<CellResult>& cells, int resamples,
                                    std::uint64_t seed);

// Results CSV: "L,successes,trials,error_rate,mean_iters,wall_time_ms".
void write_error_curve_csv(const std::string& path, const std::vector<CellResult>& cells);

// Phase CSV: "m,k,error_rate,trials".
void write_phase_csv(const std::string& path, const PhaseDiagram& pd);

// Companion certificate rows, one BoundsReport per cell (same order).
void write_bounds_companion_csv(const std::string& path,
                                const std::vector<BoundsReport>& reports);

// Certificate for a cell's (A, K, sigma2, gamma interval). RIC of the self
// Khatri-Rao product is computed here, exhaustively when within budget and by
// randomized lower bound otherwise (the cost is explicit at this call site).
BoundsReport bounds_for_config(const ExperimentConfig& cfg, double delta = 0.1);

// Minimal static SVG renderings with the data table embedded as a comment.
void write_error_curve_svg(const std::string& path, const std::vector<CellResult>& cells);
void write_phase_svg(const std::string& path, const PhaseDiagram& pd);

}  // namespace msbl
