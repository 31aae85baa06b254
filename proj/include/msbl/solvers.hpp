#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace msbl {

enum class UpdateRule {
    kEm,
    kFixedPoint,
};

enum class GammaInit {
    kOnes,
    kMatchedFilter,
};

struct MsblConfig {
    int max_iters = 500;
    double tol = 1e-6;             // relative gamma-change stopping threshold
    double prune_floor = 1e-8;     // gamma below this is clamped to 0
    double sigma2_eff_floor = 1e-10;
    UpdateRule update_rule = UpdateRule::kEm;
    GammaInit init_gamma = GammaInit::kOnes;
    double extraction_tau = 1e-3;  // threshold policy: keep gamma > tau * max(gamma)
    // Evidence-selected random restarts: the run with the highest final
    // log-likelihood wins. Restart 0 uses init_gamma; later ones draw
    // log-uniform initializations from a stream seeded by restart_seed.
    int restarts = 1;
    std::uint64_t restart_seed = 0;
    // Noise continuation: when > the effective sigma2, iterate first at this
    // level and geometrically shrink it by anneal_factor, warm-starting gamma
    // at each stage. 0 disables. The reported trace covers the final stage.
    double anneal_sigma2_start = 0.0;
    double anneal_factor = 0.1;
    // Informed multi-start: enumerate all supports of this size (within the
    // subset budget), rank them by projection residual of R_Y, EM-polish the
    // candidate_polish best and keep the highest-evidence run. 0 disables.
    // This approximates the global type-II ML maximizer at desk scale.
    int candidate_support_k = 0;
    int candidate_polish = 3;

    void validate() const;
};

struct RecoveryResult {
    Eigen::VectorXd gamma_hat;
    std::vector<int> support_hat;
    std::vector<double> loglik_trace;  // nondecreasing for the EM rule
    int iters = 0;
    bool converged = false;

    // CSV: n gamma columns, then support joined by ';', iters, converged
    std::string to_csv_row() const;
};

// Proportional log-likelihood -L log|Sigma_gamma| - tr(Sigma_gamma^-1 Y Y^T);
// the gamma-independent -(mL/2) log 2pi constant is omitted throughout.
double loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a,
              const Eigen::VectorXd& gamma, double sigma2);

// Same quantity from the sample covariance R_Y = (1/L) Y Y^T; lets solvers
// iterate at a cost independent of L.
double loglik_from_covariance(const Eigen::MatrixXd& ry, int num_mmv, const Eigen::MatrixXd& a,
                              const Eigen::VectorXd& gamma, double sigma2);

// Type-II ML over the per-row variances. EM update:
//   mu = Gamma A^T Sigma^-1 Y,  s_i = g_i - g_i^2 a_i^T Sigma^-1 a_i,
//   g_i <- (1/L)||mu_i||^2 + s_i.
// Fixed-point (MacKay) update: g_i <- (1/L)||mu_i||^2 / (1 - s_i/g_i).
RecoveryResult msbl(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2,
                    const MsblConfig& cfg = {});

// msbl with a per-iteration projection onto Theta_K: keep the K largest
// entries, zero the rest, clamp surviving positives into [gamma_min,
// gamma_max]. The reported trace is of the projected iterates and is not
// monotone in general.
RecoveryResult cmsbl(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2, int K,
                     double gamma_min, double gamma_max, const MsblConfig& cfg = {});

struct SupportExtraction {
    std::vector<int> indices;
    bool degenerate = false;  // top_k requested on an all-zero gamma
};

// Threshold policy: { i : gamma_i > tau * max(gamma) }.
SupportExtraction extract_support_threshold(const Eigen::VectorXd& gamma, double tau = 1e-3);

// Indices of the k largest entries, ties broken toward the lowest index.
SupportExtraction extract_support_top_k(const Eigen::VectorXd& gamma, int k);

struct SompResult {
    std::vector<int> indices;
    bool rank_deficient = false;  // pseudo-inverse fell back to truncated SVD
};

// Simultaneous orthogonal matching pursuit, k greedy column picks.
SompResult somp(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, int k);

struct ColassoResult {
    Eigen::VectorXd gamma;
    int iters = 0;
    bool converged = false;
    double objective = 0.0;
};

// Covariance-matching non-negative lasso: minimize over gamma >= 0
//   0.5 || (A (.) A) gamma - vec(R_Y - sigma2 I) ||^2 + lambda ||gamma||_1
// by projected gradient with backtracking line search.
ColassoResult colasso(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2,
                      double lambda, int max_iters = 5000);

// One Step Greedy Algorithm: scores s_i = (1/L) sum_j (a_i^T y_j)^2, top-k.
std::vector<int> osga(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, int k);

}  // namespace msbl
