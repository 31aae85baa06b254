#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace msbl {

enum class SupMode {
    kExact,       // exhaustive sup over 2K-column submatrix spectral norms
    kRipRelaxed,  // sqrt(1 + delta_kr) * sqrt(2K)
};

struct EtaResult {
    double eta = 0.0;     // support-error exponent scale factor
    double eta_lb = 0.0;  // closed-form lower bound (relaxed sup)
    double sup_term = 0.0;
    bool vacuous = false;  // ric >= 1: eta <= 0, certificate carries no content
};

// eta = (1/8) (gmin/(s2+gmax))^2 (1-d_kr) / (K a*^2 sup_{|S|=2K}|||A_S^T A_S|||)
// and its relaxation with the sup replaced by sqrt(1+d_kr) sqrt(2K).
EtaResult eta_exponent(const Eigen::MatrixXd& a, int K, double sigma2, double gamma_min,
                       double gamma_max, double ric_kr_2k, SupMode sup_mode);

// (L K / gmin) (1 + |||R_Y|||_2 / sigma2); uniform Lipschitz constant of the
// log-likelihood over Theta(S).
double lipschitz_bound(int num_mmv, int K, double gamma_min, double sigma2,
                       double spec_norm_ry);

// log of max{1, (K^{7/2} a*^2 zeta (gmax-gmin)/sigma2)^K} with
// zeta = 48 sqrt2 ((1+d)/(1-d)) ((s2+gmax)/gmin)^2 ((3 s2 + 2 gmax)/gmin).
// Throws std::domain_error for sigma2 == 0 (the noiseless path does not use
// the covering-number bound).
double kappa_cov_bound_log(int K, double gamma_min, double gamma_max, double sigma2,
                           double ric_kr_2k, double a_star);

// The concentration constant of the sample-covariance tail bound is never
// pinned down analytically; this default is a calibration knob, not a
// normative value.
inline constexpr double kDefaultCovConcentrationConstant = 16.0;

// max{ (8/eta) log(3 e n K (1+delta)/delta), (8/eta) kappa_cov_log,
//      C_abs log(2/delta) }. Infinite when eta <= 0.
double sufficient_mmv_thm3(double eta, double kappa_cov_log, int n, int K, double delta,
                           double c_abs = kDefaultCovConcentrationConstant);

// K^{3/2} a*^2 xi max{log(3 e n K (1+delta)/delta), kappa_cov_log} with
// xi = 64 sqrt2 ((s2+gmax)/gmin)^2 sqrt(1+d)/(1-d). Infinite when d >= 1.
double sufficient_mmv_c2(int K, double a_star, double sigma2, double gamma_min,
                         double gamma_max, double ric_kr_2k, int n, double delta,
                         double kappa_cov_log);

struct RipASufficiency {
    double eta_lb = 0.0;
    double kappa_cov_log = 0.0;
    double l_sufficient = 0.0;
};

// Tighter chain for unit-column A with its own RIC: eta and kappa_cov bounds
// specialized through delta_2K of A (and delta_K of A inside zeta'), and the
// resulting MMV threshold (64 K a*^2/(1-d_2K)) ((s2+gmax)/gmin)^2 max{...}.
RipASufficiency sufficient_mmv_rip_a(int K, double a_star, double sigma2, double gamma_min,
                                     double gamma_max, double ric_a_2k, double ric_a_k, int n,
                                     double delta);

// For each sigma2 in the grid, lambda_max of the discrimination matrix
// H = S_{g1}^{1/2} S_{g2}^{-1} S_{g1}^{1/2}; sigma2 * lambda_max stays bounded
// away from zero when supp(g1) \ supp(g2) is nonempty.
std::vector<std::pair<double, double>> lambda_max_noiseless(
    const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma1, const Eigen::VectorXd& gamma2,
    const std::vector<double>& sigma2_grid);

struct BoundsReport {
    // inputs echoed
    int n = 0;
    int K = 0;
    double sigma2 = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double delta = 0.0;
    double a_star = 0.0;
    double ric_kr_2k = 0.0;
    double ric_a_2k = 0.0;
    double sup_spectral = 0.0;
    // derived certificate values
    double eta = 0.0;
    double eta_lb = 0.0;
    double lipschitz_per_mmv = 0.0;  // L=1 normalization of lipschitz_bound
    double kappa_cov_log = 0.0;
    double l_sufficient_thm3 = 0.0;
    double l_sufficient_c2 = 0.0;
    double l_sufficient_rip_a = 0.0;

    static std::string csv_header();
    std::string to_csv_row() const;
};

// Pure arithmetic assembly of the full certificate from precomputed RIC
// values; never triggers RIC computation itself. The Lipschitz field uses the
// data-free spectral envelope 2(sigma2 + gamma_max sqrt(K) sqrt(1+ric_kr_2k))
// in place of |||R_Y|||_2.
BoundsReport make_bounds_report(const Eigen::MatrixXd& a, int K, double sigma2,
                                double gamma_min, double gamma_max, double delta,
                                double ric_kr_2k, double ric_a_2k, SupMode sup_mode,
                                double c_abs = kDefaultCovConcentrationConstant);

}  // namespace msbl
