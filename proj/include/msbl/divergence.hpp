#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace msbl {

// Zero-mean Gaussian pair identified by its SPD covariances.
struct GaussianPair {
    Eigen::MatrixXd sigma1;
    Eigen::MatrixXd sigma2;
};

enum class SupSearch {
    kExhaustive,
    kRandomized,
};

// tr(x y^-1) - log|x y^-1| - n. Nonnegative for SPD arguments; equals the
// M-SBL negative log-likelihood up to a gamma-independent constant when
// x = R_Y and y = Sigma_gamma.
double logdet_bregman(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Closed-form alpha-Renyi divergence between the zero-mean Gaussians of
// `pair`, alpha in (0,1).
double renyi_gaussian(const GaussianPair& pair, double alpha);

// Direct numerical integration of the Renyi divergence definition for
// dimension 1 or 2; independent oracle for the closed form.
double renyi_quadrature_oracle(const GaussianPair& pair, double alpha);

struct RenyiHalfEigenform {
    double value;
    Eigen::VectorXd eigvals;  // eigenvalues of the discrimination matrix H
};

// D_{1/2} via the discrimination matrix H = S1^{1/2} S2^{-1} S1^{1/2}:
// sum_i log((sqrt(l_i) + 1/sqrt(l_i))/2).
RenyiHalfEigenform renyi_half_eigenform(const GaussianPair& pair);

// Strong convexity constant of -logdet over the Sigma_gamma family with
// ||gamma||_0 <= 2K and entries in [0, gamma_max]:
//   m_psi = 1 / sup_{|S|=2K} |||Sigma_{gamma_max 1_S} o Sigma_{gamma_max 1_S}|||_2.
// The sup is attained at gamma = gamma_max on the support since the Hadamard
// square's spectral norm is entrywise monotone over this PSD family.
// Randomized search samples supports and therefore upper-bounds m_psi.
double strong_convexity_constant(const Eigen::MatrixXd& a, double sigma2, double gamma_max,
                                 int K, SupSearch search, int trials = 200,
                                 std::uint64_t seed = 0);

// Strong convexity constant of -logdet over all convex combinations of the
// pair: 1 / max_t |||(1-t) S1 + t S2|||_2^2, evaluated on a t-grid.
double m_star_convex_combinations(const GaussianPair& pair, double grid_step = 0.01);

// (1/4) alpha m_star ||S2 - S1||_F^2.
double renyi_lower_bound_thm1(const GaussianPair& pair, double alpha, double m_star);

struct Prop4Bound {
    double value;
    int k_d;          // support Hamming distance
    double sup_term;  // sup over 2K-column submatrices of |||A_S^T A_S|||_2
    bool vacuous;     // true when ric_2k_kr >= 1
};

// Renyi lower bound specialized to the Sigma_gamma family. sup_term is
// computed exhaustively (kExhaustive) or replaced by the
// sqrt(1+delta)*sqrt(2K) relaxation (kRandomized plays no role here; the
// relaxed mode is selected with use_rip_relaxation).
Prop4Bound renyi_lower_bound_prop4(const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma1,
                                   const Eigen::VectorXd& gamma2, double sigma2, int K,
                                   double alpha, double ric_2k_kr,
                                   bool use_rip_relaxation = false);

}  // namespace msbl
