#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace msbl {

// Relative singular-value cutoff for all rank decisions.
inline constexpr double kRankTol = 1e-10;

// Hard cap on the column count for exhaustive spark / Kruskal-rank search.
inline constexpr int kExhaustiveColumnLimit = 20;

struct CovarianceModel {
    double sigma2;
    Eigen::VectorXd gamma;
    Eigen::MatrixXd matrix;  // sigma2*I + A*diag(gamma)*A^T, symmetrized
};

// Columnwise Kronecker (Khatri-Rao) product; a and b must have equal widths.
Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Self Khatri-Rao product A (.) A.
inline Eigen::MatrixXd self_khatri_rao(const Eigen::MatrixXd& a) { return khatri_rao(a, a); }

// Numerical rank via singular values with relative tolerance kRankTol.
int numerical_rank(const Eigen::MatrixXd& a);

// Smallest number of linearly dependent columns; n+1 sentinel when all column
// subsets are independent. Exhaustive; throws capacity_error for n beyond the
// configured limit.
int spark(const Eigen::MatrixXd& a, int column_limit = kExhaustiveColumnLimit);

// Largest k such that every k-column submatrix has full rank.
int kruskal_rank(const Eigen::MatrixXd& a, int column_limit = kExhaustiveColumnLimit);

// sigma2*I_m + A*diag(gamma)*A^T with explicit symmetrization.
CovarianceModel sigma_gamma(const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma,
                            double sigma2);

// Symmetric PSD square root via eigendecomposition, eigenvalues floored at
// `floor` before the square root.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a, double floor = 1e-14);

// Spectral norm of a symmetric matrix.
double spectral_norm_sym(const Eigen::MatrixXd& a);

// Visits every size-k subset of {0,...,n-1} in lexicographic order. Stops
// early when the visitor returns false. Returns the number of subsets visited.
std::uint64_t for_each_subset(int n, int k,
                              const std::function<bool(const std::vector<int>&)>& visit);

// C(n, k) saturated at 2^63-1.
std::uint64_t binomial(int n, int k);

}  // namespace msbl
