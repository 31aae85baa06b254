#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace msbl {

enum class MatrixNormalization {
    kUnitColumns,  // each column rescaled to unit l2 norm
    kIidScaled,    // i.i.d. entries with variance 1/sqrt(m)
};

enum class SupportPolicy {
    kFixed,
    kUniformRandom,
};

// Generator spec for a joint-sparse Gaussian source: row support, per-row
// variances and the admissible variance interval.
struct SourceSpec {
    int n = 0;
    int max_support_size = 0;                 // K
    std::vector<int> support;                 // S*, sorted, |S*| <= K
    Eigen::VectorXd gamma_star;               // length n, supp == support
    double gamma_min = 1.0;
    double gamma_max = 1.0;

    void validate() const;                    // throws std::invalid_argument
};

struct MmvInstance {
    Eigen::MatrixXd a;   // m x n
    Eigen::MatrixXd x;   // n x L, rows outside S* exactly zero
    Eigen::MatrixXd y;   // m x L, y = a*x + w
    double sigma2 = 0.0;
    std::uint64_t seed = 0;
};

// Zero-mean Gaussian measurement matrix. unit_columns rescales each column to
// unit norm; iid_scaled keeps raw entries with per-entry variance 1/sqrt(m).
Eigen::MatrixXd sample_gaussian_matrix(int m, int n, MatrixNormalization normalization,
                                       std::uint64_t seed);

// Realizes support (if uniform_random) and draws the nonzero variances
// uniformly from [gamma_min, gamma_max].
SourceSpec sample_source(const SourceSpec& spec, SupportPolicy policy, std::uint64_t seed);

// Y = A X + W with X columns i.i.d. N(0, diag(gamma_star)) and W i.i.d.
// N(0, sigma2). sigma2 == 0 gives exactly noiseless observations.
MmvInstance synthesize_mmv(const SourceSpec& spec, const Eigen::MatrixXd& a, int num_mmv,
                           double sigma2, std::uint64_t seed);

}  // namespace msbl
