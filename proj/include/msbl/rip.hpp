#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace msbl {

enum class RicMethod {
    kExhaustive,
    kRandomized,
};

struct RicEstimate {
    int order = 0;
    double lower = 0.0;
    double upper = 0.0;
    RicMethod method = RicMethod::kExhaustive;
    std::uint64_t trials = 0;  // randomized only

    // CSV row: order,lower,upper,method,trials
    std::string to_csv_row() const;
};

inline constexpr std::uint64_t kRicSubsetBudget = 200000;

// Exact RIC of order k: max over size-k supports of the Gram eigenvalue
// excursion max(lmax - 1, 1 - lmin). Throws capacity_error when C(n,k)
// exceeds the subset budget.
RicEstimate ric_exhaustive(const Eigen::MatrixXd& a, int k,
                           std::uint64_t budget = kRicSubsetBudget);

// Certified lower bound on the RIC from `trials` sampled supports; upper is
// the trivial 1.0 sentinel.
RicEstimate ric_randomized(const Eigen::MatrixXd& a, int k, std::uint64_t trials,
                           std::uint64_t seed);

// RIC of the self Khatri-Rao product A (.) A, columns not renormalized.
RicEstimate kr_ric(const Eigen::MatrixXd& a, int k, RicMethod method,
                   std::uint64_t trials = 0, std::uint64_t seed = 0);

}  // namespace msbl
