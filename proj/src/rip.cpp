#include "msbl/rip.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "msbl/errors.hpp"
#include "msbl/matlib.hpp"
#include "msbl/matrix_io.hpp"
#include "msbl/rng.hpp"

namespace msbl {

std::string RicEstimate::to_csv_row() const {
    return std::to_string(order) + "," + format_double(lower) + "," + format_double(upper) +
           "," + (method == RicMethod::kExhaustive ? "exhaustive" : "randomized") + "," +
           std::to_string(trials);
}

namespace {

// max(lmax(G) - 1, 1 - lmin(G)) for the Gram matrix of the selected columns
double support_excursion(const Eigen::MatrixXd& a, const std::vector<int>& s) {
    const int k = static_cast<int>(s.size());
    Eigen::MatrixXd sub(a.rows(), k);
    for (int j = 0; j < k; ++j) sub.col(j) = a.col(s[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.transpose() * sub,
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    return std::max(lmax - 1.0, 1.0 - lmin);
}

}  // namespace

RicEstimate ric_exhaustive(const Eigen::MatrixXd& a, int k, std::uint64_t budget) {
    const int n = static_cast<int>(a.cols());
    if (k < 1 || k > n) throw std::invalid_argument("ric_exhaustive: bad order k");
    if (binomial(n, k) > budget)
        throw capacity_error("ric_exhaustive: C(" + std::to_string(n) + "," + std::to_string(k) +
                             ") exceeds budget " + std::to_string(budget));
    double delta = 0.0;
    for_each_subset(n, k, [&](const std::vector<int>& s) {
        delta = std::max(delta, support_excursion(a, s));
        return true;
    });
    delta = std::max(delta, 0.0);
    return RicEstimate{k, delta, delta, RicMethod::kExhaustive, 0};
}

RicEstimate ric_randomized(const Eigen::MatrixXd& a, int k, std::uint64_t trials,
                           std::uint64_t seed) {
    const int n = static_cast<int>(a.cols());
    if (k < 1 || k > n) throw std::invalid_argument("ric_randomized: bad order k");
    if (trials < 1) throw std::invalid_argument("ric_randomized: trials < 1");

    // When the trial count covers the whole subset family, enumerate instead
    // of sampling so the estimate coincides with the exhaustive value.
    if (binomial(n, k) <= trials) {
        RicEstimate est = ric_exhaustive(a, k);
        est.method = RicMethod::kRandomized;
        est.trials = trials;
        est.upper = 1.0;
        return est;
    }

    Rng rng(seed);
    std::vector<int> perm(n), s(k);
    double lower = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = 0; i < k; ++i)
            std::swap(perm[i], perm[i + static_cast<int>(rng.uniform_index(n - i))]);
        s.assign(perm.begin(), perm.begin() + k);
        lower = std::max(lower, support_excursion(a, s));
    }
    return RicEstimate{k, std::max(lower, 0.0), 1.0, RicMethod::kRandomized, trials};
}

RicEstimate kr_ric(const Eigen::MatrixXd& a, int k, RicMethod method, std::uint64_t trials,
                   std::uint64_t seed) {
    const Eigen::MatrixXd kr = self_khatri_rao(a);
    if (method == RicMethod::kExhaustive) return ric_exhaustive(kr, k);
    return ric_randomized(kr, k, trials, seed);
}

}  // namespace msbl
