#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "msbl/divergence.hpp"
#include "msbl/errors.hpp"
#include "msbl/matlib.hpp"
#include "msbl/model.hpp"
#include "msbl/rip.hpp"
#include "msbl/rng.hpp"
#include "msbl/solvers.hpp"

using namespace msbl;

namespace {

Eigen::MatrixXd random_spd(int m, Rng& rng, double ridge = 0.5) {
    Eigen::MatrixXd b(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) b(i, j) = rng.gaussian();
    return b * b.transpose() / m + ridge * Eigen::MatrixXd::Identity(m, m);
}

Eigen::MatrixXd scalar(double v) {
    Eigen::MatrixXd s(1, 1);
    s(0, 0) = v;
    return s;
}

}  // namespace

TEST_CASE("logdet_bregman vanishes on identical arguments") {
    Rng rng(1);
    for (int t = 0; t < 10; ++t) {
        const Eigen::MatrixXd s = random_spd(3, rng);
        CHECK(std::abs(logdet_bregman(s, s)) < 1e-12);
    }
}

TEST_CASE("logdet_bregman hand value for (2I, I)") {
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    const double d = logdet_bregman(2.0 * i2, i2);
    CHECK(d == doctest::Approx(4.0 - std::log(4.0) - 2.0).epsilon(1e-12));
    CHECK(d == doctest::Approx(0.6137056388801094).epsilon(1e-12));
}

TEST_CASE("logdet_bregman is nonnegative on random SPD pairs") {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        const Eigen::MatrixXd x = random_spd(4, rng);
        const Eigen::MatrixXd y = random_spd(4, rng);
        CHECK(logdet_bregman(x, y) >= -1e-12);
    }
}

TEST_CASE("logdet_bregman differences reproduce log-likelihood differences") {
    // -L * D(R_Y, Sigma_g) differs from loglik(Y, g) by a gamma-independent
    // constant, so divergence gaps must match likelihood gaps.
    Rng rng(3);
    const Eigen::MatrixXd a = sample_gaussian_matrix(4, 8, MatrixNormalization::kUnitColumns, 3);
    const int num_mmv = 12;
    Eigen::MatrixXd y(4, num_mmv);
    for (int j = 0; j < num_mmv; ++j)
        for (int i = 0; i < 4; ++i) y(i, j) = rng.gaussian();
    const Eigen::MatrixXd ry = y * y.transpose() / num_mmv;
    const double sigma2 = 0.3;

    for (int t = 0; t < 25; ++t) {
        Eigen::VectorXd g1(8), g2(8);
        for (int i = 0; i < 8; ++i) g1(i) = rng.uniform();
        for (int i = 0; i < 8; ++i) g2(i) = rng.uniform();
        const Eigen::MatrixXd s1 = sigma_gamma(a, g1, sigma2).matrix;
        const Eigen::MatrixXd s2 = sigma_gamma(a, g2, sigma2).matrix;
        const double lhs = -num_mmv * (logdet_bregman(ry, s1) - logdet_bregman(ry, s2));
        const double rhs = loglik(y, a, g1, sigma2) - loglik(y, a, g2, sigma2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("renyi_gaussian vanishes on identical covariances") {
    Rng rng(4);
    const Eigen::MatrixXd s = random_spd(3, rng);
    CHECK(std::abs(renyi_gaussian({s, s}, 0.5)) < 1e-12);
    CHECK(std::abs(renyi_gaussian({s, s}, 0.25)) < 1e-12);
}

TEST_CASE("renyi_gaussian scalar hand value at alpha one half") {
    // sigma1 = 1, sigma2 = 2: D_1/2 = log(1.5 / sqrt(2))
    const double d = renyi_gaussian({scalar(1.0), scalar(2.0)}, 0.5);
    CHECK(d == doctest::Approx(std::log(1.5 / std::sqrt(2.0))).epsilon(1e-12));
    CHECK(d == doctest::Approx(0.05889151782819171).epsilon(1e-10));
}

TEST_CASE("renyi_gaussian is symmetric at alpha one half") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const Eigen::MatrixXd s1 = random_spd(3, rng);
        const Eigen::MatrixXd s2 = random_spd(3, rng);
        CHECK(renyi_gaussian({s1, s2}, 0.5) ==
              doctest::Approx(renyi_gaussian({s2, s1}, 0.5)).epsilon(1e-10));
    }
}

TEST_CASE("closed form matches the quadrature oracle in dimension one") {
    Rng rng(6);
    const double alphas[] = {0.25, 0.5, 0.75};
    for (int t = 0; t < 100; ++t) {
        const double v1 = 0.2 + 3.0 * rng.uniform();
        const double v2 = 0.2 + 3.0 * rng.uniform();
        const GaussianPair pair{scalar(v1), scalar(v2)};
        for (double alpha : alphas) {
            const double closed = renyi_gaussian(pair, alpha);
            const double oracle = renyi_quadrature_oracle(pair, alpha);
            CHECK(std::abs(closed - oracle) < 1e-6 * std::max(1.0, std::abs(closed)));
        }
    }
}

TEST_CASE("closed form matches the quadrature oracle in dimension two") {
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        const GaussianPair pair{random_spd(2, rng), random_spd(2, rng)};
        const double closed = renyi_gaussian(pair, 0.5);
        const double oracle = renyi_quadrature_oracle(pair, 0.5);
        CHECK(std::abs(closed - oracle) < 1e-6 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("quadrature oracle refuses dimensions above two") {
    Rng rng(8);
    const GaussianPair pair{random_spd(3, rng), random_spd(3, rng)};
    CHECK_THROWS_AS(renyi_quadrature_oracle(pair, 0.5), capacity_error);
}

TEST_CASE("eigenform agrees with the closed form at alpha one half") {
    const RenyiHalfEigenform scalar_case = renyi_half_eigenform({scalar(1.0), scalar(2.0)});
    // single eigenvalue lambda = 1/2: log((sqrt(l)+1/sqrt(l))/2)
    CHECK(scalar_case.eigvals.size() == 1);
    CHECK(scalar_case.eigvals(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(scalar_case.value == doctest::Approx(0.05889151782819171).epsilon(1e-10));

    Rng rng(9);
    for (int m = 1; m <= 8; ++m) {
        for (int t = 0; t < 20; ++t) {
            const GaussianPair pair{random_spd(m, rng), random_spd(m, rng)};
            const double closed = renyi_gaussian(pair, 0.5);
            const RenyiHalfEigenform eig = renyi_half_eigenform(pair);
            CHECK(std::abs(closed - eig.value) < 1e-10 * std::max(1.0, std::abs(closed)));
        }
    }
}

TEST_CASE("strong convexity constant hand values for the identity dictionary") {
    const Eigen::MatrixXd i3 = Eigen::MatrixXd::Identity(3, 3);
    // gamma_max = 1, sigma2 = 1: worst Sigma is I + I_S, Hadamard square norm 4
    CHECK(strong_convexity_constant(i3, 1.0, 1.0, 1, SupSearch::kExhaustive) ==
          doctest::Approx(0.25).epsilon(1e-12));
    // gamma_max = 0: Sigma = sigma2 I, constant 1/sigma2^2
    CHECK(strong_convexity_constant(i3, 2.0, 0.0, 1, SupSearch::kExhaustive) ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK(strong_convexity_constant(i3, 1.0, 0.0, 1, SupSearch::kExhaustive) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("randomized support search never exceeds the exhaustive constant") {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const Eigen::MatrixXd a =
            sample_gaussian_matrix(4, 8, MatrixNormalization::kUnitColumns, 500 + t);
        const double exact = strong_convexity_constant(a, 0.5, 1.5, 2, SupSearch::kExhaustive);
        const double sampled =
            strong_convexity_constant(a, 0.5, 1.5, 2, SupSearch::kRandomized, 50, 600 + t);
        CHECK(sampled >= exact - 1e-12);
    }
}

TEST_CASE("Hessian quadratic form dominates the strong convexity constant") {
    // tr(S_t^-1 dS S_t^-1 dS) >= m_psi ||dS||_F^2 along the segment between
    // two admissible covariances, checked at both endpoints and the midpoint.
    const Eigen::MatrixXd a = sample_gaussian_matrix(4, 8, MatrixNormalization::kUnitColumns, 55);
    const double sigma2 = 0.5, gamma_max = 1.0;
    const int K = 1;
    const double m_psi = strong_convexity_constant(a, sigma2, gamma_max, K, SupSearch::kExhaustive);

    Rng rng(56);
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd g1 = Eigen::VectorXd::Zero(8), g2 = Eigen::VectorXd::Zero(8);
        g1(static_cast<int>(rng.uniform_index(8))) = gamma_max * rng.uniform();
        g2(static_cast<int>(rng.uniform_index(8))) = gamma_max * rng.uniform();
        const Eigen::MatrixXd s1 = sigma_gamma(a, g1, sigma2).matrix;
        const Eigen::MatrixXd s2 = sigma_gamma(a, g2, sigma2).matrix;
        const Eigen::MatrixXd ds = s2 - s1;
        const double norm2 = ds.squaredNorm();
        if (norm2 < 1e-20) continue;
        for (double w : {0.0, 0.5, 1.0}) {
            const Eigen::MatrixXd st = (1.0 - w) * s1 + w * s2;
            const Eigen::MatrixXd inv_ds = st.llt().solve(ds);
            const double quad = (inv_ds * inv_ds).trace();
            CHECK(quad >= m_psi * norm2 - 1e-9 * norm2);
        }
        ++checked;
    }
    CHECK(checked > 900);
}

TEST_CASE("m_star over convex combinations, scalar pair") {
    // lambda_max of (1-t) + 2t peaks at 2, so m* = 1/4
    CHECK(m_star_convex_combinations({scalar(1.0), scalar(2.0)}) ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Renyi divergence dominates the quadratic lower bound") {
    Rng rng(11);
    for (int t = 0; t < 1000; ++t) {
        const int m = 2 + static_cast<int>(rng.uniform_index(3));
        const GaussianPair pair{random_spd(m, rng), random_spd(m, rng)};
        const double alpha = 0.05 + 0.9 * rng.uniform();
        const double m_star = m_star_convex_combinations(pair);
        const double lb = renyi_lower_bound_thm1(pair, alpha, m_star);
        const double d = renyi_gaussian(pair, alpha);
        CHECK(d >= lb - 1e-10 * std::max(1.0, std::abs(d)));
    }
}

TEST_CASE("thm1 scalar plug-in value") {
    const GaussianPair pair{scalar(1.0), scalar(2.0)};
    const double lb = renyi_lower_bound_thm1(pair, 0.5, 0.25);
    CHECK(lb == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(lb <= renyi_gaussian(pair, 0.5));
}

TEST_CASE("prop4 vanishes for identical variance vectors") {
    const Eigen::MatrixXd a = sample_gaussian_matrix(4, 8, MatrixNormalization::kUnitColumns, 60);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(8);
    g(1) = 1.0;
    const Prop4Bound b = renyi_lower_bound_prop4(a, g, g, 1.0, 1, 0.5, 0.0);
    CHECK(b.k_d == 0);
    CHECK(b.value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("prop4 unit plug-in evaluates to 1/32") {
    // Identity dictionary, K = 1, unit variances, sigma2 = 1, delta = 0:
    // one active row differs, a* = 1, sup term 1, so the bound is
    // (alpha/4) (1/2)^2 * 1 / 1 = 1/32 at alpha = 1/2.
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(2), g2 = Eigen::VectorXd::Zero(2);
    g1(0) = 1.0;
    const Prop4Bound b = renyi_lower_bound_prop4(i2, g1, g2, 1.0, 1, 0.5, 0.0);
    CHECK(b.k_d == 1);
    CHECK(b.value == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(b.vacuous == false);
}

TEST_CASE("prop4 is vacuous when the Khatri-Rao constant reaches one") {
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(2), g2 = Eigen::VectorXd::Zero(2);
    g1(0) = 1.0;
    const Prop4Bound b = renyi_lower_bound_prop4(i2, g1, g2, 1.0, 1, 0.5, 1.0);
    CHECK(b.vacuous == true);
    CHECK(b.value <= 0.0);
}

TEST_CASE("prop4 lower-bounds the actual divergence of the induced pair") {
    const Eigen::MatrixXd a = sample_gaussian_matrix(6, 10, MatrixNormalization::kUnitColumns, 70);
    const int K = 2;
    const double sigma2 = 1.0, gmin = 0.5, gmax = 2.0;
    const double delta = kr_ric(a, std::min(2 * K, 10), RicMethod::kExhaustive).lower;

    Rng rng(71);
    for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd g1 = Eigen::VectorXd::Zero(10), g2 = Eigen::VectorXd::Zero(10);
        for (int pick = 0; pick < K; ++pick) {
            g1(static_cast<int>(rng.uniform_index(10))) = gmin + (gmax - gmin) * rng.uniform();
            g2(static_cast<int>(rng.uniform_index(10))) = gmin + (gmax - gmin) * rng.uniform();
        }
        const double alpha = 0.5;
        const Prop4Bound b = renyi_lower_bound_prop4(a, g1, g2, sigma2, K, alpha, delta);
        const GaussianPair pair{sigma_gamma(a, g1, sigma2).matrix,
                                sigma_gamma(a, g2, sigma2).matrix};
        const double d = renyi_gaussian(pair, alpha);
        CHECK(d >= b.value - 1e-10 * std::max(1.0, std::abs(d)));
    }
}
