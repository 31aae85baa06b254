#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "msbl/bounds.hpp"
#include "msbl/matlib.hpp"
#include "msbl/model.hpp"
#include "msbl/rip.hpp"
#include "msbl/rng.hpp"
#include "msbl/solvers.hpp"

using namespace msbl;

TEST_CASE("eta unit plug-in on the identity dictionary") {
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    const EtaResult r = eta_exponent(i2, 1, 1.0, 1.0, 1.0, 0.0, SupMode::kExact);
    // (1/8) (1/2)^2 * 1 / (1 * 1 * 1) = 1/32
    CHECK(r.eta == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(r.sup_term == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.vacuous == false);
    // relaxed sup sqrt(1+0) sqrt(2) is looser, so the closed form is smaller
    CHECK(r.eta_lb == doctest::Approx(0.03125 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.eta >= r.eta_lb);
}

TEST_CASE("eta collapses to the vacuous certificate when the constant reaches one") {
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    const EtaResult r = eta_exponent(i2, 1, 1.0, 1.0, 1.0, 1.0, SupMode::kExact);
    CHECK(r.vacuous == true);
    CHECK(r.eta <= 0.0);
}

TEST_CASE("exact eta dominates the relaxed closed form on random dictionaries") {
    for (int t = 0; t < 20; ++t) {
        const Eigen::MatrixXd a =
            sample_gaussian_matrix(6, 10, MatrixNormalization::kUnitColumns, 100 + t);
        const double d = kr_ric(a, 4, RicMethod::kExhaustive).lower;
        if (d >= 1.0) continue;
        const EtaResult exact = eta_exponent(a, 2, 0.1, 0.5, 2.0, d, SupMode::kExact);
        const EtaResult relaxed = eta_exponent(a, 2, 0.1, 0.5, 2.0, d, SupMode::kRipRelaxed);
        CHECK(exact.eta >= relaxed.eta - 1e-12);
    }
}

TEST_CASE("lipschitz bound unit plug-in") {
    CHECK(lipschitz_bound(1, 1, 1.0, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(lipschitz_bound(1, 1, 1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lipschitz_bound(10, 3, 0.5, 0.1, 2.0) ==
          doctest::Approx((10.0 * 3.0 / 0.5) * (1.0 + 2.0 / 0.1)).epsilon(1e-12));
}

TEST_CASE("lipschitz bound controls likelihood differences over a fixed support") {
    const Eigen::MatrixXd a =
        sample_gaussian_matrix(5, 9, MatrixNormalization::kUnitColumns, 200);
    const int K = 3, num_mmv = 15;
    const double sigma2 = 0.2, gmin = 0.3, gmax = 2.0;

    SourceSpec spec;
    spec.n = 9;
    spec.max_support_size = K;
    spec.support = {1, 4, 6};
    const SourceSpec src = sample_source(spec, SupportPolicy::kFixed, 201);
    const MmvInstance inst = synthesize_mmv(src, a, num_mmv, sigma2, 202);
    const Eigen::MatrixXd ry = inst.y * inst.y.transpose() / num_mmv;
    const double bound =
        lipschitz_bound(num_mmv, K, gmin, sigma2, spectral_norm_sym(ry));

    Rng rng(203);
    for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd g1 = Eigen::VectorXd::Zero(9), g2 = Eigen::VectorXd::Zero(9);
        for (int idx : spec.support) {
            g1(idx) = gmin + (gmax - gmin) * rng.uniform();
            g2(idx) = gmin + (gmax - gmin) * rng.uniform();
        }
        const double lhs =
            std::abs(loglik(inst.y, a, g2, sigma2) - loglik(inst.y, a, g1, sigma2));
        const double dist = (g2 - g1).cwiseAbs().maxCoeff();
        CHECK(lhs <= bound * dist + 1e-9);
    }
}

TEST_CASE("covering-number exponent hand values") {
    // degenerate variance interval: inner term vanishes, log max{1, .} = 0
    CHECK(kappa_cov_bound_log(3, 1.0, 1.0, 0.5, 0.2, 1.0) == 0.0);
    // tiny interval: inner term below one is clipped to zero as well
    CHECK(kappa_cov_bound_log(2, 1.0, 1.0 + 1e-9, 1.0, 0.0, 1.0) == 0.0);
    // K=1, sigma2=1, gamma in [1,2], delta=0, a*=1:
    // zeta = 48 sqrt2 * 1 * 9 * 7, kappa = log(zeta)
    const double zeta = 48.0 * std::sqrt(2.0) * 9.0 * 7.0;
    CHECK(kappa_cov_bound_log(1, 1.0, 2.0, 1.0, 0.0, 1.0) ==
          doctest::Approx(std::log(zeta)).epsilon(1e-12));
    CHECK(kappa_cov_bound_log(1, 1.0, 2.0, 1.0, 0.0, 1.0) ==
          doctest::Approx(8.36091).epsilon(1e-4));
    CHECK_THROWS_AS(kappa_cov_bound_log(1, 1.0, 2.0, 0.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("sufficient MMV count, theorem plug-in") {
    const double eta = 0.03125;
    const double term = (8.0 / eta) * std::log(3.0 * M_E * 10.0 * 1.0 * 1.1 / 0.1);
    const double l = sufficient_mmv_thm3(eta, 0.0, 10, 1, 0.1);
    CHECK(l == doctest::Approx(term).epsilon(1e-12));
    CHECK(l == doctest::Approx(1740.47).epsilon(1e-3));
    // the covering exponent takes over when it dominates the log term
    CHECK(sufficient_mmv_thm3(eta, 100.0, 10, 1, 0.1) ==
          doctest::Approx((8.0 / eta) * 100.0).epsilon(1e-12));
    // the absolute-constant floor takes over for easy geometry
    CHECK(sufficient_mmv_thm3(1e9, 0.0, 10, 1, 0.1, 16.0) ==
          doctest::Approx(16.0 * std::log(20.0)).epsilon(1e-12));
    CHECK(std::isinf(sufficient_mmv_thm3(0.0, 0.0, 10, 1, 0.1)));
}

TEST_CASE("corollary-style closed form and its RIP-A refinement") {
    const double log_term = std::log(3.0 * M_E * 10.0 * 1.0 * 1.1 / 0.1);
    const double xi = 64.0 * std::sqrt(2.0) * 4.0;
    const double c2 = sufficient_mmv_c2(1, 1.0, 1.0, 1.0, 1.0, 0.0, 10, 0.1, 0.0);
    CHECK(c2 == doctest::Approx(xi * log_term).epsilon(1e-12));
    CHECK(c2 == doctest::Approx(2461.63).epsilon(1e-3));
    CHECK(std::isinf(sufficient_mmv_c2(1, 1.0, 1.0, 1.0, 1.0, 1.0, 10, 0.1, 0.0)));

    const RipASufficiency rip = sufficient_mmv_rip_a(1, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 10, 0.1);
    CHECK(rip.l_sufficient == doctest::Approx(256.0 * log_term).epsilon(1e-12));
    CHECK(rip.l_sufficient == doctest::Approx(1740.47).epsilon(1e-3));
    // with vanishing constants the refinement is the sharper threshold
    CHECK(rip.l_sufficient <= c2);
}

TEST_CASE("sufficient MMV counts move the right way with the model parameters") {
    Eigen::MatrixXd a;
    double d = 1.0;
    for (std::uint64_t seed = 300; seed < 330 && d >= 1.0; ++seed) {
        a = sample_gaussian_matrix(6, 10, MatrixNormalization::kUnitColumns, seed);
        d = kr_ric(a, 4, RicMethod::kExhaustive).lower;
    }
    REQUIRE(d < 1.0);
    auto l_for = [&](double sigma2, double gmin, double gmax) {
        const EtaResult e = eta_exponent(a, 2, sigma2, gmin, gmax, d, SupMode::kExact);
        return sufficient_mmv_thm3(e.eta, 0.0, 10, 2, 0.1);
    };
    // easier problems need fewer snapshots
    CHECK(l_for(0.1, 1.0, 1.0) <= l_for(0.1, 0.5, 1.0));   // larger gamma_min
    CHECK(l_for(0.1, 0.5, 1.0) <= l_for(0.5, 0.5, 1.0));   // smaller sigma2
    CHECK(l_for(0.1, 0.5, 1.0) <= l_for(0.1, 0.5, 4.0));   // smaller gamma_max
}

TEST_CASE("noiseless discrimination spectrum stays bounded away from zero") {
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(2), g2 = Eigen::VectorXd::Zero(2);
    g1(0) = 1.0;
    g2(1) = 1.0;
    const std::vector<double> grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    const auto curve = lambda_max_noiseless(i2, g1, g2, grid);
    REQUIRE(curve.size() == grid.size());
    std::vector<double> scaled;
    for (const auto& [s2, lmax] : curve) {
        CHECK(s2 * lmax > 0.0);
        scaled.push_back(s2 * lmax);
    }
    // the product stabilizes: the last three grid points agree within 2x
    const double lo = std::min({scaled[4], scaled[5], scaled[6]});
    const double hi = std::max({scaled[4], scaled[5], scaled[6]});
    CHECK(hi <= 2.0 * lo);
    // scalar sanity: sigma2 * lambda_max -> gamma as sigma2 -> 0
    CHECK(scaled[6] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("bounds report assembles finite certificates and honors sentinels") {
    const Eigen::MatrixXd a =
        sample_gaussian_matrix(6, 10, MatrixNormalization::kUnitColumns, 400);
    const double d_kr = kr_ric(a, 4, RicMethod::kExhaustive).lower;
    const double d_a = ric_exhaustive(a, 4).lower;

    const BoundsReport rep =
        make_bounds_report(a, 2, 0.1, 0.5, 2.0, 0.1, d_kr, d_a, SupMode::kExact);
    CHECK(rep.n == 10);
    CHECK(rep.K == 2);
    CHECK(rep.ric_kr_2k == d_kr);
    if (d_kr < 1.0) {
        CHECK(rep.eta > 0.0);
        CHECK(std::isfinite(rep.l_sufficient_thm3));
        CHECK(rep.l_sufficient_thm3 > 0.0);
    }
    CHECK(rep.lipschitz_per_mmv > 0.0);

    const BoundsReport vac =
        make_bounds_report(a, 2, 0.1, 0.5, 2.0, 0.1, 1.0, d_a, SupMode::kRipRelaxed);
    CHECK(std::isinf(vac.l_sufficient_thm3));
    CHECK(std::isinf(vac.l_sufficient_c2));

    // header and row stay column-aligned
    const std::string header = BoundsReport::csv_header();
    const std::string row = rep.to_csv_row();
    CHECK(std::count(header.begin(), header.end(), ',') ==
          std::count(row.begin(), row.end(), ','));
}
