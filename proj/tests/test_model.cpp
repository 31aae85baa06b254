#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <map>

#include "msbl/matlib.hpp"
#include "msbl/model.hpp"

using namespace msbl;

namespace {

SourceSpec base_spec(int n, int k, double gmin = 1.0, double gmax = 1.0) {
    SourceSpec s;
    s.n = n;
    s.max_support_size = k;
    s.gamma_min = gmin;
    s.gamma_max = gmax;
    return s;
}

}  // namespace

TEST_CASE("unit-column sampling yields exactly normalized columns") {
    const Eigen::MatrixXd a = sample_gaussian_matrix(6, 14, MatrixNormalization::kUnitColumns, 5);
    for (int j = 0; j < a.cols(); ++j) CHECK(std::abs(a.col(j).norm() - 1.0) < 1e-12);
}

TEST_CASE("matrix sampling is seed-deterministic") {
    const Eigen::MatrixXd a = sample_gaussian_matrix(5, 9, MatrixNormalization::kIidScaled, 77);
    const Eigen::MatrixXd b = sample_gaussian_matrix(5, 9, MatrixNormalization::kIidScaled, 77);
    const Eigen::MatrixXd c = sample_gaussian_matrix(5, 9, MatrixNormalization::kIidScaled, 78);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("iid_scaled entries have second moment 1/sqrt(m)") {
    // m = 4: per-entry variance 1/sqrt(4) = 0.5
    const int m = 4;
    const int n = 250000;  // one million entries total
    const Eigen::MatrixXd a = sample_gaussian_matrix(m, n, MatrixNormalization::kIidScaled, 11);
    const double mean_sq = a.array().square().mean();
    CHECK(mean_sq == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("fixed support with unit variance interval gives a binary gamma") {
    SourceSpec s = base_spec(8, 3);
    s.support = {2, 5};
    const SourceSpec r = sample_source(s, SupportPolicy::kFixed, 4);
    CHECK(r.support == std::vector<int>{2, 5});
    for (int i = 0; i < r.n; ++i) {
        const bool on = (i == 2 || i == 5);
        CHECK(r.gamma_star(i) == (on ? 1.0 : 0.0));
    }
}

TEST_CASE("uniform support hits each index at the right frequency") {
    const int n = 10, k = 3, draws = 10000;
    std::vector<int> counts(n, 0);
    SourceSpec s = base_spec(n, k);
    for (int t = 0; t < draws; ++t) {
        const SourceSpec r = sample_source(s, SupportPolicy::kUniformRandom, 1000 + t);
        REQUIRE(static_cast<int>(r.support.size()) == k);
        CHECK(std::is_sorted(r.support.begin(), r.support.end()));
        for (int idx : r.support) counts[idx]++;
    }
    for (int i = 0; i < n; ++i) {
        const double freq = static_cast<double>(counts[i]) / draws;
        CHECK(freq == doctest::Approx(0.3).epsilon(0.07));  // within ~2 points of 30%
    }
}

TEST_CASE("nonzero variances land inside the configured interval") {
    SourceSpec s = base_spec(12, 4, 0.5, 2.0);
    for (int t = 0; t < 50; ++t) {
        const SourceSpec r = sample_source(s, SupportPolicy::kUniformRandom, 300 + t);
        for (int idx : r.support) {
            CHECK(r.gamma_star(idx) >= 0.5);
            CHECK(r.gamma_star(idx) <= 2.0);
        }
    }
}

TEST_CASE("all-zero gamma with zero noise gives exactly zero observations") {
    SourceSpec s = base_spec(6, 0);
    const SourceSpec r = sample_source(s, SupportPolicy::kFixed, 9);
    const Eigen::MatrixXd a = sample_gaussian_matrix(4, 6, MatrixNormalization::kUnitColumns, 9);
    const MmvInstance inst = synthesize_mmv(r, a, 7, 0.0, 12);
    CHECK(inst.y.cwiseAbs().maxCoeff() == 0.0);
    CHECK(inst.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noiseless observations lie exactly in the span of the active columns") {
    SourceSpec s = base_spec(9, 3);
    s.support = {1, 4, 7};
    const SourceSpec r = sample_source(s, SupportPolicy::kFixed, 21);
    const Eigen::MatrixXd a = sample_gaussian_matrix(5, 9, MatrixNormalization::kUnitColumns, 22);
    const MmvInstance inst = synthesize_mmv(r, a, 20, 0.0, 23);

    // rows outside the support are exactly zero
    for (int i = 0; i < 9; ++i) {
        if (i == 1 || i == 4 || i == 7) continue;
        CHECK(inst.x.row(i).cwiseAbs().maxCoeff() == 0.0);
    }
    // y reproduces A_S x_S bit for bit because untouched rows contribute nothing
    CHECK((inst.y - a * inst.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-source sample covariance matches the rank-one model") {
    // A = [1;1], gamma* = 1, sigma2 = 0: population covariance is all-ones.
    Eigen::MatrixXd a(2, 1);
    a << 1, 1;
    SourceSpec s = base_spec(1, 1);
    s.support = {0};
    const SourceSpec r = sample_source(s, SupportPolicy::kFixed, 2);
    const int big_l = 100000;
    const MmvInstance inst = synthesize_mmv(r, a, big_l, 0.0, 3);
    const Eigen::MatrixXd ry = inst.y * inst.y.transpose() / big_l;
    Eigen::MatrixXd expect(2, 2);
    expect << 1, 1, 1, 1;
    CHECK((ry - expect).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("sample covariance converges to the model covariance in spectral norm") {
    SourceSpec s = base_spec(8, 3, 0.5, 2.0);
    const SourceSpec r = sample_source(s, SupportPolicy::kUniformRandom, 31);
    const Eigen::MatrixXd a = sample_gaussian_matrix(5, 8, MatrixNormalization::kUnitColumns, 32);
    const double sigma2 = 0.1;
    const int big_l = 100000;
    const MmvInstance inst = synthesize_mmv(r, a, big_l, sigma2, 33);

    const Eigen::MatrixXd ry = inst.y * inst.y.transpose() / big_l;
    const Eigen::MatrixXd model = sigma_gamma(a, r.gamma_star, sigma2).matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diff(ry - model, Eigen::EigenvaluesOnly);
    const double err = diff.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(model, Eigen::EigenvaluesOnly);
    CHECK(err < 0.05 * ref.eigenvalues().cwiseAbs().maxCoeff());
}

TEST_CASE("active source rows carry their configured variance") {
    SourceSpec s = base_spec(6, 2, 0.5, 2.0);
    s.support = {0, 3};
    const SourceSpec r = sample_source(s, SupportPolicy::kFixed, 41);
    const Eigen::MatrixXd a = sample_gaussian_matrix(4, 6, MatrixNormalization::kUnitColumns, 42);
    const int big_l = 20000;
    const MmvInstance inst = synthesize_mmv(r, a, big_l, 0.0, 43);
    for (int idx : r.support) {
        const double var = inst.x.row(idx).array().square().mean();
        CHECK(var == doctest::Approx(r.gamma_star(idx)).epsilon(0.1));
    }
}

TEST_CASE("source spec validation rejects inconsistent inputs") {
    SourceSpec s = base_spec(5, 2);
    s.support = {1, 7};  // out of range
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    SourceSpec t = base_spec(5, 1);
    t.support = {0, 1};  // larger than K
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);

    SourceSpec u = base_spec(5, 2, 2.0, 1.0);  // empty variance interval
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}
