#include "msbl/divergence.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "msbl/errors.hpp"
#include "msbl/matlib.hpp"
#include "msbl/rng.hpp"

namespace msbl {

namespace {

// Cholesky with SPD check; also yields log-determinant.
Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& a, const char* who) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::domain_error(std::string(who) + ": matrix is not positive definite");
    return llt;
}

double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

double logdet_bregman(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols())
        throw std::invalid_argument("logdet_bregman: size mismatch");
    const auto llt_x = checked_llt(x, "logdet_bregman(x)");
    const auto llt_y = checked_llt(y, "logdet_bregman(y)");
    const double tr = llt_y.solve(x).trace();
    const double logratio = logdet_from_llt(llt_x) - logdet_from_llt(llt_y);
    return tr - logratio - static_cast<double>(x.rows());
}

double renyi_gaussian(const GaussianPair& pair, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("renyi_gaussian: alpha must lie in (0,1)");
    const Eigen::MatrixXd mix = (1.0 - alpha) * pair.sigma1 + alpha * pair.sigma2;
    const double ld_mix = logdet_from_llt(checked_llt(mix, "renyi_gaussian(mix)"));
    const double ld1 = logdet_from_llt(checked_llt(pair.sigma1, "renyi_gaussian(sigma1)"));
    const double ld2 = logdet_from_llt(checked_llt(pair.sigma2, "renyi_gaussian(sigma2)"));
    return (ld_mix - (1.0 - alpha) * ld1 - alpha * ld2) / (2.0 * (1.0 - alpha));
}

namespace {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

}  // namespace

double renyi_quadrature_oracle(const GaussianPair& pair, double alpha) {
    const int m = static_cast<int>(pair.sigma1.rows());
    if (m > 2) throw capacity_error("renyi_quadrature_oracle: supports m <= 2 only");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("renyi_quadrature_oracle: alpha must lie in (0,1)");
    checked_llt(pair.sigma1, "renyi_quadrature_oracle(sigma1)");
    checked_llt(pair.sigma2, "renyi_quadrature_oracle(sigma2)");

    constexpr double kTol = 1e-8;  // absolute accuracy target on the integral
    double integral = 0.0;
    if (m == 1) {
        const double v1 = pair.sigma1(0, 0), v2 = pair.sigma2(0, 0);
        const double R = 10.0 * std::sqrt(std::max(v1, v2));
        const double c1 = 1.0 / std::sqrt(2.0 * M_PI * v1);
        const double c2 = 1.0 / std::sqrt(2.0 * M_PI * v2);
        auto integrand = [&](double t) {
            const double p1 = c1 * std::exp(-0.5 * t * t / v1);
            const double p2 = c2 * std::exp(-0.5 * t * t / v2);
            return std::pow(p1, alpha) * std::pow(p2, 1.0 - alpha);
        };
        integral = adaptive_simpson(integrand, -R, R, kTol);
    } else {
        const Eigen::Matrix2d s1 = pair.sigma1, s2 = pair.sigma2;
        const Eigen::Matrix2d p1inv = s1.inverse(), p2inv = s2.inverse();
        const double c1 = 1.0 / (2.0 * M_PI * std::sqrt(s1.determinant()));
        const double c2 = 1.0 / (2.0 * M_PI * std::sqrt(s2.determinant()));
        const double R =
            10.0 * std::sqrt(std::max(spectral_norm_sym(s1), spectral_norm_sym(s2)));
        auto integrand2 = [&](double u, double v) {
            const Eigen::Vector2d t(u, v);
            const double p1 = c1 * std::exp(-0.5 * t.dot(p1inv * t));
            const double p2 = c2 * std::exp(-0.5 * t.dot(p2inv * t));
            return std::pow(p1, alpha) * std::pow(p2, 1.0 - alpha);
        };
        auto outer = [&](double u) {
            return adaptive_simpson([&](double v) { return integrand2(u, v); }, -R, R,
                                    kTol * 1e-2);
        };
        integral = adaptive_simpson(outer, -R, R, kTol);
    }
    return std::log(integral) / (alpha - 1.0);
}

RenyiHalfEigenform renyi_half_eigenform(const GaussianPair& pair) {
    checked_llt(pair.sigma2, "renyi_half_eigenform(sigma2)");
    const Eigen::MatrixXd s1_half = symmetric_sqrt(pair.sigma1);
    Eigen::MatrixXd h = s1_half * pair.sigma2.llt().solve(s1_half);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw numerical_error("renyi_half_eigenform: eigensolver failed");
    RenyiHalfEigenform out;
    out.eigvals = es.eigenvalues();
    double v = 0.0;
    for (Eigen::Index i = 0; i < out.eigvals.size(); ++i) {
        const double l = out.eigvals(i);
        if (l <= 0.0) throw std::domain_error("renyi_half_eigenform: nonpositive eigenvalue");
        v += std::log(0.5 * (std::sqrt(l) + 1.0 / std::sqrt(l)));
    }
    out.value = v;
    return out;
}

namespace {

double hadamard_square_spectral_norm(const Eigen::MatrixXd& s) {
    return spectral_norm_sym(s.cwiseProduct(s));
}

double sup_sigma_hadamard_over_supports(const Eigen::MatrixXd& a, double sigma2,
                                        double gamma_max, int order, SupSearch search,
                                        int trials, std::uint64_t seed) {
    const int n = static_cast<int>(a.cols());
    const int k = std::min(order, n);
    const Eigen::Index m = a.rows();
    auto eval_support = [&](const std::vector<int>& s) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(m, m) * sigma2;
        for (int j : s) cov.noalias() += gamma_max * a.col(j) * a.col(j).transpose();
        return hadamard_square_spectral_norm(cov);
    };
    double sup = sigma2 * sigma2;  // empty support: Sigma = sigma2*I
    if (gamma_max == 0.0 || k == 0) return sup;
    if (search == SupSearch::kExhaustive) {
        constexpr std::uint64_t kBudget = 200000;
        if (binomial(n, k) > kBudget)
            throw capacity_error("strong_convexity_constant: C(n,2K) exceeds exhaustive budget");
        for_each_subset(n, k, [&](const std::vector<int>& s) {
            sup = std::max(sup, eval_support(s));
            return true;
        });
    } else {
        Rng rng(seed);
        std::vector<int> s(k);
        for (int t = 0; t < trials; ++t) {
            // uniform size-k subset via partial Fisher-Yates
            std::vector<int> perm(n);
            for (int i = 0; i < n; ++i) perm[i] = i;
            for (int i = 0; i < k; ++i)
                std::swap(perm[i], perm[i + rng.uniform_index(n - i)]);
            s.assign(perm.begin(), perm.begin() + k);
            sup = std::max(sup, eval_support(s));
        }
    }
    return sup;
}

}  // namespace

double strong_convexity_constant(const Eigen::MatrixXd& a, double sigma2, double gamma_max,
                                 int K, SupSearch search, int trials, std::uint64_t seed) {
    if (sigma2 < 0.0 || gamma_max < 0.0)
        throw std::invalid_argument("strong_convexity_constant: negative sigma2 or gamma_max");
    if (K < 0) throw std::invalid_argument("strong_convexity_constant: K < 0");
    const double sup =
        sup_sigma_hadamard_over_supports(a, sigma2, gamma_max, 2 * K, search, trials, seed);
    if (sup <= 0.0)
        throw std::domain_error("strong_convexity_constant: degenerate covariance family");
    return 1.0 / sup;
}

double m_star_convex_combinations(const GaussianPair& pair, double grid_step) {
    double sup = 0.0;
    for (double t = 0.0; t <= 1.0 + 1e-12; t += grid_step) {
        const double tc = std::min(t, 1.0);
        const Eigen::MatrixXd mix = (1.0 - tc) * pair.sigma1 + tc * pair.sigma2;
        sup = std::max(sup, spectral_norm_sym(mix));
    }
    return 1.0 / (sup * sup);
}

double renyi_lower_bound_thm1(const GaussianPair& pair, double alpha, double m_star) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("renyi_lower_bound_thm1: alpha must lie in [0,1)");
    if (m_star <= 0.0) throw std::invalid_argument("renyi_lower_bound_thm1: m_star <= 0");
    return 0.25 * alpha * m_star * (pair.sigma2 - pair.sigma1).squaredNorm();
}

Prop4Bound renyi_lower_bound_prop4(const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma1,
                                   const Eigen::VectorXd& gamma2, double sigma2, int K,
                                   double alpha, double ric_2k_kr, bool use_rip_relaxation) {
    if (gamma1.size() != a.cols() || gamma2.size() != a.cols())
        throw std::invalid_argument("renyi_lower_bound_prop4: gamma length != A columns");
    const int n = static_cast<int>(a.cols());

    Prop4Bound out{};
    int k_d = 0;
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = 0.0;
    for (int i = 0; i < n; ++i) {
        const bool in1 = gamma1(i) != 0.0, in2 = gamma2(i) != 0.0;
        if (in1 != in2) ++k_d;
        for (double g : {gamma1(i), gamma2(i)}) {
            if (g != 0.0) {
                gmin = std::min(gmin, g);
                gmax = std::max(gmax, g);
            }
        }
    }
    out.k_d = k_d;
    if (k_d == 0) {
        out.value = 0.0;
        out.sup_term = 0.0;
        out.vacuous = false;
        return out;
    }

    const int order = std::min(2 * K, n);
    if (use_rip_relaxation) {
        out.sup_term = std::sqrt(1.0 + ric_2k_kr) * std::sqrt(2.0 * K);
    } else {
        constexpr std::uint64_t kBudget = 200000;
        if (binomial(n, order) > kBudget)
            throw capacity_error("renyi_lower_bound_prop4: C(n,2K) exceeds exhaustive budget");
        double sup = 0.0;
        for_each_subset(n, order, [&](const std::vector<int>& s) {
            Eigen::MatrixXd sub(a.rows(), order);
            for (int j = 0; j < order; ++j) sub.col(j) = a.col(s[j]);
            sup = std::max(sup, spectral_norm_sym(sub.transpose() * sub));
            return true;
        });
        out.sup_term = sup;
    }

    const double a_star = a.cwiseAbs().maxCoeff();
    const double ratio = gmin / (sigma2 + gmax);
    out.value = 0.25 * alpha * ratio * ratio * k_d * (1.0 - ric_2k_kr) /
                (K * a_star * a_star * out.sup_term);
    out.vacuous = ric_2k_kr >= 1.0;
    return out;
}

}  // namespace msbl
