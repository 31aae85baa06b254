#include "msbl/bounds.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "msbl/errors.hpp"
#include "msbl/matlib.hpp"
#include "msbl/matrix_io.hpp"

namespace msbl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double support_count_log(int n, int K, double delta) {
    // log(3 e n K (1+delta)/delta)
    return std::log(3.0 * M_E * n * K * (1.0 + delta) / delta);
}

double exact_sup_spectral(const Eigen::MatrixXd& a, int order) {
    const int n = static_cast<int>(a.cols());
    const int k = std::min(order, n);
    constexpr std::uint64_t kBudget = 200000;
    if (binomial(n, k) > kBudget)
        throw capacity_error("eta_exponent: exhaustive 2K-submatrix sup exceeds budget");
    double sup = 0.0;
    for_each_subset(n, k, [&](const std::vector<int>& s) {
        Eigen::MatrixXd sub(a.rows(), k);
        for (int j = 0; j < k; ++j) sub.col(j) = a.col(s[j]);
        sup = std::max(sup, spectral_norm_sym(sub.transpose() * sub));
        return true;
    });
    return sup;
}

}  // namespace

EtaResult eta_exponent(const Eigen::MatrixXd& a, int K, double sigma2, double gamma_min,
                       double gamma_max, double ric_kr_2k, SupMode sup_mode) {
    if (K < 1) throw std::invalid_argument("eta_exponent: K < 1");
    if (!(gamma_min > 0.0 && gamma_min <= gamma_max))
        throw std::invalid_argument("eta_exponent: need 0 < gamma_min <= gamma_max");
    EtaResult out;
    out.vacuous = ric_kr_2k >= 1.0;

    const double a_star = a.cwiseAbs().maxCoeff();
    const double ratio = gamma_min / (sigma2 + gamma_max);
    out.sup_term = (sup_mode == SupMode::kExact)
                       ? exact_sup_spectral(a, 2 * K)
                       : std::sqrt(1.0 + ric_kr_2k) * std::sqrt(2.0 * K);
    out.eta = 0.125 * ratio * ratio * (1.0 - ric_kr_2k) / (K * a_star * a_star * out.sup_term);
    out.eta_lb = ratio * ratio * (1.0 - ric_kr_2k) /
                 (8.0 * std::sqrt(2.0) * std::pow(static_cast<double>(K), 1.5) * a_star *
                  a_star * std::sqrt(1.0 + ric_kr_2k));
    return out;
}

double lipschitz_bound(int num_mmv, int K, double gamma_min, double sigma2,
                       double spec_norm_ry) {
    if (num_mmv < 1 || K < 1 || gamma_min <= 0.0 || sigma2 <= 0.0 || spec_norm_ry < 0.0)
        throw std::invalid_argument("lipschitz_bound: inputs must be positive");
    return (static_cast<double>(num_mmv) * K / gamma_min) * (1.0 + spec_norm_ry / sigma2);
}

double kappa_cov_bound_log(int K, double gamma_min, double gamma_max, double sigma2,
                           double ric_kr_2k, double a_star) {
    if (!(ric_kr_2k >= 0.0 && ric_kr_2k < 1.0))
        throw std::invalid_argument("kappa_cov_bound_log: ric must lie in [0,1)");
    if (gamma_max == gamma_min) return 0.0;  // the net collapses to a single point
    if (sigma2 == 0.0)
        throw std::domain_error("kappa_cov_bound_log: undefined for sigma2 == 0");
    const double zeta = 48.0 * std::sqrt(2.0) * ((1.0 + ric_kr_2k) / (1.0 - ric_kr_2k)) *
                        std::pow((sigma2 + gamma_max) / gamma_min, 2) *
                        ((3.0 * sigma2 + 2.0 * gamma_max) / gamma_min);
    const double inner = std::pow(static_cast<double>(K), 3.5) * a_star * a_star * zeta *
                         (gamma_max - gamma_min) / sigma2;
    return K * std::max(0.0, std::log(inner));
}

double sufficient_mmv_thm3(double eta, double kappa_cov_log, int n, int K, double delta,
                           double c_abs) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("sufficient_mmv_thm3: delta not in (0,1)");
    if (c_abs <= 0.0) throw std::invalid_argument("sufficient_mmv_thm3: C_abs <= 0");
    if (eta <= 0.0) return kInf;
    const double t1 = (8.0 / eta) * support_count_log(n, K, delta);
    const double t2 = (8.0 / eta) * kappa_cov_log;
    const double t3 = c_abs * std::log(2.0 / delta);
    return std::max({t1, t2, t3});
}

double sufficient_mmv_c2(int K, double a_star, double sigma2, double gamma_min,
                         double gamma_max, double ric_kr_2k, int n, double delta,
                         double kappa_cov_log) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("sufficient_mmv_c2: delta not in (0,1)");
    if (ric_kr_2k >= 1.0) return kInf;
    const double xi = 64.0 * std::sqrt(2.0) * std::pow((sigma2 + gamma_max) / gamma_min, 2) *
                      std::sqrt(1.0 + ric_kr_2k) / (1.0 - ric_kr_2k);
    return std::pow(static_cast<double>(K), 1.5) * a_star * a_star * xi *
           std::max(support_count_log(n, K, delta), kappa_cov_log);
}

RipASufficiency sufficient_mmv_rip_a(int K, double a_star, double sigma2, double gamma_min,
                                     double gamma_max, double ric_a_2k, double ric_a_k, int n,
                                     double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("sufficient_mmv_rip_a: delta not in (0,1)");
    RipASufficiency out;
    if (ric_a_2k >= 1.0) {
        out.l_sufficient = kInf;
        return out;
    }
    const double ratio = gamma_min / (sigma2 + gamma_max);
    out.eta_lb = (1.0 / (8.0 * K * a_star * a_star)) * ratio * ratio *
                 ((1.0 - ric_a_2k * ric_a_2k) / (1.0 + ric_a_2k));

    if (gamma_max == gamma_min) {
        out.kappa_cov_log = 0.0;
    } else {
        const double zeta_p = (144.0 / (gamma_min * gamma_min)) *
                              ((1.0 + ric_a_k) / (1.0 - ric_a_k)) *
                              std::pow(sigma2 + gamma_max, 3) / (sigma2 + gamma_min);
        const double inner = std::pow(static_cast<double>(K), 2.5) * a_star * a_star *
                             (gamma_max - gamma_min) * zeta_p /
                             (gamma_min * (1.0 - ric_a_2k));
        out.kappa_cov_log = K * std::max(0.0, std::log(inner));
    }

    out.l_sufficient = (64.0 * K * a_star * a_star / (1.0 - ric_a_2k)) *
                       std::pow((sigma2 + gamma_max) / gamma_min, 2) *
                       std::max(support_count_log(n, K, delta), out.kappa_cov_log);
    return out;
}

std::vector<std::pair<double, double>> lambda_max_noiseless(
    const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma1, const Eigen::VectorXd& gamma2,
    const std::vector<double>& sigma2_grid) {
    bool proper = false;
    for (Eigen::Index i = 0; i < gamma1.size(); ++i)
        if (gamma1(i) != 0.0 && gamma2(i) == 0.0) proper = true;
    if (!proper)
        throw std::invalid_argument(
            "lambda_max_noiseless: supp(gamma1) \\ supp(gamma2) must be nonempty");

    std::vector<std::pair<double, double>> out;
    out.reserve(sigma2_grid.size());
    for (double s2 : sigma2_grid) {
        const auto c1 = sigma_gamma(a, gamma1, s2);
        const auto c2 = sigma_gamma(a, gamma2, s2);
        const Eigen::MatrixXd half = symmetric_sqrt(c1.matrix);
        Eigen::LLT<Eigen::MatrixXd> llt(c2.matrix);
        if (llt.info() != Eigen::Success)
            throw numerical_error("lambda_max_noiseless: Sigma_gamma2 not SPD on grid");
        Eigen::MatrixXd h = half * llt.solve(half);
        h = 0.5 * (h + h.transpose()).eval();
        out.emplace_back(s2, spectral_norm_sym(h));
    }
    return out;
}

std::string BoundsReport::csv_header() {
    return "n,K,sigma2,gamma_min,gamma_max,delta,a_star,ric_kr_2k,ric_a_2k,sup_spectral,"
           "eta,eta_lb,lipschitz_per_mmv,kappa_cov_log,"
           "L_sufficient_thm3,L_sufficient_c2,L_sufficient_ripA";
}

std::string BoundsReport::to_csv_row() const {
    std::ostringstream os;
    os << n << ',' << K << ',' << format_double(sigma2) << ',' << format_double(gamma_min)
       << ',' << format_double(gamma_max) << ',' << format_double(delta) << ','
       << format_double(a_star) << ',' << format_double(ric_kr_2k) << ','
       << format_double(ric_a_2k) << ',' << format_double(sup_spectral) << ','
       << format_double(eta) << ',' << format_double(eta_lb) << ','
       << format_double(lipschitz_per_mmv) << ',' << format_double(kappa_cov_log) << ','
       << format_double(l_sufficient_thm3) << ',' << format_double(l_sufficient_c2) << ','
       << format_double(l_sufficient_rip_a);
    return os.str();
}

BoundsReport make_bounds_report(const Eigen::MatrixXd& a, int K, double sigma2,
                                double gamma_min, double gamma_max, double delta,
                                double ric_kr_2k, double ric_a_2k, SupMode sup_mode,
                                double c_abs) {
    BoundsReport r;
    r.n = static_cast<int>(a.cols());
    r.K = K;
    r.sigma2 = sigma2;
    r.gamma_min = gamma_min;
    r.gamma_max = gamma_max;
    r.delta = delta;
    r.a_star = a.cwiseAbs().maxCoeff();
    r.ric_kr_2k = ric_kr_2k;
    r.ric_a_2k = ric_a_2k;

    const EtaResult e = eta_exponent(a, K, sigma2, gamma_min, gamma_max, ric_kr_2k, sup_mode);
    r.eta = e.vacuous ? 0.0 : e.eta;
    r.eta_lb = e.vacuous ? 0.0 : e.eta_lb;
    r.sup_spectral = e.sup_term;

    if (sigma2 > 0.0) {
        const double ry_envelope =
            2.0 * (sigma2 + gamma_max * std::sqrt(static_cast<double>(K)) *
                                std::sqrt(1.0 + std::min(ric_kr_2k, 1.0)));
        r.lipschitz_per_mmv = lipschitz_bound(1, K, gamma_min, sigma2, ry_envelope);
        r.kappa_cov_log = (ric_kr_2k < 1.0)
                              ? kappa_cov_bound_log(K, gamma_min, gamma_max, sigma2, ric_kr_2k,
                                                    r.a_star)
                              : kInf;
    } else {
        r.lipschitz_per_mmv = kInf;
        r.kappa_cov_log = 0.0;  // noiseless path bypasses the covering argument
    }

    r.l_sufficient_thm3 =
        sufficient_mmv_thm3(r.eta, r.kappa_cov_log, r.n, K, delta, c_abs);
    r.l_sufficient_c2 = sufficient_mmv_c2(K, r.a_star, sigma2, gamma_min, gamma_max,
                                          ric_kr_2k, r.n, delta, r.kappa_cov_log);
    const auto rip_a = sufficient_mmv_rip_a(K, r.a_star, sigma2, gamma_min, gamma_max,
                                            ric_a_2k, ric_a_2k, r.n, delta);
    r.l_sufficient_rip_a = rip_a.l_sufficient;
    return r;
}

}  // namespace msbl
