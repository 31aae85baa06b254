#include "msbl/solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "msbl/errors.hpp"
#include "msbl/matlib.hpp"
#include "msbl/matrix_io.hpp"
#include "msbl/rng.hpp"

namespace msbl {

void MsblConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("MsblConfig: max_iters < 1");
    if (restarts < 1) throw std::invalid_argument("MsblConfig: restarts < 1");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("MsblConfig: tol not in (0,1)");
    if (prune_floor < 0.0) throw std::invalid_argument("MsblConfig: prune_floor < 0");
    if (sigma2_eff_floor <= 0.0)
        throw std::invalid_argument("MsblConfig: sigma2_eff_floor must be positive");
    if (anneal_sigma2_start < 0.0)
        throw std::invalid_argument("MsblConfig: anneal_sigma2_start < 0");
    if (anneal_sigma2_start > 0.0 && !(anneal_factor > 0.0 && anneal_factor < 1.0))
        throw std::invalid_argument("MsblConfig: anneal_factor not in (0,1)");
    if (candidate_support_k < 0)
        throw std::invalid_argument("MsblConfig: candidate_support_k < 0");
    if (candidate_support_k > 0 && candidate_polish < 1)
        throw std::invalid_argument("MsblConfig: candidate_polish < 1");
}

std::string RecoveryResult::to_csv_row() const {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < gamma_hat.size(); ++i) {
        if (i) os << ',';
        os << format_double(gamma_hat(i));
    }
    os << ',';
    for (std::size_t i = 0; i < support_hat.size(); ++i) {
        if (i) os << ';';
        os << support_hat[i];
    }
    os << ',' << iters << ',' << (converged ? 1 : 0);
    return os.str();
}

double loglik_from_covariance(const Eigen::MatrixXd& ry, int num_mmv, const Eigen::MatrixXd& a,
                              const Eigen::VectorXd& gamma, double sigma2) {
    Eigen::MatrixXd cov = a * gamma.asDiagonal() * a.transpose();
    cov.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("loglik: model covariance is numerically singular");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double quad = llt.solve(ry).trace() * num_mmv;
    return -num_mmv * logdet - quad;
}

double loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma,
              double sigma2) {
    if (y.rows() != a.rows()) throw std::invalid_argument("loglik: Y rows != A rows");
    if (gamma.size() != a.cols()) throw std::invalid_argument("loglik: gamma length != A cols");
    const int L = static_cast<int>(y.cols());
    const Eigen::MatrixXd ry = y * y.transpose() / static_cast<double>(L);
    return loglik_from_covariance(ry, L, a, gamma, sigma2);
}

namespace {

Eigen::VectorXd initial_gamma(const MsblConfig& cfg, const Eigen::MatrixXd& ry,
                              const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.cols();
    if (cfg.init_gamma == GammaInit::kOnes) return Eigen::VectorXd::Ones(n);
    // matched filter: gamma_i = (1/L)||a_i^T Y||^2 = a_i^T R_Y a_i
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = a.col(i).dot(ry * a.col(i));
    return g.cwiseMax(0.0);
}

// One evidence update. Per index, with b_i = Sigma^-1 a_i:
//   q_i = b_i^T R_Y b_i   (so (1/L)||mu_i||^2 = g_i^2 q_i)
//   c_i = a_i^T b_i       (so s_i = g_i - g_i^2 c_i)
Eigen::VectorXd evidence_update(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& a,
                                const Eigen::MatrixXd& ry, double sigma2_eff, UpdateRule rule) {
    const Eigen::Index m = a.rows(), n = a.cols();
    Eigen::MatrixXd cov = a * gamma.asDiagonal() * a.transpose();
    cov.diagonal().array() += sigma2_eff;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw numerical_error("msbl: covariance lost positive definiteness");
    const Eigen::MatrixXd b = llt.solve(a);        // m x n, columns Sigma^-1 a_i
    const Eigen::MatrixXd ryb = ry * b;            // m x n
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = gamma(i);
        if (g == 0.0) {
            out(i) = 0.0;
            continue;
        }
        const double q = b.col(i).dot(ryb.col(i));
        const double c = a.col(i).dot(b.col(i));
        if (rule == UpdateRule::kEm) {
            out(i) = g * g * (q - c) + g;
        } else {
            // MacKay step; (1/L)||mu_i||^2 = g^2 q and 1 - s_i/g_i = g c
            out(i) = (c > 0.0) ? g * q / c : 0.0;
        }
    }
    (void)m;
    return out.cwiseMax(0.0);
}

RecoveryResult run_msbl_once(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2,
                             const MsblConfig& cfg, bool constrained, int K, double gamma_min,
                             double gamma_max, const Eigen::VectorXd* init) {
    if (y.rows() != a.rows()) throw std::invalid_argument("msbl: Y rows != A rows");
    const int L = static_cast<int>(y.cols());
    const Eigen::Index n = a.cols();
    const double sigma2_eff = std::max(sigma2, cfg.sigma2_eff_floor);
    const Eigen::MatrixXd ry = y * y.transpose() / static_cast<double>(L);

    // During iterations only the upper box face is enforced; the full Theta_K
    // projection is applied to the final iterate. Zeroing coordinates inside
    // the loop would make gamma = 0 absorbing and freeze the support.
    auto cap = [&](Eigen::VectorXd& g) {
        if (constrained) g = g.cwiseMin(gamma_max);
    };
    auto project = [&](Eigen::VectorXd& g) {
        if (!constrained) return;
        // keep K largest (ties toward lower index), zero the rest, clamp
        // surviving positives into [gamma_min, gamma_max]
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int i, int j) { return g(i) > g(j); });
        Eigen::VectorXd kept = Eigen::VectorXd::Zero(n);
        for (int r = 0; r < K && r < static_cast<int>(n); ++r) {
            const int i = order[r];
            if (g(i) > 0.0) kept(i) = std::clamp(g(i), gamma_min, gamma_max);
        }
        g = kept;
    };

    std::vector<double> stages;
    if (cfg.anneal_sigma2_start > sigma2_eff) {
        for (double s = cfg.anneal_sigma2_start; s > sigma2_eff; s *= cfg.anneal_factor)
            stages.push_back(s);
    }
    stages.push_back(sigma2_eff);

    RecoveryResult res;
    Eigen::VectorXd gamma = init ? *init : initial_gamma(cfg, ry, a);
    cap(gamma);

    bool converged = false;
    int total_iters = 0;
    for (std::size_t stage = 0; stage < stages.size(); ++stage) {
        const double s2 = stages[stage];
        const bool final_stage = stage + 1 == stages.size();
        if (final_stage) {
            try {
                res.loglik_trace.push_back(loglik_from_covariance(ry, L, a, gamma, s2));
            } catch (const std::domain_error&) {
                throw numerical_error("msbl: covariance singular at initialization", 0);
            }
        }

        converged = false;
        for (int iter = 0; iter < cfg.max_iters; ++iter) {
            Eigen::VectorXd next = evidence_update(gamma, a, ry, s2, cfg.update_rule);
            if (final_stage) {
                // pruning is deferred to the final stage so continuation
                // cannot permanently drop a coordinate early
                for (Eigen::Index i = 0; i < n; ++i)
                    if (next(i) < cfg.prune_floor) next(i) = 0.0;
            }
            cap(next);

            if (!next.allFinite())
                throw numerical_error("msbl: non-finite hyperparameters", total_iters);
            if (final_stage) {
                double ll = 0.0;
                try {
                    ll = loglik_from_covariance(ry, L, a, next, s2);
                } catch (const std::domain_error&) {
                    throw numerical_error("msbl: covariance became numerically singular",
                                          total_iters);
                }
                if (!std::isfinite(ll))
                    throw numerical_error("msbl: non-finite likelihood", total_iters);
                res.loglik_trace.push_back(ll);
            }

            const double scale = std::max(gamma.cwiseAbs().maxCoeff(), 1e-300);
            const double change = (next - gamma).cwiseAbs().maxCoeff() / scale;
            gamma = std::move(next);
            ++total_iters;
            if (change <= cfg.tol) {
                converged = true;
                break;
            }
        }
    }

    project(gamma);
    res.gamma_hat = std::move(gamma);
    res.iters = total_iters;
    res.converged = converged;
    res.support_hat = extract_support_threshold(res.gamma_hat, cfg.extraction_tau).indices;
    return res;
}

// Size-k supports ranked by projection residual tr((I - P_S) R_Y); the best
// candidate_polish supports become concentrated warm starts for EM.
std::vector<Eigen::VectorXd> candidate_inits(const Eigen::MatrixXd& y,
                                             const Eigen::MatrixXd& a, const MsblConfig& cfg) {
    const int n = static_cast<int>(a.cols());
    const int k = cfg.candidate_support_k;
    if (k > n) throw std::invalid_argument("msbl: candidate_support_k > n");
    constexpr std::uint64_t kCandidateBudget = 200000;
    if (binomial(n, k) > kCandidateBudget)
        throw capacity_error("msbl: candidate support enumeration exceeds budget");
    const int L = static_cast<int>(y.cols());
    const Eigen::MatrixXd ry = y * y.transpose() / static_cast<double>(L);

    using Scored = std::pair<double, std::vector<int>>;
    std::vector<Scored> best;  // kept sorted ascending by residual
    const std::size_t keep = static_cast<std::size_t>(cfg.candidate_polish);
    for_each_subset(n, k, [&](const std::vector<int>& s) {
        Eigen::MatrixXd sub(a.rows(), k);
        for (int j = 0; j < k; ++j) sub.col(j) = a.col(s[j]);
        const Eigen::MatrixXd g = sub.transpose() * sub;
        const Eigen::MatrixXd arb = sub.transpose() * ry * sub;
        const double fitted = Eigen::LDLT<Eigen::MatrixXd>(g).solve(arb).trace();
        const double residual = ry.trace() - fitted;
        const auto pos = std::lower_bound(
            best.begin(), best.end(), residual,
            [](const Scored& lhs, double r) { return lhs.first < r; });
        if (pos != best.end() || best.size() < keep) {
            best.insert(pos, {residual, s});
            if (best.size() > keep) best.pop_back();
        }
        return true;
    });

    std::vector<Eigen::VectorXd> inits;
    inits.reserve(best.size());
    for (const Scored& sc : best) {
        Eigen::VectorXd init = Eigen::VectorXd::Constant(n, 1e-6);
        for (int i : sc.second) init(i) = 1.0;
        inits.push_back(std::move(init));
    }
    return inits;
}

RecoveryResult run_msbl(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2,
                        const MsblConfig& cfg, bool constrained, int K, double gamma_min,
                        double gamma_max) {
    cfg.validate();
    if (cfg.restarts == 1 && cfg.candidate_support_k == 0)
        return run_msbl_once(y, a, sigma2, cfg, constrained, K, gamma_min, gamma_max, nullptr);

    std::vector<Eigen::VectorXd> inits;
    inits.emplace_back();  // empty marker: configured init_gamma
    if (cfg.candidate_support_k > 0)
        for (Eigen::VectorXd& v : candidate_inits(y, a, cfg)) inits.push_back(std::move(v));
    if (cfg.restarts > 1) {
        Rng rng(cfg.restart_seed);
        for (int r = 1; r < cfg.restarts; ++r) {
            Eigen::VectorXd init(a.cols());
            for (Eigen::Index i = 0; i < init.size(); ++i)
                init(i) = std::pow(10.0, rng.uniform(-2.0, 1.0));
            inits.push_back(std::move(init));
        }
    }

    RecoveryResult best;
    double best_ll = -std::numeric_limits<double>::infinity();
    bool have_result = false;
    for (const Eigen::VectorXd& init : inits) {
        try {
            RecoveryResult res =
                run_msbl_once(y, a, sigma2, cfg, constrained, K, gamma_min, gamma_max,
                              init.size() ? &init : nullptr);
            const double ll = res.loglik_trace.back();
            if (!have_result || ll > best_ll) {
                best_ll = ll;
                best = std::move(res);
                have_result = true;
            }
        } catch (const numerical_error&) {
            // a diverged start is simply not competitive
        }
    }
    if (!have_result) throw numerical_error("msbl: every start failed numerically");
    return best;
}

}  // namespace

RecoveryResult msbl(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2,
                    const MsblConfig& cfg) {
    return run_msbl(y, a, sigma2, cfg, false, 0, 0.0, 0.0);
}

RecoveryResult cmsbl(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2, int K,
                     double gamma_min, double gamma_max, const MsblConfig& cfg) {
    if (K < 0 || K > a.cols()) throw std::invalid_argument("cmsbl: K out of range");
    if (!(gamma_min > 0.0 && gamma_min <= gamma_max))
        throw std::invalid_argument("cmsbl: need 0 < gamma_min <= gamma_max");
    return run_msbl(y, a, sigma2, cfg, true, K, gamma_min, gamma_max);
}

SupportExtraction extract_support_threshold(const Eigen::VectorXd& gamma, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("extract_support_threshold: tau <= 0");
    SupportExtraction out;
    const double cutoff = tau * gamma.maxCoeff();
    for (Eigen::Index i = 0; i < gamma.size(); ++i)
        if (gamma(i) > cutoff && gamma(i) > 0.0) out.indices.push_back(static_cast<int>(i));
    return out;
}

SupportExtraction extract_support_top_k(const Eigen::VectorXd& gamma, int k) {
    const int n = static_cast<int>(gamma.size());
    if (k < 0 || k > n) throw std::invalid_argument("extract_support_top_k: k out of range");
    SupportExtraction out;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return gamma(i) > gamma(j); });
    out.degenerate = gamma.maxCoeff() <= 0.0;
    out.indices.assign(order.begin(), order.begin() + k);
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

SompResult somp(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, int k) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    if (k < 0 || k > m) throw std::invalid_argument("somp: k must satisfy 0 <= k <= m");
    SompResult out;
    Eigen::MatrixXd residual = y;
    std::vector<bool> picked(n, false);
    for (int t = 0; t < k; ++t) {
        int best = -1;
        double best_score = -1.0;
        for (int i = 0; i < n; ++i) {
            if (picked[i]) continue;
            const double cn = a.col(i).norm();
            const double score = cn > 0.0 ? (a.col(i).transpose() * residual).norm() / cn : 0.0;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        picked[best] = true;
        out.indices.push_back(best);

        Eigen::MatrixXd sub(m, t + 1);
        for (int j = 0; j <= t; ++j) sub.col(j) = a.col(out.indices[j]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        if (svd.rank() < t + 1) out.rank_deficient = true;
        residual = y - sub * svd.solve(y);
    }
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

ColassoResult colasso(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, double sigma2,
                      double lambda, int max_iters) {
    if (lambda < 0.0) throw std::invalid_argument("colasso: lambda < 0");
    const int L = static_cast<int>(y.cols());
    const int n = static_cast<int>(a.cols());
    const Eigen::MatrixXd b_mat = self_khatri_rao(a);
    Eigen::MatrixXd ry = y * y.transpose() / static_cast<double>(L);
    ry.diagonal().array() -= sigma2;
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(ry.data(), ry.size());

    auto smooth = [&](const Eigen::VectorXd& g) { return 0.5 * (b_mat * g - target).squaredNorm(); };

    ColassoResult out;
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
    double step = 1.0;
    double f = smooth(gamma);
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        const Eigen::VectorXd grad = b_mat.transpose() * (b_mat * gamma - target);
        Eigen::VectorXd next;
        double f_next = 0.0;
        // backtracking on the quadratic upper model of the smooth part
        for (;;) {
            next = (gamma - step * (grad.array() + lambda).matrix()).cwiseMax(0.0);
            f_next = smooth(next);
            const Eigen::VectorXd d = next - gamma;
            if (f_next <= f + grad.dot(d) + d.squaredNorm() / (2.0 * step) + 1e-14) break;
            step *= 0.5;
            if (step < 1e-18) break;
        }
        const double move = (next - gamma).cwiseAbs().maxCoeff();
        gamma = std::move(next);
        f = f_next;
        if (move <= 1e-12 * std::max(1.0, gamma.cwiseAbs().maxCoeff())) {
            out.converged = true;
            ++iter;
            break;
        }
        step *= 1.25;
    }
    out.gamma = std::move(gamma);
    out.iters = iter;
    out.objective = f + lambda * out.gamma.lpNorm<1>();
    return out;
}

std::vector<int> osga(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, int k) {
    const int n = static_cast<int>(a.cols());
    if (k < 0 || k > n) throw std::invalid_argument("osga: k out of range");
    const int L = static_cast<int>(y.cols());
    Eigen::VectorXd scores(n);
    for (int i = 0; i < n; ++i)
        scores(i) = (a.col(i).transpose() * y).squaredNorm() / static_cast<double>(L);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return scores(i) > scores(j); });
    std::vector<int> out(order.begin(), order.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace msbl
