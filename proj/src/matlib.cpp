#include "msbl/matlib.hpp"

#include <Eigen/Dense>
#include <limits>
#include <numeric>

#include "msbl/errors.hpp"

namespace msbl {

Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("khatri_rao: column counts differ (" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.cols()) + ")");
    const Eigen::Index m = a.rows(), p = b.rows(), n = a.cols();
    Eigen::MatrixXd out(m * p, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            out.block(i * p, j, p, 1) = a(i, j) * b.col(j);
        }
    }
    return out;
}

int numerical_rank(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double tol = kRankTol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        // c * (n-k+i) / i is exact at each step
        const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
        if (c > std::numeric_limits<std::uint64_t>::max() / num / 2)
            return std::numeric_limits<std::int64_t>::max();
        c = c * num / static_cast<std::uint64_t>(i);
    }
    return c;
}

std::uint64_t for_each_subset(int n, int k,
                              const std::function<bool(const std::vector<int>&)>& visit) {
    if (k < 0 || k > n) return 0;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::uint64_t count = 0;
    if (k == 0) {
        ++count;
        visit(idx);
        return count;
    }
    while (true) {
        ++count;
        if (!visit(idx)) return count;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return count;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

namespace {

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& a, const std::vector<int>& cols) {
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(j) = a.col(cols[j]);
    return sub;
}

}  // namespace

int spark(const Eigen::MatrixXd& a, int column_limit) {
    const int n = static_cast<int>(a.cols());
    if (n < 1) throw std::invalid_argument("spark: matrix has no columns");
    if (n > column_limit)
        throw capacity_error("spark: n=" + std::to_string(n) + " exceeds exhaustive limit " +
                             std::to_string(column_limit));
    for (int p = 1; p <= n; ++p) {
        bool dependent = false;
        for_each_subset(n, p, [&](const std::vector<int>& s) {
            if (numerical_rank(select_columns(a, s)) < p) {
                dependent = true;
                return false;
            }
            return true;
        });
        if (dependent) return p;
    }
    return n + 1;  // all column subsets independent
}

int kruskal_rank(const Eigen::MatrixXd& a, int column_limit) {
    const int s = spark(a, column_limit);
    return s - 1;
}

CovarianceModel sigma_gamma(const Eigen::MatrixXd& a, const Eigen::VectorXd& gamma,
                            double sigma2) {
    if (gamma.size() != a.cols())
        throw std::invalid_argument("sigma_gamma: gamma length != A columns");
    if (sigma2 < 0.0) throw std::invalid_argument("sigma_gamma: sigma2 < 0");
    if ((gamma.array() < 0.0).any())
        throw std::invalid_argument("sigma_gamma: negative gamma entry");
    Eigen::MatrixXd s = a * gamma.asDiagonal() * a.transpose();
    s.diagonal().array() += sigma2;
    s = 0.5 * (s + s.transpose()).eval();
    return CovarianceModel{sigma2, gamma, std::move(s)};
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw numerical_error("symmetric_sqrt: eigensolver failed");
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(floor).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double spectral_norm_sym(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace msbl
