#include "msbl/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msbl/rng.hpp"

namespace msbl {

void SourceSpec::validate() const {
    if (n < 1) throw std::invalid_argument("SourceSpec: n < 1");
    if (max_support_size < 0 || max_support_size > n)
        throw std::invalid_argument("SourceSpec: K out of range");
    if (static_cast<int>(support.size()) > max_support_size)
        throw std::invalid_argument("SourceSpec: |support| > K");
    for (int i : support)
        if (i < 0 || i >= n) throw std::invalid_argument("SourceSpec: support index out of range");
    if (gamma_min <= 0.0 || gamma_max < gamma_min)
        throw std::invalid_argument("SourceSpec: need 0 < gamma_min <= gamma_max");
}

Eigen::MatrixXd sample_gaussian_matrix(int m, int n, MatrixNormalization normalization,
                                       std::uint64_t seed) {
    if (m < 1 || n < 1) throw std::invalid_argument("sample_gaussian_matrix: bad dimensions");
    Rng rng(seed);
    Eigen::MatrixXd a(m, n);
    // column-major fill so the draw order matches Eigen's storage
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) a(i, j) = rng.gaussian();
    if (normalization == MatrixNormalization::kUnitColumns) {
        for (int j = 0; j < n; ++j) {
            const double nrm = a.col(j).norm();
            if (nrm > 0.0) a.col(j) /= nrm;
        }
    } else {
        // entry variance 1/sqrt(m)  =>  std dev m^{-1/4}
        a *= std::pow(static_cast<double>(m), -0.25);
    }
    return a;
}

SourceSpec sample_source(const SourceSpec& spec, SupportPolicy policy, std::uint64_t seed) {
    spec.validate();
    SourceSpec out = spec;
    Rng rng(seed);
    if (policy == SupportPolicy::kUniformRandom) {
        // Fisher-Yates prefix gives a uniform size-K subset
        const int k = spec.max_support_size;
        std::vector<int> perm(spec.n);
        for (int i = 0; i < spec.n; ++i) perm[i] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(rng.uniform_index(spec.n - i));
            std::swap(perm[i], perm[j]);
        }
        out.support.assign(perm.begin(), perm.begin() + k);
        std::sort(out.support.begin(), out.support.end());
    }
    out.gamma_star = Eigen::VectorXd::Zero(spec.n);
    for (int i : out.support) {
        out.gamma_star(i) = (spec.gamma_min == spec.gamma_max)
                                ? spec.gamma_min
                                : rng.uniform(spec.gamma_min, spec.gamma_max);
    }
    return out;
}

MmvInstance synthesize_mmv(const SourceSpec& spec, const Eigen::MatrixXd& a, int num_mmv,
                           double sigma2, std::uint64_t seed) {
    if (a.cols() != spec.n) throw std::invalid_argument("synthesize_mmv: A columns != spec.n");
    if (num_mmv < 1) throw std::invalid_argument("synthesize_mmv: L < 1");
    if (sigma2 < 0.0) throw std::invalid_argument("synthesize_mmv: sigma2 < 0");
    if (spec.gamma_star.size() != spec.n)
        throw std::invalid_argument("synthesize_mmv: spec not realized (gamma_star missing)");
    Rng rng(seed);
    const int m = static_cast<int>(a.rows());

    MmvInstance inst;
    inst.a = a;
    inst.sigma2 = sigma2;
    inst.seed = seed;
    inst.x = Eigen::MatrixXd::Zero(spec.n, num_mmv);
    for (int j = 0; j < num_mmv; ++j)
        for (int i : spec.support) inst.x(i, j) = std::sqrt(spec.gamma_star(i)) * rng.gaussian();

    inst.y = a * inst.x;
    if (sigma2 > 0.0) {
        const double sd = std::sqrt(sigma2);
        for (int j = 0; j < num_mmv; ++j)
            for (int i = 0; i < m; ++i) inst.y(i, j) += sd * rng.gaussian();
    }
    return inst;
}

}  // namespace msbl
