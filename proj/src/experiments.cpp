#include "msbl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "msbl/errors.hpp"
#include "msbl/matlib.hpp"
#include "msbl/matrix_io.hpp"
#include "msbl/model.hpp"
#include "msbl/rip.hpp"
#include "msbl/rng.hpp"

namespace msbl {

namespace {

constexpr std::uint64_t kMatrixStream = 0x00A0'0000'0000'0001ULL;

std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<int> recover_support(const ExperimentConfig& cfg, const MmvInstance& inst) {
    switch (cfg.algorithm) {
        case Algorithm::kMsbl: {
            const RecoveryResult r = msbl(inst.y, inst.a, inst.sigma2, cfg.solver);
            if (cfg.extraction == ExtractionPolicy::kTopK)
                return extract_support_top_k(r.gamma_hat, cfg.k_true).indices;
            return extract_support_threshold(r.gamma_hat, cfg.solver.extraction_tau).indices;
        }
        case Algorithm::kCmsbl: {
            const RecoveryResult r = cmsbl(inst.y, inst.a, inst.sigma2, cfg.K, cfg.gamma_min,
                                           cfg.gamma_max, cfg.solver);
            if (cfg.extraction == ExtractionPolicy::kTopK)
                return extract_support_top_k(r.gamma_hat, cfg.k_true).indices;
            return extract_support_threshold(r.gamma_hat, cfg.solver.extraction_tau).indices;
        }
        case Algorithm::kSomp:
            return sorted(somp(inst.y, inst.a, cfg.k_true).indices);
        case Algorithm::kColasso: {
            const ColassoResult r = colasso(inst.y, inst.a, inst.sigma2, cfg.colasso_lambda);
            if (cfg.extraction == ExtractionPolicy::kTopK)
                return extract_support_top_k(r.gamma, cfg.k_true).indices;
            return extract_support_threshold(r.gamma, cfg.solver.extraction_tau).indices;
        }
        case Algorithm::kOsga:
            return sorted(osga(inst.y, inst.a, cfg.k_true));
    }
    throw std::invalid_argument("recover_support: unknown algorithm");
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int used = 0;
};

// OLS of log(rate) on L over cells with rate strictly inside (0, 1).
SlopeFit fit_log_rate(const std::vector<std::pair<double, double>>& l_and_rate) {
    SlopeFit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [l, rate] : l_and_rate) {
        if (!(rate > 0.0 && rate < 1.0)) continue;
        const double x = l;
        const double y = std::log(rate);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++f.used;
    }
    if (f.used < 2) return f;
    const double n = f.used;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    const double sst = syy - sy * sy / n;
    if (sst > 0.0) {
        double sse = 0.0;
        for (const auto& [l, rate] : l_and_rate) {
            if (!(rate > 0.0 && rate < 1.0)) continue;
            const double e = std::log(rate) - (f.intercept + f.slope * l);
            sse += e * e;
        }
        f.r2 = 1.0 - sse / sst;
    } else {
        f.r2 = 1.0;
    }
    return f;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("ExperimentConfig: m, n must be >= 1");
    if (k_true < 0 || k_true > n)
        throw std::invalid_argument("ExperimentConfig: k_true out of range");
    if (K < k_true || K > n)
        throw std::invalid_argument("ExperimentConfig: need k_true <= K <= n");
    if (l_grid.empty()) throw std::invalid_argument("ExperimentConfig: empty L grid");
    for (std::size_t i = 0; i < l_grid.size(); ++i) {
        if (l_grid[i] < 1) throw std::invalid_argument("ExperimentConfig: L values must be >= 1");
        if (i > 0 && l_grid[i] <= l_grid[i - 1])
            throw std::invalid_argument("ExperimentConfig: L grid must be strictly increasing");
    }
    if (sigma2 < 0.0) throw std::invalid_argument("ExperimentConfig: sigma2 < 0");
    if (!(gamma_min > 0.0 && gamma_min <= gamma_max))
        throw std::invalid_argument("ExperimentConfig: need 0 < gamma_min <= gamma_max");
    if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
    if (threads < 1) throw std::invalid_argument("ExperimentConfig: threads must be >= 1");
    solver.validate();
}

TrialStats run_trial(const ExperimentConfig& cfg, int num_mmv, std::uint64_t cell_seed,
                     std::uint64_t trial_index) {
    const std::uint64_t trial_seed = derive_seed(cell_seed, trial_index);

    Eigen::MatrixXd a;
    if (cfg.matrix_policy == MatrixPolicy::kFixed) {
        a = sample_gaussian_matrix(cfg.m, cfg.n, cfg.matrix_normalization,
                                   derive_seed(cfg.master_seed, kMatrixStream));
    } else {
        a = sample_gaussian_matrix(cfg.m, cfg.n, cfg.matrix_normalization,
                                   derive_seed(trial_seed, 1));
    }

    SourceSpec spec;
    spec.n = cfg.n;
    spec.max_support_size = cfg.k_true;
    spec.gamma_min = cfg.gamma_min;
    spec.gamma_max = cfg.gamma_max;
    const SourceSpec realized =
        sample_source(spec, SupportPolicy::kUniformRandom, derive_seed(trial_seed, 2));
    const MmvInstance inst =
        synthesize_mmv(realized, a, num_mmv, cfg.sigma2, derive_seed(trial_seed, 3));

    TrialStats out;
    try {
        if (cfg.algorithm == Algorithm::kMsbl || cfg.algorithm == Algorithm::kCmsbl) {
            const RecoveryResult r =
                cfg.algorithm == Algorithm::kMsbl
                    ? msbl(inst.y, inst.a, inst.sigma2, cfg.solver)
                    : cmsbl(inst.y, inst.a, inst.sigma2, cfg.K, cfg.gamma_min, cfg.gamma_max,
                            cfg.solver);
            out.iters = r.iters;
            const std::vector<int> hat =
                cfg.extraction == ExtractionPolicy::kTopK
                    ? extract_support_top_k(r.gamma_hat, cfg.k_true).indices
                    : extract_support_threshold(r.gamma_hat, cfg.solver.extraction_tau).indices;
            out.outcome = (sorted(hat) == realized.support) ? TrialOutcome::kSuccess
                                                            : TrialOutcome::kFailure;
        } else {
            const std::vector<int> hat = recover_support(cfg, inst);
            out.outcome = (sorted(hat) == realized.support) ? TrialOutcome::kSuccess
                                                            : TrialOutcome::kFailure;
        }
    } catch (const numerical_error&) {
        out.outcome = TrialOutcome::kNumericalFailure;
    }
    return out;
}

std::vector<CellResult> error_curve(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<CellResult> cells;
    cells.reserve(cfg.l_grid.size());

    for (std::size_t ci = 0; ci < cfg.l_grid.size(); ++ci) {
        const int l = cfg.l_grid[ci];
        const std::uint64_t cell_seed = derive_seed(cfg.master_seed, 0x1000 + ci);
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<TrialStats> stats(static_cast<std::size_t>(cfg.trials));
        const int nthreads = std::min(cfg.threads, cfg.trials);
        if (nthreads <= 1) {
            for (int t = 0; t < cfg.trials; ++t)
                stats[t] = run_trial(cfg, l, cell_seed, static_cast<std::uint64_t>(t));
        } else {
            std::atomic<int> next{0};
            std::vector<std::thread> pool;
            pool.reserve(nthreads);
            for (int w = 0; w < nthreads; ++w) {
                pool.emplace_back([&] {
                    for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
                        stats[t] = run_trial(cfg, l, cell_seed, static_cast<std::uint64_t>(t));
                });
            }
            for (auto& th : pool) th.join();
        }

        CellResult c;
        c.l = l;
        c.trials = cfg.trials;
        long iter_sum = 0;
        for (const TrialStats& s : stats) {
            if (s.outcome == TrialOutcome::kSuccess) ++c.successes;
            if (s.outcome == TrialOutcome::kNumericalFailure) ++c.numerical_failures;
            iter_sum += s.iters;
        }
        c.error_rate = 1.0 - static_cast<double>(c.successes) / cfg.trials;
        c.mean_iters = static_cast<double>(iter_sum) / cfg.trials;
        if (cfg.record_timings) {
            const auto t1 = std::chrono::steady_clock::now();
            c.wall_time_ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        cells.push_back(c);
    }
    return cells;
}

PhaseDiagram phase_diagram(const ExperimentConfig& cfg_base, const std::vector<int>& m_grid,
                           const std::vector<int>& k_grid) {
    if (m_grid.empty() || k_grid.empty())
        throw std::invalid_argument("phase_diagram: empty grid");
    PhaseDiagram pd;
    pd.m_grid = m_grid;
    pd.k_grid = k_grid;
    pd.trials = cfg_base.trials;
    pd.error_rate.assign(m_grid.size(), std::vector<double>(k_grid.size(), 1.0));

    for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
        for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
            ExperimentConfig cfg = cfg_base;
            cfg.m = m_grid[mi];
            cfg.k_true = k_grid[ki];
            cfg.K = std::max(cfg.K, cfg.k_true);
            cfg.l_grid = {cfg_base.l_grid.front()};
            // cell seeds indexed by grid position, not execution order
            cfg.master_seed =
                derive_seed(cfg_base.master_seed, 0x2000 + mi * k_grid.size() + ki);
            cfg.validate();
            pd.error_rate[mi][ki] = error_curve(cfg).front().error_rate;
        }
    }
    return pd;
}

DecayFit decay_fit(const std::vector<CellResult>& cells) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(cells.size());
    int excluded = 0;
    for (const CellResult& c : cells) {
        if (c.error_rate > 0.0 && c.error_rate < 1.0)
            pts.emplace_back(static_cast<double>(c.l), c.error_rate);
        else
            ++excluded;
    }
    if (static_cast<int>(pts.size()) < 3)
        throw std::runtime_error("decay_fit: fewer than 3 cells with rate in (0,1)");
    const SlopeFit f = fit_log_rate(pts);
    DecayFit out;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r2 = f.r2;
    out.used_cells = f.used;
    out.excluded_cells = excluded;
    return out;
}

double decay_slope_bootstrap_pvalue(const std::vector<CellResult>& cells, int resamples,
                                    std::uint64_t seed) {
    if (resamples < 1) throw std::invalid_argument("bootstrap: resamples must be >= 1");
    decay_fit(cells);  // validates there is enough signal to resample

    int at_least = 0;
    for (int r = 0; r < resamples; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::vector<std::pair<double, double>> pts;
        pts.reserve(cells.size());
        for (const CellResult& c : cells) {
            const double p = 1.0 - c.error_rate;
            int succ = 0;
            for (int t = 0; t < c.trials; ++t)
                if (rng.uniform() < p) ++succ;
            const double rate = 1.0 - static_cast<double>(succ) / c.trials;
            if (rate > 0.0 && rate < 1.0) pts.emplace_back(static_cast<double>(c.l), rate);
        }
        const SlopeFit f = fit_log_rate(pts);
        if (f.used < 2 || f.slope >= 0.0) ++at_least;
    }
    return static_cast<double>(at_least) / resamples;
}

void write_error_curve_csv(const std::string& path, const std::vector<CellResult>& cells) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "L,successes,trials,error_rate,mean_iters,wall_time_ms\n";
    for (const CellResult& c : cells) {
        os << c.l << ',' << c.successes << ',' << c.trials << ','
           << format_double(c.error_rate) << ',' << format_double(c.mean_iters) << ','
           << format_double(c.wall_time_ms) << '\n';
    }
}

void write_phase_csv(const std::string& path, const PhaseDiagram& pd) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "m,k,error_rate,trials\n";
    for (std::size_t mi = 0; mi < pd.m_grid.size(); ++mi)
        for (std::size_t ki = 0; ki < pd.k_grid.size(); ++ki)
            os << pd.m_grid[mi] << ',' << pd.k_grid[ki] << ','
               << format_double(pd.error_rate[mi][ki]) << ',' << pd.trials << '\n';
}

void write_bounds_companion_csv(const std::string& path,
                                const std::vector<BoundsReport>& reports) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << BoundsReport::csv_header() << '\n';
    for (const BoundsReport& r : reports) os << r.to_csv_row() << '\n';
}

BoundsReport bounds_for_config(const ExperimentConfig& cfg, double delta) {
    cfg.validate();
    const Eigen::MatrixXd a =
        sample_gaussian_matrix(cfg.m, cfg.n, cfg.matrix_normalization,
                               cfg.matrix_policy == MatrixPolicy::kFixed
                                   ? derive_seed(cfg.master_seed, kMatrixStream)
                                   : derive_seed(derive_seed(derive_seed(cfg.master_seed,
                                                                         0x1000),
                                                             0),
                                                 1));
    const int order = std::min(2 * cfg.K, cfg.n);
    RicEstimate kr;
    RicEstimate ra;
    if (binomial(cfg.n, order) <= kRicSubsetBudget) {
        kr = kr_ric(a, order, RicMethod::kExhaustive);
        ra = ric_exhaustive(a, order);
    } else {
        kr = kr_ric(a, order, RicMethod::kRandomized, 2000,
                    derive_seed(cfg.master_seed, 0x3000));
        ra = ric_randomized(a, order, 2000, derive_seed(cfg.master_seed, 0x3001));
    }
    const SupMode mode = binomial(cfg.n, order) <= kRicSubsetBudget ? SupMode::kExact
                                                                    : SupMode::kRipRelaxed;
    return make_bounds_report(a, cfg.K, cfg.sigma2, cfg.gamma_min, cfg.gamma_max, delta,
                              kr.lower, ra.lower, mode);
}

namespace {

// Tiny hand-rolled SVG; plotting libraries are out of scope for this tool.
void svg_open(std::ostream& os, int w, int h) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
       << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

}  // namespace

void write_error_curve_svg(const std::string& path, const std::vector<CellResult>& cells) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    const int w = 640, h = 420, ml = 60, mr = 20, mt = 20, mb = 50;
    svg_open(os, w, h);
    os << "<!-- L,error_rate";
    for (const CellResult& c : cells)
        os << ' ' << c.l << ':' << format_double(c.error_rate);
    os << " -->\n";

    double lmin = cells.front().l, lmax = cells.front().l;
    for (const CellResult& c : cells) {
        lmin = std::min(lmin, static_cast<double>(c.l));
        lmax = std::max(lmax, static_cast<double>(c.l));
    }
    if (lmax == lmin) lmax = lmin + 1.0;
    const auto px = [&](double l) {
        return ml + (l - lmin) / (lmax - lmin) * (w - ml - mr);
    };
    const auto py = [&](double rate) { return mt + (1.0 - rate) * (h - mt - mb); };

    os << "<line x1=\"" << ml << "\" y1=\"" << (h - mb) << "\" x2=\"" << (w - mr)
       << "\" y2=\"" << (h - mb) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << (h - mb) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (w / 2) << "\" y=\"" << (h - 12)
       << "\" text-anchor=\"middle\" font-size=\"14\">L</text>\n";
    os << "<text x=\"16\" y=\"" << (h / 2)
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " << (h / 2)
       << ")\">error rate</text>\n";

    os << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (const CellResult& c : cells) os << px(c.l) << ',' << py(c.error_rate) << ' ';
    os << "\"/>\n";
    for (const CellResult& c : cells)
        os << "<circle cx=\"" << px(c.l) << "\" cy=\"" << py(c.error_rate)
           << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    os << "</svg>\n";
}

void write_phase_svg(const std::string& path, const PhaseDiagram& pd) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    const int cell = 36, ml = 60, mt = 20, mb = 50, mr = 20;
    const int w = ml + mr + cell * static_cast<int>(pd.k_grid.size());
    const int h = mt + mb + cell * static_cast<int>(pd.m_grid.size());
    svg_open(os, w, h);
    os << "<!-- m,k,error_rate";
    for (std::size_t mi = 0; mi < pd.m_grid.size(); ++mi)
        for (std::size_t ki = 0; ki < pd.k_grid.size(); ++ki)
            os << ' ' << pd.m_grid[mi] << ':' << pd.k_grid[ki] << ':'
               << format_double(pd.error_rate[mi][ki]);
    os << " -->\n";

    for (std::size_t mi = 0; mi < pd.m_grid.size(); ++mi) {
        for (std::size_t ki = 0; ki < pd.k_grid.size(); ++ki) {
            const double r = pd.error_rate[mi][ki];
            const int shade = static_cast<int>(255.0 * (1.0 - r));
            os << "<rect x=\"" << (ml + cell * static_cast<int>(ki)) << "\" y=\""
               << (mt + cell * static_cast<int>(mi)) << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << ',' << shade
               << ",255)\" stroke=\"#888\"/>\n";
        }
        os << "<text x=\"" << (ml - 8) << "\" y=\"" << (mt + cell * static_cast<int>(mi) +
                                                        cell / 2 + 5)
           << "\" text-anchor=\"end\" font-size=\"12\">" << pd.m_grid[mi] << "</text>\n";
    }
    for (std::size_t ki = 0; ki < pd.k_grid.size(); ++ki)
        os << "<text x=\"" << (ml + cell * static_cast<int>(ki) + cell / 2) << "\" y=\""
           << (mt + cell * static_cast<int>(pd.m_grid.size()) + 18)
           << "\" text-anchor=\"middle\" font-size=\"12\">" << pd.k_grid[ki] << "</text>\n";
    os << "<text x=\"" << (w / 2) << "\" y=\"" << (h - 10)
       << "\" text-anchor=\"middle\" font-size=\"14\">k</text>\n";
    os << "<text x=\"16\" y=\"" << (h / 2)
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " << (h / 2)
       << ")\">m</text>\n";
    os << "</svg>\n";
}

}  // namespace msbl
