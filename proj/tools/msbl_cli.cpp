#include <CLI11.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msbl/bounds.hpp"
#include "msbl/errors.hpp"
#include "msbl/experiments.hpp"
#include "msbl/matlib.hpp"
#include "msbl/matrix_io.hpp"
#include "msbl/model.hpp"
#include "msbl/rip.hpp"
#include "msbl/rng.hpp"
#include "msbl/solvers.hpp"

namespace fs = std::filesystem;
using namespace msbl;

namespace {

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Flat key=value configuration. '#' starts a comment, blank lines are
// skipped, later assignments win. CLI overrides are applied on top.
class Config {
public:
    void load_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw config_error("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error(path + ":" + std::to_string(lineno) +
                                   ": expected key=value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void set(const std::string& key, const std::string& value) {
        if (key.empty()) throw config_error("empty config key");
        values_[key] = value;
    }

    void apply_overrides(const std::vector<std::string>& overrides) {
        for (const std::string& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw config_error("override must be key=value: " + ov);
            set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
        }
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    long integer(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::exception&) {
            throw config_error("key '" + key + "': not an integer: " + it->second);
        }
    }

    double real(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::exception&) {
            throw config_error("key '" + key + "': not a number: " + it->second);
        }
    }

    bool boolean(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw config_error("key '" + key + "': not a boolean: " + it->second);
    }

    std::vector<int> int_list(const std::string& key,
                              const std::vector<int>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<int> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const std::string t = trim(tok);
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(t, &used);
            } catch (const std::exception&) {
                throw config_error("key '" + key + "': bad integer list: " + it->second);
            }
            if (used != t.size())
                throw config_error("key '" + key + "': bad integer list: " + it->second);
            out.push_back(v);
        }
        if (out.empty()) throw config_error("key '" + key + "': empty list");
        return out;
    }

    void reject_unknown(const std::set<std::string>& known) const {
        for (const auto& [k, v] : values_)
            if (!known.count(k)) throw config_error("unknown config key: " + k);
    }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
};

const std::set<std::string> kExperimentKeys = {
    "m", "n", "K", "k_true", "L", "L_grid", "sigma2", "gamma_min", "gamma_max",
    "trials", "matrix_policy", "matrix_normalization", "algorithm", "extraction",
    "seed", "threads", "max_iters", "tol", "prune_floor", "sigma2_eff_floor",
    "update_rule", "init_gamma", "extraction_tau", "colasso_lambda",
    "record_timings", "delta", "m_grid", "k_grid", "ric_trials", "bootstrap_resamples",
    "ric_kr_2k_override", "ric_a_2k_override", "restarts", "restart_seed",
    "anneal_sigma2_start", "anneal_factor", "candidate_support_k", "candidate_polish",
};

Algorithm parse_algorithm(const std::string& s) {
    if (s == "msbl") return Algorithm::kMsbl;
    if (s == "cmsbl") return Algorithm::kCmsbl;
    if (s == "somp") return Algorithm::kSomp;
    if (s == "colasso") return Algorithm::kColasso;
    if (s == "osga") return Algorithm::kOsga;
    throw config_error("key 'algorithm': unknown value: " + s);
}

ExperimentConfig experiment_config(const Config& cfg, std::uint64_t seed, int threads) {
    ExperimentConfig e;
    e.m = static_cast<int>(cfg.integer("m", e.m));
    e.n = static_cast<int>(cfg.integer("n", e.n));
    e.k_true = static_cast<int>(cfg.integer("k_true", e.k_true));
    e.K = static_cast<int>(cfg.integer("K", std::max(e.K, e.k_true)));
    e.l_grid = cfg.int_list("L_grid", e.l_grid);
    e.sigma2 = cfg.real("sigma2", e.sigma2);
    e.gamma_min = cfg.real("gamma_min", e.gamma_min);
    e.gamma_max = cfg.real("gamma_max", e.gamma_max);
    e.trials = static_cast<int>(cfg.integer("trials", e.trials));
    e.master_seed = seed;
    e.threads = threads;

    const std::string policy = cfg.str("matrix_policy", "fresh_per_trial");
    if (policy == "fresh_per_trial" || policy == "fresh")
        e.matrix_policy = MatrixPolicy::kFreshPerTrial;
    else if (policy == "fixed")
        e.matrix_policy = MatrixPolicy::kFixed;
    else
        throw config_error("key 'matrix_policy': unknown value: " + policy);

    const std::string norm = cfg.str("matrix_normalization", "unit_columns");
    if (norm == "unit_columns")
        e.matrix_normalization = MatrixNormalization::kUnitColumns;
    else if (norm == "iid_scaled")
        e.matrix_normalization = MatrixNormalization::kIidScaled;
    else
        throw config_error("key 'matrix_normalization': unknown value: " + norm);

    e.algorithm = parse_algorithm(cfg.str("algorithm", "msbl"));

    const std::string extraction = cfg.str("extraction", "topk");
    if (extraction == "topk")
        e.extraction = ExtractionPolicy::kTopK;
    else if (extraction == "threshold")
        e.extraction = ExtractionPolicy::kThreshold;
    else
        throw config_error("key 'extraction': unknown value: " + extraction);

    e.solver.max_iters = static_cast<int>(cfg.integer("max_iters", e.solver.max_iters));
    e.solver.tol = cfg.real("tol", e.solver.tol);
    e.solver.prune_floor = cfg.real("prune_floor", e.solver.prune_floor);
    e.solver.sigma2_eff_floor = cfg.real("sigma2_eff_floor", e.solver.sigma2_eff_floor);
    e.solver.extraction_tau = cfg.real("extraction_tau", e.solver.extraction_tau);
    const std::string rule = cfg.str("update_rule", "em");
    if (rule == "em")
        e.solver.update_rule = UpdateRule::kEm;
    else if (rule == "fixed_point")
        e.solver.update_rule = UpdateRule::kFixedPoint;
    else
        throw config_error("key 'update_rule': unknown value: " + rule);
    const std::string init = cfg.str("init_gamma", "ones");
    if (init == "ones")
        e.solver.init_gamma = GammaInit::kOnes;
    else if (init == "matched_filter")
        e.solver.init_gamma = GammaInit::kMatchedFilter;
    else
        throw config_error("key 'init_gamma': unknown value: " + init);
    e.solver.anneal_sigma2_start =
        cfg.real("anneal_sigma2_start", e.solver.anneal_sigma2_start);
    e.solver.anneal_factor = cfg.real("anneal_factor", e.solver.anneal_factor);
    e.solver.candidate_support_k =
        static_cast<int>(cfg.integer("candidate_support_k", e.solver.candidate_support_k));
    e.solver.candidate_polish =
        static_cast<int>(cfg.integer("candidate_polish", e.solver.candidate_polish));
    e.solver.restarts = static_cast<int>(cfg.integer("restarts", e.solver.restarts));
    e.solver.restart_seed =
        static_cast<std::uint64_t>(cfg.integer("restart_seed", 0));
    e.colasso_lambda = cfg.real("colasso_lambda", e.colasso_lambda);
    e.record_timings = cfg.boolean("record_timings", e.record_timings);
    return e;
}

fs::path prepare_out(const std::string& out_dir) {
    fs::path p(out_dir);
    fs::create_directories(p);
    return p;
}

int cmd_gen(const Config& cfg, const std::string& out_dir, std::uint64_t seed) {
    cfg.reject_unknown(kExperimentKeys);
    const ExperimentConfig e = experiment_config(cfg, seed, 1);
    const int l = static_cast<int>(cfg.integer("L", e.l_grid.front()));
    if (l < 1) throw config_error("key 'L': must be >= 1");
    e.validate();

    const Eigen::MatrixXd a =
        sample_gaussian_matrix(e.m, e.n, e.matrix_normalization, derive_seed(seed, 1));
    SourceSpec spec;
    spec.n = e.n;
    spec.max_support_size = e.k_true;
    spec.gamma_min = e.gamma_min;
    spec.gamma_max = e.gamma_max;
    const SourceSpec realized =
        sample_source(spec, SupportPolicy::kUniformRandom, derive_seed(seed, 2));
    const MmvInstance inst = synthesize_mmv(realized, a, l, e.sigma2, derive_seed(seed, 3));

    const fs::path out = prepare_out(out_dir);
    write_matrix_csv((out / "A.csv").string(), inst.a);
    write_matrix_csv((out / "X.csv").string(), inst.x);
    write_matrix_csv((out / "Y.csv").string(), inst.y);
    {
        std::ofstream os(out / "support.txt");
        for (std::size_t i = 0; i < realized.support.size(); ++i)
            os << (i ? ";" : "") << realized.support[i];
        os << '\n';
    }
    std::cout << "gen: wrote A(" << e.m << 'x' << e.n << "), X, Y (L=" << l << ", k="
              << realized.support.size() << ") under " << out.string() << '\n';
    return 0;
}

int cmd_recover(const Config& cfg, const std::string& out_dir, std::uint64_t seed,
                const std::string& matrix_path) {
    cfg.reject_unknown(kExperimentKeys);
    (void)seed;
    if (matrix_path.empty()) throw config_error("recover: --matrix is required");
    const fs::path dir = fs::path(matrix_path).parent_path();
    const Eigen::MatrixXd a = read_matrix_csv(matrix_path);
    const fs::path ypath = dir / "Y.csv";
    if (!fs::exists(ypath))
        throw config_error("recover: expected observations at " + ypath.string());
    const Eigen::MatrixXd y = read_matrix_csv(ypath.string());

    const ExperimentConfig e = experiment_config(cfg, seed, 1);
    RecoveryResult r;
    switch (e.algorithm) {
        case Algorithm::kMsbl:
            r = msbl::msbl(y, a, e.sigma2, e.solver);
            break;
        case Algorithm::kCmsbl:
            r = cmsbl(y, a, e.sigma2, e.K, e.gamma_min, e.gamma_max, e.solver);
            break;
        default:
            throw config_error("recover: algorithm must be msbl or cmsbl");
    }
    std::vector<int> support =
        e.extraction == ExtractionPolicy::kTopK
            ? extract_support_top_k(r.gamma_hat, e.k_true).indices
            : extract_support_threshold(r.gamma_hat, e.solver.extraction_tau).indices;

    const fs::path out = prepare_out(out_dir);
    {
        std::ofstream os(out / "recovery.csv");
        os << r.to_csv_row() << '\n';
    }
    {
        std::ofstream os(out / "support_hat.txt");
        std::sort(support.begin(), support.end());
        for (std::size_t i = 0; i < support.size(); ++i) os << (i ? ";" : "") << support[i];
        os << '\n';
    }
    std::cout << "recover: iters=" << r.iters << " converged=" << (r.converged ? 1 : 0)
              << " |support|=" << support.size() << '\n';
    return 0;
}

int cmd_rip(const Config& cfg, const std::string& out_dir, std::uint64_t seed,
            const std::string& matrix_path, int order, const std::string& method,
            bool khatri_rao_mode) {
    cfg.reject_unknown(kExperimentKeys);
    if (matrix_path.empty()) throw config_error("rip: --matrix is required");
    if (order < 1) throw config_error("rip: --order must be >= 1");
    const Eigen::MatrixXd a = read_matrix_csv(matrix_path);

    RicEstimate est;
    const std::uint64_t trials =
        static_cast<std::uint64_t>(cfg.integer("ric_trials", 2000));
    if (method == "exhaustive") {
        est = khatri_rao_mode ? kr_ric(a, order, RicMethod::kExhaustive)
                              : ric_exhaustive(a, order);
    } else if (method == "randomized") {
        est = khatri_rao_mode ? kr_ric(a, order, RicMethod::kRandomized, trials, seed)
                              : ric_randomized(a, order, trials, seed);
    } else {
        throw config_error("rip: --method must be exhaustive or randomized");
    }

    const fs::path out = prepare_out(out_dir);
    {
        std::ofstream os(out / "ric.csv");
        os << "order,lower,upper,method,trials\n" << est.to_csv_row() << '\n';
    }
    std::cout << est.to_csv_row() << '\n';
    return 0;
}

int cmd_bounds(const Config& cfg, const std::string& out_dir, std::uint64_t seed,
               const std::string& matrix_path) {
    cfg.reject_unknown(kExperimentKeys);
    const double delta = cfg.real("delta", 0.1);
    BoundsReport report;
    if (!matrix_path.empty()) {
        const Eigen::MatrixXd a = read_matrix_csv(matrix_path);
        const ExperimentConfig e = experiment_config(cfg, seed, 1);
        const int order = std::min(2 * e.K, static_cast<int>(a.cols()));
        double ric_kr, ric_a;
        if (cfg.has("ric_kr_2k_override")) {
            ric_kr = cfg.real("ric_kr_2k_override", 0.0);
            ric_a = cfg.real("ric_a_2k_override", ric_kr);
        } else if (binomial(static_cast<int>(a.cols()), order) <= kRicSubsetBudget) {
            ric_kr = kr_ric(a, order, RicMethod::kExhaustive).lower;
            ric_a = ric_exhaustive(a, order).lower;
        } else {
            const std::uint64_t trials =
                static_cast<std::uint64_t>(cfg.integer("ric_trials", 2000));
            ric_kr = kr_ric(a, order, RicMethod::kRandomized, trials,
                            derive_seed(seed, 0x3000)).lower;
            ric_a = ric_randomized(a, order, trials, derive_seed(seed, 0x3001)).lower;
        }
        const SupMode mode = binomial(static_cast<int>(a.cols()), order) <= kRicSubsetBudget
                                 ? SupMode::kExact
                                 : SupMode::kRipRelaxed;
        report = make_bounds_report(a, e.K, e.sigma2, e.gamma_min, e.gamma_max, delta,
                                    ric_kr, ric_a, mode);
    } else {
        const ExperimentConfig e = experiment_config(cfg, seed, 1);
        e.validate();
        report = bounds_for_config(e, delta);
    }

    const fs::path out = prepare_out(out_dir);
    {
        std::ofstream os(out / "bounds.csv");
        os << BoundsReport::csv_header() << '\n' << report.to_csv_row() << '\n';
    }
    std::cout << "bounds: eta=" << format_double(report.eta)
              << " L_thm3=" << format_double(report.l_sufficient_thm3) << '\n';
    return 0;
}

int cmd_simulate(const Config& cfg, const std::string& out_dir, std::uint64_t seed,
                 int threads) {
    cfg.reject_unknown(kExperimentKeys);
    const ExperimentConfig e = experiment_config(cfg, seed, threads);
    e.validate();
    const std::vector<CellResult> cells = error_curve(e);

    const fs::path out = prepare_out(out_dir);
    write_error_curve_csv((out / "results.csv").string(), cells);
    write_error_curve_svg((out / "results.svg").string(), cells);

    std::vector<BoundsReport> reports(cells.size(),
                                      bounds_for_config(e, cfg.real("delta", 0.1)));
    write_bounds_companion_csv((out / "results_bounds.csv").string(), reports);

    for (const CellResult& c : cells)
        std::cout << "L=" << c.l << " successes=" << c.successes << '/' << c.trials
                  << " error_rate=" << format_double(c.error_rate) << '\n';

    try {
        const DecayFit fit = decay_fit(cells);
        const int resamples = static_cast<int>(cfg.integer("bootstrap_resamples", 1000));
        const double p = decay_slope_bootstrap_pvalue(cells, resamples,
                                                      derive_seed(seed, 0x4000));
        std::ofstream os(out / "decay.csv");
        os << "slope,intercept,r2,used_cells,excluded_cells,p_value\n"
           << format_double(fit.slope) << ',' << format_double(fit.intercept) << ','
           << format_double(fit.r2) << ',' << fit.used_cells << ',' << fit.excluded_cells
           << ',' << format_double(p) << '\n';
        std::cout << "decay: slope=" << format_double(fit.slope)
                  << " p=" << format_double(p) << '\n';
    } catch (const std::runtime_error&) {
        std::cout << "decay: skipped (fewer than 3 cells with rate in (0,1))\n";
    }
    return 0;
}

int cmd_phase(const Config& cfg, const std::string& out_dir, std::uint64_t seed,
              int threads) {
    cfg.reject_unknown(kExperimentKeys);
    ExperimentConfig e = experiment_config(cfg, seed, threads);
    const std::vector<int> m_grid = cfg.int_list("m_grid", {4, 6, 8, 10});
    const std::vector<int> k_grid = cfg.int_list("k_grid", {1, 2, 3, 4});
    const PhaseDiagram pd = phase_diagram(e, m_grid, k_grid);

    const fs::path out = prepare_out(out_dir);
    write_phase_csv((out / "phase.csv").string(), pd);
    write_phase_svg((out / "phase.svg").string(), pd);
    for (std::size_t mi = 0; mi < pd.m_grid.size(); ++mi)
        for (std::size_t ki = 0; ki < pd.k_grid.size(); ++ki)
            std::cout << "m=" << pd.m_grid[mi] << " k=" << pd.k_grid[ki]
                      << " error_rate=" << format_double(pd.error_rate[mi][ki]) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"M-SBL joint sparse support recovery toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    std::string matrix_path;
    std::string method = "exhaustive";
    std::uint64_t seed = 1;
    int threads = 1;
    int order = 1;
    bool khatri_rao_mode = false;
    std::vector<std::string> overrides;

    app.add_option("--config", config_path, "Path to a key=value config file");
    app.add_option("--out", out_dir, "Output directory (created if absent)");
    app.add_option("--seed", seed, "Master seed; all randomness derives from it");
    app.add_option("--threads", threads, "Worker threads for Monte Carlo cells");
    app.add_option("--set", overrides,
                   "key=value config override (repeatable, wins over --config)");

    auto* gen = app.add_subcommand("gen", "Generate a seeded MMV instance (A, X, Y)");
    auto* recover =
        app.add_subcommand("recover", "Run a solver on files produced by gen");
    auto* rip = app.add_subcommand("rip", "Estimate a restricted isometry constant");
    auto* bounds = app.add_subcommand("bounds", "Emit the certificate row for a setup");
    auto* simulate = app.add_subcommand("simulate", "Error-vs-L Monte Carlo curve");
    auto* phase = app.add_subcommand("phase", "m-vs-k phase diagram");

    recover->add_option("--matrix", matrix_path, "Measurement matrix CSV (A.csv)");
    rip->add_option("--matrix", matrix_path, "Matrix CSV to audit")->required();
    rip->add_option("--order", order, "RIC order k")->required();
    rip->add_option("--method", method, "exhaustive | randomized");
    rip->add_flag("--khatri-rao", khatri_rao_mode, "Audit the self Khatri-Rao product");
    bounds->add_option("--matrix", matrix_path, "Matrix CSV (optional; sampled otherwise)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        cfg.apply_overrides(overrides);
        if (cfg.has("seed")) seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
        if (cfg.has("threads")) threads = static_cast<int>(cfg.integer("threads", 1));
        if (threads < 1) throw config_error("threads must be >= 1");

        if (gen->parsed()) return cmd_gen(cfg, out_dir, seed);
        if (recover->parsed()) return cmd_recover(cfg, out_dir, seed, matrix_path);
        if (rip->parsed())
            return cmd_rip(cfg, out_dir, seed, matrix_path, order, method, khatri_rao_mode);
        if (bounds->parsed()) return cmd_bounds(cfg, out_dir, seed, matrix_path);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir, seed, threads);
        if (phase->parsed()) return cmd_phase(cfg, out_dir, seed, threads);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
