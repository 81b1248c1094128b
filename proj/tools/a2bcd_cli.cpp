// Command-line front end: run solvers on synthetic or LIBSVM problems, dry
// runs for delay estimation, lower-bound experiments, and ODE studies.
// Artifacts (trace CSV, staleness CSV, summary, plot script) land under --out
// with a manifest of file hashes. Exit codes: 0 success, 1 numeric failure,
// 2 configuration/IO error.

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "a2bcd/a2bcd.hpp"

namespace fs = std::filesystem;
using namespace a2bcd;

namespace {

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

class ArtifactDir {
public:
    explicit ArtifactDir(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw std::invalid_argument("cannot create output directory " + dir);
    }

    const fs::path& path() const { return dir_; }

    std::ofstream open(const std::string& name) {
        std::ofstream out(dir_ / name);
        if (!out) throw std::invalid_argument("cannot write " + (dir_ / name).string());
        files_.push_back(name);
        return out;
    }

    void write_manifest() {
        std::ofstream out(dir_ / "manifest.txt");
        char line[64];
        for (const auto& name : files_) {
            std::snprintf(line, sizeof line, "%016" PRIx64 "  ", fnv1a_file(dir_ / name));
            out << line << name << '\n';
        }
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Sub-optimality panels from trace.csv (suboptimality vs time or iteration)."""
import csv, os, sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "trace.csv"))))
k = [int(r["k"]) for r in rows]
sec = [float(r["seconds"]) for r in rows]
gap = [float(r["f_y_gap"]) for r in rows]
x, xlabel = (sec, "seconds") if any(s > 0 for s in sec) else (k, "iteration")
plt.figure(figsize=(5, 4))
plt.semilogy([xi for xi, g in zip(x, gap) if g > 0], [g for g in gap if g > 0])
plt.xlabel(xlabel)
plt.ylabel("f(y) - f*")
plt.grid(True, which="both", alpha=0.3)
plt.tight_layout()
out = os.path.join(here, "suboptimality.png")
plt.savefig(out, dpi=150)
print(out)
)PY";

struct SolveSpec {
    std::string problem = "synth";
    std::string data_path;
    std::size_t dim_override = 0;
    double lambda = 1e-3;
    std::string lambda_sweep;
    std::size_t features = 200, samples = 500;
    double density = 0.1;
    double kappa = 100;
    std::size_t blocks = 32, block_size = 4;
    std::string solver = "nu_acdm";
    std::string engine = "auto";
    std::string delay = "constant";
    std::string variant = "main";
    std::size_t workers = 1;
    std::size_t tau = 0;
    double psi = -1;  // <0: derived from tau
    bool strict = false;
    std::uint64_t seed = 0;
    std::uint64_t iters = 0;
    double seconds = 0;
    std::uint64_t checkpoint_every = 0;
    std::size_t staleness_cap = 0;
    std::string out_dir = "out";
};

// Flat `key = value` config file; keys are the long option names. Explicit
// command-line flags win over file values.
void apply_config_file(const std::string& path, SolveSpec& spec, const CLI::App& cmd,
                       bool& tau_set, bool& psi_set) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    const auto given = [&](const char* name) {
        const auto* opt = cmd.get_option(std::string("--") + name);
        return opt->count() > 0;
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = true;
            for (const char ch : line) blank &= std::isspace(static_cast<unsigned char>(ch)) != 0;
            if (blank) continue;
            throw ParseError("expected key = value in config", lineno);
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty config key", lineno);
        if (given(key.c_str())) continue;  // command line wins
        try {
            if (key == "problem") spec.problem = value;
            else if (key == "data") spec.data_path = value;
            else if (key == "dim-override") spec.dim_override = std::stoull(value);
            else if (key == "lambda") spec.lambda = std::stod(value);
            else if (key == "lambda-sweep") spec.lambda_sweep = value;
            else if (key == "features") spec.features = std::stoull(value);
            else if (key == "samples") spec.samples = std::stoull(value);
            else if (key == "density") spec.density = std::stod(value);
            else if (key == "kappa") spec.kappa = std::stod(value);
            else if (key == "blocks") spec.blocks = std::stoull(value);
            else if (key == "block-size") spec.block_size = std::stoull(value);
            else if (key == "solver") spec.solver = value;
            else if (key == "engine") spec.engine = value;
            else if (key == "delay") spec.delay = value;
            else if (key == "variant") spec.variant = value;
            else if (key == "workers") spec.workers = std::stoull(value);
            else if (key == "tau") { spec.tau = std::stoull(value); tau_set = true; }
            else if (key == "psi") { spec.psi = std::stod(value); psi_set = true; }
            else if (key == "strict") spec.strict = value == "1" || value == "true";
            else if (key == "seed") spec.seed = std::stoull(value);
            else if (key == "iters") spec.iters = std::stoull(value);
            else if (key == "seconds") spec.seconds = std::stod(value);
            else if (key == "checkpoint-every") spec.checkpoint_every = std::stoull(value);
            else if (key == "staleness-cap") spec.staleness_cap = std::stoull(value);
            else if (key == "out") spec.out_dir = value;
            else throw ParseError("unknown config key '" + key + "'", lineno);
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value for config key '" + key + "'", lineno);
        } catch (const std::out_of_range&) {
            throw ParseError("bad value for config key '" + key + "'", lineno);
        }
    }
}

std::unique_ptr<ProblemOracle> build_oracle(const SolveSpec& s) {
    if (s.problem == "synth") {
        return std::make_unique<SynthQuadratic>(s.blocks, s.block_size, s.kappa, s.seed + 1);
    }
    if (s.problem == "ridge-synth") {
        auto A = make_synthetic_design(s.features, s.samples, s.density, s.seed + 1);
        auto l = make_synthetic_labels(s.samples, s.seed + 2);
        return std::make_unique<RidgeDualOracle>(std::move(A), std::move(l), s.lambda, s.block_size);
    }
    if (s.problem == "ridge") {
        std::ifstream in(s.data_path);
        if (!in) throw std::invalid_argument("cannot open dataset " + s.data_path);
        auto data = parse_libsvm(in, s.dim_override ? std::optional(s.dim_override) : std::nullopt);
        return std::make_unique<RidgeDualOracle>(std::move(data.features), std::move(data.labels),
                                                 s.lambda, s.block_size);
    }
    throw std::invalid_argument("unknown problem '" + s.problem + "'");
}

Schedule build_schedule(const SolveSpec& s, const ProblemParams& params) {
    if (s.variant == "extension") return make_extension_schedule(params, s.tau);
    if (s.variant != "main") throw std::invalid_argument("unknown variant '" + s.variant + "'");
    if (s.psi >= 0) return make_schedule_psi(params, s.psi, s.tau, s.strict);
    return make_schedule(params, s.tau, s.strict);
}

void write_summary(ArtifactDir& dir, const std::map<std::string, std::string>& kv) {
    auto out = dir.open("summary.txt");
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_solve_single(const SolveSpec& spec) {
    ArtifactDir dir(spec.out_dir);
    auto oracle = build_oracle(spec);
    const auto& params = oracle->params();

    double f_star;
    bool derived = false;
    if (auto fs_known = oracle->min_value()) {
        f_star = *fs_known;
    } else {
        f_star = presolve_f_star(*oracle, 1e-10);
        derived = true;
    }

    std::map<std::string, std::string> summary;
    summary["problem"] = spec.problem;
    summary["solver"] = spec.solver;
    summary["seed"] = std::to_string(spec.seed);
    summary["dim"] = std::to_string(oracle->dim());
    summary["blocks"] = std::to_string(oracle->partition().n_blocks());
    summary["sigma"] = fmt(params.sigma);
    summary["kappa"] = fmt(params.kappa);
    summary["f_star_oracle_derived"] = derived ? "1" : "0";

    Trace trace;
    bool deterministic = true;
    const ParallelResult* presult = nullptr;
    ParallelResult parallel_result;

    if (spec.solver == "rbcd" || spec.solver == "nu_acdm") {
        if (spec.iters == 0) throw std::invalid_argument("this solver needs --iters");
        RunConfig cfg;
        cfg.budget = spec.iters;
        cfg.seed = spec.seed;
        cfg.checkpoint_every = spec.checkpoint_every;
        cfg.f_star = f_star;
        trace = spec.solver == "rbcd" ? rbcd_run(*oracle, cfg) : nu_acdm_run(*oracle, cfg);
    } else if (spec.solver == "a2bcd") {
        const Schedule sched = build_schedule(spec, params);
        summary["psi"] = fmt(sched.psi);
        summary["alpha"] = fmt(sched.alpha);
        summary["beta"] = fmt(sched.beta);
        summary["h"] = fmt(sched.h);
        summary["tau"] = std::to_string(sched.tau);
        summary["theory_valid"] = sched.theory_valid ? "1" : "0";
        if (!sched.theory_valid)
            std::cerr << "warning: psi = " << sched.psi << " exceeds the 3/7 theory window\n";

        const bool parallel = spec.engine == "parallel" || (spec.engine == "auto" && spec.workers > 1);
        if (!parallel) {
            if (spec.iters == 0) throw std::invalid_argument("simulated runs need --iters");
            DelaySchedule delays = DelaySchedule::zero();
            if (spec.delay == "constant") delays = DelaySchedule::constant(sched.tau);
            else if (spec.delay == "uniform") delays = DelaySchedule::uniform_random(sched.tau, spec.seed + 3);
            else if (spec.delay != "zero") throw std::invalid_argument("unknown delay mode '" + spec.delay + "'");
            RunConfig cfg;
            cfg.budget = spec.iters;
            cfg.seed = spec.seed;
            cfg.checkpoint_every = spec.checkpoint_every;
            cfg.f_star = f_star;
            trace = a2bcd_simulated_run(*oracle, sched, delays, cfg);
            summary["engine"] = "simulated";
        } else {
            ParallelOptions opt;
            opt.workers = spec.workers;
            opt.budget = spec.iters;
            opt.duration_seconds = spec.seconds;
            opt.seed = spec.seed;
            opt.checkpoint_every = spec.checkpoint_every;
            opt.staleness_cap = spec.staleness_cap;
            opt.f_star = f_star;
            parallel_result = run_parallel(*oracle, sched, opt);
            presult = &parallel_result;
            trace = parallel_result.trace;
            deterministic = spec.workers == 1;
            summary["engine"] = "parallel";
            summary["workers"] = std::to_string(spec.workers);
            summary["iterations"] = std::to_string(parallel_result.iterations);
            summary["tau_hat"] = std::to_string(parallel_result.staleness.max_observed);
            if (!deterministic)
                summary["wall_seconds"] = fmt(parallel_result.wall_seconds);
        }
    } else {
        throw std::invalid_argument("unknown solver '" + spec.solver + "'");
    }

    if (!trace.rows.empty()) {
        summary["final_k"] = std::to_string(trace.rows.back().k);
        summary["final_f_y_gap"] = fmt(trace.rows.back().f_y_gap);
        summary["final_f_x_gap"] = fmt(trace.rows.back().f_x_gap);
    }

    {
        auto out = dir.open("trace.csv");
        trace.to_csv(out);
    }
    if (presult) {
        auto out = dir.open("staleness.csv");
        presult->staleness.to_csv(out);
    }
    {
        auto out = dir.open("plot.py");
        out << kPlotScript;
    }
    write_summary(dir, summary);
    dir.write_manifest();
    std::cout << "wrote " << dir.path().string() << " (final f_y gap "
              << (trace.rows.empty() ? 0.0 : trace.rows.back().f_y_gap) << ")\n";
    return 0;
}

int run_solve(const SolveSpec& spec) {
    if (spec.lambda_sweep.empty()) return run_solve_single(spec);
    std::vector<double> lambdas;
    std::stringstream ss(spec.lambda_sweep);
    std::string tok;
    while (std::getline(ss, tok, ',')) lambdas.push_back(std::stod(tok));
    if (lambdas.empty()) throw std::invalid_argument("empty lambda sweep");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        SolveSpec one = spec;
        one.lambda = lambdas[i];
        one.lambda_sweep.clear();
        one.out_dir = (fs::path(spec.out_dir) / ("lambda_" + std::to_string(i))).string();
        std::cout << "lambda = " << lambdas[i] << ":\n";
        if (const int rc = run_solve_single(one)) return rc;
    }
    return 0;
}

int run_dryrun(const SolveSpec& spec) {
    if (!(spec.seconds > 0)) throw std::invalid_argument("dry run needs --seconds > 0");
    ArtifactDir dir(spec.out_dir);
    auto oracle = build_oracle(spec);
    ParallelOptions opt;
    opt.workers = spec.workers;
    opt.duration_seconds = spec.seconds;
    opt.seed = spec.seed;
    opt.dry_run = true;
    const Schedule sched = make_schedule(oracle->params(), 0);
    const ParallelResult res = run_parallel(*oracle, sched, opt);
    {
        auto out = dir.open("staleness.csv");
        res.staleness.to_csv(out);
    }
    std::map<std::string, std::string> summary;
    summary["workers"] = std::to_string(spec.workers);
    summary["tau_hat"] = std::to_string(res.staleness.max_observed);
    summary["updates"] = std::to_string(res.staleness.samples);
    write_summary(dir, summary);
    dir.write_manifest();
    std::cout << "tau_hat = " << res.staleness.max_observed << "\n"
              << "staleness histogram: " << (dir.path() / "staleness.csv").string() << "\n";
    return 0;
}

struct LowerBoundSpec {
    std::string kappas = "9,9";
    std::uint64_t k = 10;
    std::size_t b = 20;
    std::size_t trials = 500;
    std::string solvers = "rbcd,nu_acdm";
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

int run_lowerbound(const LowerBoundSpec& spec) {
    std::vector<double> kappas;
    {
        std::stringstream ss(spec.kappas);
        std::string tok;
        while (std::getline(ss, tok, ',')) kappas.push_back(std::stod(tok));
    }
    if (kappas.size() < 2) throw std::invalid_argument("need at least two kappa values");

    ArtifactDir dir(spec.out_dir);
    const double sigma = 1.0;
    std::vector<double> L(kappas.size());
    for (std::size_t i = 0; i < kappas.size(); ++i) L[i] = sigma * kappas[i];
    WorstCaseProblem problem(sigma, L, spec.b);

    auto out = dir.open("lowerbound.csv");
    out << "solver,block,p,empirical,stderr,bound,closed_form,violation\n";
    std::cout << "solver  block  empirical      bound          verdict\n";
    bool any_violation = false;

    std::stringstream solvers(spec.solvers);
    std::string solver;
    while (std::getline(solvers, solver, ',')) {
        std::vector<double> probs;
        if (solver == "rbcd") {
            probs.assign(kappas.size(), 1.0 / static_cast<double>(kappas.size()));
        } else if (solver == "nu_acdm") {
            BlockSampler sampler(problem.params(), 0);
            probs = sampler.probabilities();
        } else {
            throw std::invalid_argument("unknown solver '" + solver + "' for the lower bound");
        }
        const LowerBoundResult bound = lower_bound_ratio(kappas, probs, spec.k, spec.b);

        for (std::size_t block = 0; block < kappas.size(); ++block) {
            const std::vector<double> x0 = problem.adversarial_start(block);
            double denom = 0;
            for (std::size_t j = 0; j < x0.size(); ++j) {
                const double d = x0[j] - (*problem.minimizer())[j];
                denom += d * d;
            }
            double mean = 0, m2 = 0;
            for (std::size_t trial = 0; trial < spec.trials; ++trial) {
                const std::uint64_t trial_seed = spec.seed + 1000003ULL * trial + block;
                double ratio = 0;
                if (solver == "rbcd") {
                    std::vector<double> x = x0, grad(problem.partition().size(0));
                    auto rng = make_rng(trial_seed);
                    for (std::uint64_t it = 0; it < spec.k; ++it)
                        rbcd_step(problem, x, uniform_index(rng, kappas.size()), grad);
                    ratio = problem.block_sq_distance(x, block) / denom;
                } else {
                    NuAcdmSolver s(problem, trial_seed, x0);
                    for (std::uint64_t it = 0; it < spec.k; ++it) s.step();
                    ratio = problem.block_sq_distance(s.state().x, block) / denom;
                }
                mean += ratio;
                m2 += ratio * ratio;
            }
            mean /= static_cast<double>(spec.trials);
            const double var =
                std::max(0.0, m2 / static_cast<double>(spec.trials) - mean * mean);
            const double se = std::sqrt(var / static_cast<double>(spec.trials));
            const bool violation = mean < bound.per_block[block] - 2.0 * se;
            any_violation |= violation;
            out << solver << ',' << block << ',' << fmt(probs[block]) << ',' << fmt(mean) << ','
                << fmt(se) << ',' << fmt(bound.per_block[block]) << ',' << fmt(bound.closed_form)
                << ',' << (violation ? 1 : 0) << '\n';
            std::printf("%-7s %-6zu %-14.6g %-14.6g %s\n", solver.c_str(), block, mean,
                        bound.per_block[block], violation ? "VIOLATION" : "ok");
        }
    }
    dir.write_manifest();
    if (any_violation) std::cout << "lower-bound violations detected\n";
    return 0;
}

struct OdeSpec {
    std::size_t n = 2;
    double kappa = 4;
    std::size_t dim = 2;
    double step = 0;      // 0: auto
    double horizon = 10;
    double tau = 0;
    std::string mode = "constant";
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

int run_ode(const OdeSpec& spec) {
    ArtifactDir dir(spec.out_dir);
    // anisotropic quadratic with sigma = 1, largest curvature kappa
    std::vector<double> eig(spec.dim);
    for (std::size_t j = 0; j < spec.dim; ++j)
        eig[j] = spec.dim == 1 ? spec.kappa
                               : std::pow(spec.kappa, static_cast<double>(j) /
                                                          static_cast<double>(spec.dim - 1));
    OdeProblem f;
    f.dim = spec.dim;
    f.value = [eig](std::span<const double> yv) {
        double s = 0;
        for (std::size_t j = 0; j < yv.size(); ++j) s += 0.5 * eig[j] * yv[j] * yv[j];
        return s;
    };
    f.grad = [eig](std::span<const double> yv, std::span<double> g) {
        for (std::size_t j = 0; j < yv.size(); ++j) g[j] = eig[j] * yv[j];
    };

    OdeConfig cfg;
    cfg.eta = static_cast<double>(spec.n) * std::sqrt(spec.kappa);
    cfg.tau = spec.tau;
    cfg.horizon = spec.horizon;
    cfg.step = spec.step > 0 ? spec.step : (spec.tau > 0 ? spec.tau / 20.0 : 1e-3);
    cfg.mode = spec.mode == "random" ? OdeDelayMode::piecewise_random : OdeDelayMode::constant;
    cfg.seed = spec.seed;

    std::vector<double> y0(spec.dim, 1.0), v0(spec.dim, 0.0);
    const OdeTrajectory traj =
        spec.tau > 0 ? integrate_delayed(f, y0, v0, cfg) : integrate_sync(f, y0, v0, cfg);

    const double r = 1.0 / cfg.eta;
    const double c0 = 6.0 * spec.kappa * spec.kappa / cfg.eta * spec.tau * spec.tau;
    {
        auto out = dir.open("trajectory.csv");
        ode_trajectory_csv(traj, f, c0, r, out);
    }

    bool e_monotone = true, comp_monotone = true;
    double e_prev = 0, comp_prev = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        const double e = ode_energy(f, cfg.eta, t, traj.y[i], traj.v[i]);
        double comp = e;
        if (spec.tau > 0)
            comp += std::exp(t / cfg.eta) * async_error_terms(traj, t, c0, r, spec.tau).A;
        if (i > 0) {
            if (e > e_prev + 1e-9 * (1.0 + std::abs(e_prev))) e_monotone = false;
            if (comp > comp_prev + 1e-8 * (1.0 + std::abs(comp_prev))) comp_monotone = false;
        }
        e_prev = e;
        comp_prev = comp;
    }
    std::cout << "E monotone: " << (e_monotone ? "yes" : "no") << "\n";
    std::cout << "composite monotone: " << (comp_monotone ? "yes" : "no") << "\n";
    if (spec.tau == 0) std::cout << "composite equals E (tau = 0)\n";
    dir.write_manifest();
    return 0;
}

void add_problem_options(CLI::App* cmd, SolveSpec& spec) {
    cmd->add_option("--problem", spec.problem, "synth | ridge | ridge-synth");
    cmd->add_option("--data", spec.data_path, "LIBSVM dataset path (ridge)");
    cmd->add_option("--dim-override", spec.dim_override, "declared feature count for the dataset");
    cmd->add_option("--lambda", spec.lambda, "ridge regularization");
    cmd->add_option("--features", spec.features, "synthetic ridge feature count");
    cmd->add_option("--samples", spec.samples, "synthetic ridge sample count");
    cmd->add_option("--density", spec.density, "synthetic ridge nonzero density");
    cmd->add_option("--kappa", spec.kappa, "synthetic quadratic condition number");
    cmd->add_option("--blocks", spec.blocks, "synthetic quadratic block count");
    cmd->add_option("--block-size", spec.block_size, "coordinates per block");
    cmd->add_option("--seed", spec.seed, "RNG seed");
    cmd->add_option("--out", spec.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asynchronous accelerated block coordinate descent bench"};
    app.require_subcommand(1);

    SolveSpec solve_spec;
    std::string solve_config;
    auto* solve = app.add_subcommand("solve", "run a solver and write trace artifacts");
    solve->add_option("--config", solve_config, "flat key = value config file");
    add_problem_options(solve, solve_spec);
    solve->add_option("--solver", solve_spec.solver, "a2bcd | nu_acdm | rbcd");
    solve->add_option("--engine", solve_spec.engine, "auto | sim | parallel (a2bcd)");
    solve->add_option("--delay", solve_spec.delay, "zero | constant | uniform (simulated a2bcd)");
    solve->add_option("--variant", solve_spec.variant, "main | extension");
    solve->add_option("--workers", solve_spec.workers, "parallel worker count");
    auto* tau_opt = solve->add_option("--tau", solve_spec.tau, "max delay bound");
    auto* psi_opt = solve->add_option("--psi", solve_spec.psi, "pin psi directly");
    solve->add_flag("--strict", solve_spec.strict, "reject psi outside the theory window");
    solve->add_option("--iters", solve_spec.iters, "iteration budget");
    solve->add_option("--seconds", solve_spec.seconds, "wall-clock budget (parallel)");
    solve->add_option("--checkpoint-every", solve_spec.checkpoint_every, "trace cadence");
    solve->add_option("--staleness-cap", solve_spec.staleness_cap, "cooperative delay throttle");
    solve->add_option("--lambda-sweep", solve_spec.lambda_sweep, "comma list of lambdas");

    SolveSpec dry_spec;
    auto* dryrun = app.add_subcommand("dryrun", "measure realistic staleness (zeroed updates)");
    add_problem_options(dryrun, dry_spec);
    dryrun->add_option("--workers", dry_spec.workers, "worker count");
    dryrun->add_option("--seconds", dry_spec.seconds, "dry-run duration");

    LowerBoundSpec lb_spec;
    auto* lowerbound = app.add_subcommand("lowerbound", "worst-case problem vs the complexity bound");
    lowerbound->add_option("--kappas", lb_spec.kappas, "per-block condition numbers");
    lowerbound->add_option("--k", lb_spec.k, "iteration count");
    lowerbound->add_option("--b", lb_spec.b, "per-block dimension");
    lowerbound->add_option("--trials", lb_spec.trials, "Monte Carlo trials");
    lowerbound->add_option("--solvers", lb_spec.solvers, "comma list: rbcd,nu_acdm");
    lowerbound->add_option("--seed", lb_spec.seed, "RNG seed");
    lowerbound->add_option("--out", lb_spec.out_dir, "output directory");

    OdeSpec ode_spec;
    auto* ode = app.add_subcommand("ode", "continuous-time limit study");
    ode->add_option("--n", ode_spec.n, "block count entering eta");
    ode->add_option("--kappa", ode_spec.kappa, "condition number entering eta");
    ode->add_option("--dim", ode_spec.dim, "quadratic dimension");
    ode->add_option("--step", ode_spec.step, "integration step (0: auto)");
    ode->add_option("--horizon", ode_spec.horizon, "integration horizon");
    ode->add_option("--tau", ode_spec.tau, "continuous delay (0: synchronous)");
    ode->add_option("--mode", ode_spec.mode, "constant | random delay");
    ode->add_option("--seed", ode_spec.seed, "RNG seed");
    ode->add_option("--out", ode_spec.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*solve) {
            bool tau_set = tau_opt->count() > 0, psi_set = psi_opt->count() > 0;
            if (!solve_config.empty())
                apply_config_file(solve_config, solve_spec, *solve, tau_set, psi_set);
            if (tau_set && psi_set)
                throw std::invalid_argument("set exactly one of --tau / --psi");
            if (psi_set && solve_spec.tau == 0 && solve_spec.psi > 0)
                solve_spec.tau = 1;  // a pinned psi implies some delay window
            return run_solve(solve_spec);
        }
        if (*dryrun) return run_dryrun(dry_spec);
        if (*lowerbound) return run_lowerbound(lb_spec);
        if (*ode) return run_ode(ode_spec);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
