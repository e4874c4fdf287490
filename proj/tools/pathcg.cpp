// pathcg command-line driver: generate, solve, bench, sweep-l.

#include <pathcg/bench.hpp>
#include <pathcg/ipm.hpp>
#include <pathcg/problem.hpp>
#include <pathcg/problem_io.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

using namespace pathcg;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct CommonSolveFlags {
    double eps_ipm = 1e-6;
    double eps_pcg = 1e-9;
    double eps_feas = 1e-6;
    double sigma = 0.1;
    int max_newton = 50;
    int threads = 0;
    bool deterministic = false;

    void attach(CLI::App *app) {
        app->add_option("--eps-ipm", eps_ipm, "Duality gap tolerance")->check(CLI::PositiveNumber);
        app->add_option("--eps-pcg", eps_pcg, "Inner residual tolerance (infinity norm)")->check(CLI::PositiveNumber);
        app->add_option("--eps-feas", eps_feas, "Primal/dual residual tolerance")->check(CLI::PositiveNumber);
        app->add_option("--sigma", sigma, "Centering parameter")->check(CLI::Range(0.0, 1.0));
        app->add_option("--max-newton", max_newton, "Newton step cap")->check(CLI::PositiveNumber);
        app->add_option("--threads", threads, "Worker threads (0: OpenMP default, 1: serial)")
            ->check(CLI::NonNegativeNumber);
        app->add_flag("--deterministic", deterministic, "Zero the timing columns for byte-stable CSV");
    }

    [[nodiscard]] IpmConfig config(InnerSolver solver, int L) const {
        IpmConfig cfg;
        cfg.eps_ipm = eps_ipm;
        cfg.eps_inner = eps_pcg;
        cfg.eps_feas = eps_feas;
        cfg.sigma = sigma;
        cfg.max_newton = max_newton;
        cfg.solver = solver;
        cfg.L = L;
        cfg.exec = Exec{threads};
        return cfg;
    }
};

// CSV sink: stdout unless --out was given.
class Output {
  public:
    explicit Output(const std::string &path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw std::runtime_error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream &stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

int run_generate(int N, int T, std::uint64_t seed, const std::string &out, const MsdChainConfig &mc) {
    const ProblemInstance inst = msd_chain(N, T, seed, mc);
    save_instance(inst, out);
    std::cout << "N=" << inst.N << " T=" << inst.T << " variables=" << inst.variable_count()
              << " constraints=" << inst.constraint_count() << " file=" << out << "\n";
    return kExitConverged;
}

void write_plot_data(const std::string &path, const std::vector<BenchRecord> &rows) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    // solver -> (N -> per-Newton seconds, averaged over seeds)
    std::map<std::string, std::map<int, std::pair<double, int>>> curves;
    for (const auto &r : rows)
        if (r.status == "converged") {
            const std::string key = r.solver == "pcg" ? "pcg(L=" + std::to_string(r.L) + ")" : r.solver;
            auto &cell = curves[key][r.N];
            cell.first += r.per_newton_time_s;
            cell.second += 1;
        }
    f << "# per-Newton-step time, normalised by each curve's value at its smallest N\n";
    for (const auto &[solver, pts] : curves) {
        if (pts.empty())
            continue;
        const double base = pts.begin()->second.first / pts.begin()->second.second;
        f << "# solver=" << solver << "\n# N per_newton_time_s normalized\n";
        for (const auto &[N, cell] : pts) {
            const double t = cell.first / cell.second;
            f << N << " " << t << " " << (base > 0 ? t / base : 0.0) << "\n";
        }
        f << "\n\n";
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Structured interior-point solver for path-graph optimal control"};
    app.require_subcommand(1);

    // generate
    auto *gen = app.add_subcommand("generate", "Write a mass-spring-damper chain instance");
    int gen_n = 10, gen_t = 10;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    MsdChainConfig mc;
    gen->add_option("--n", gen_n, "Number of subsystems")->required()->check(CLI::PositiveNumber);
    gen->add_option("--t", gen_t, "Horizon length")->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "PRNG seed");
    gen->add_option("--out", gen_out, "Instance file")->required();
    gen->add_option("--step", mc.h, "Forward-Euler step h")->check(CLI::PositiveNumber);
    gen->add_option("--x-max", mc.x_max, "Position bound")->check(CLI::PositiveNumber);
    gen->add_option("--u-max", mc.u_max, "Input bound")->check(CLI::PositiveNumber);

    // solve
    auto *sol = app.add_subcommand("solve", "Solve an instance file");
    std::string sol_solver = "pcg", sol_file, sol_out;
    int sol_l = 2;
    bool sol_quiet = false;
    CommonSolveFlags sol_flags;
    sol->add_option("--solver", sol_solver, "pcg | jacobi | direct | dense | dense-kkt")
        ->check(CLI::IsMember({"pcg", "jacobi", "direct", "direct-ldl", "dense", "dense-kkt"}));
    sol->add_option("--l", sol_l, "Jacobi sweeps in the preconditioner")->check(CLI::PositiveNumber);
    sol->add_option("--out", sol_out, "CSV output file (default stdout)");
    sol->add_flag("--quiet", sol_quiet, "No per-step progress on stderr");
    sol_flags.attach(sol);
    sol->add_option("instance", sol_file, "Instance file")->required()->check(CLI::ExistingFile);

    // bench
    auto *ben = app.add_subcommand("bench", "Sweep N = T over a grid of msd_chain instances");
    std::vector<int> ben_grid{10, 20, 50, 100, 200};
    std::vector<std::string> ben_solvers{"pcg", "jacobi", "direct"};
    std::vector<std::uint64_t> ben_seeds{0};
    int ben_l = 2, ben_direct_max = 100, ben_dense_max = 20;
    bool ben_large = false;
    std::string ben_out, ben_plot;
    CommonSolveFlags ben_flags;
    ben->add_option("--grid", ben_grid, "Values of N = T")->delimiter(',')->check(CLI::PositiveNumber);
    ben->add_flag("--large", ben_large, "Append N = T = 1000 to the grid");
    ben->add_option("--solvers", ben_solvers, "Inner solvers")
        ->delimiter(',')
        ->check(CLI::IsMember({"pcg", "jacobi", "direct", "direct-ldl", "dense", "dense-kkt"}));
    ben->add_option("--seeds", ben_seeds, "Instance seeds")->delimiter(',');
    ben->add_option("--l", ben_l, "Jacobi sweeps for pcg")->check(CLI::PositiveNumber);
    ben->add_option("--direct-max", ben_direct_max, "Skip direct beyond this N = T");
    ben->add_option("--dense-max", ben_dense_max, "Skip dense solvers beyond this N = T");
    ben->add_option("--out", ben_out, "CSV output file (default stdout)");
    ben->add_option("--plot-data", ben_plot, "Also write normalised per-Newton times for plotting");
    ben_flags.attach(ben);

    // sweep-l
    auto *swp = app.add_subcommand("sweep-l", "Max PCG iterations per Newton step versus L");
    int swp_n = 20, swp_t = 20;
    std::vector<int> swp_ls{1, 2, 4, 8};
    std::vector<std::uint64_t> swp_seeds{0};
    std::string swp_out;
    CommonSolveFlags swp_flags;
    swp->add_option("--n", swp_n, "Number of subsystems")->check(CLI::PositiveNumber);
    swp->add_option("--t", swp_t, "Horizon length")->check(CLI::PositiveNumber);
    swp->add_option("--ls", swp_ls, "Sweep counts")->delimiter(',')->expected(1, -1)->check(CLI::PositiveNumber);
    swp->add_option("--seeds", swp_seeds, "Instance seeds")->delimiter(',');
    swp->add_option("--out", swp_out, "CSV output file (default stdout)");
    swp_flags.attach(swp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : kExitError;
    }

    try {
        if (*gen)
            return run_generate(gen_n, gen_t, gen_seed, gen_out, mc);

        if (*sol) {
            const ProblemInstance inst = load_instance(sol_file);
            if (const auto v = validate(inst); !v.empty()) {
                for (const auto &x : v)
                    std::cerr << "invalid instance: " << x.what << "\n";
                return kExitError;
            }
            IpmConfig cfg = sol_flags.config(parse_inner_solver(sol_solver), sol_l);
            if (!sol_quiet)
                cfg.progress = &std::cerr;
            const BenchRecord rec = run_record(inst, 0, cfg);
            Output out(sol_out);
            write_csv_header(out.stream());
            write_csv_row(out.stream(), rec, sol_flags.deterministic);
            if (rec.status.rfind("error:", 0) == 0) {
                std::cerr << rec.status << "\n";
                return kExitError;
            }
            return rec.status == "converged" ? kExitConverged : kExitNotConverged;
        }

        if (*ben) {
            if (ben_large)
                ben_grid.push_back(1000);
            Output out(ben_out);
            write_csv_header(out.stream());
            std::vector<BenchRecord> rows;
            for (int size : ben_grid)
                for (std::uint64_t seed : ben_seeds) {
                    const ProblemInstance inst = msd_chain(size, size, seed);
                    for (const auto &name : ben_solvers) {
                        const InnerSolver s = parse_inner_solver(name);
                        if (s == InnerSolver::Direct && size > ben_direct_max)
                            continue;
                        if ((s == InnerSolver::Dense || s == InnerSolver::DenseKkt) && size > ben_dense_max)
                            continue;
                        std::cerr << "bench N=T=" << size << " seed=" << seed << " solver=" << name << "\n";
                        rows.push_back(run_record(inst, seed, ben_flags.config(s, ben_l)));
                        write_csv_row(out.stream(), rows.back(), ben_flags.deterministic);
                        out.stream().flush();
                    }
                }
            if (!ben_plot.empty())
                write_plot_data(ben_plot, rows);
            return kExitConverged;
        }

        if (*swp) {
            if (swp_ls.empty()) {
                std::cerr << "sweep-l: --ls needs at least one value\n";
                return kExitError;
            }
            Output out(swp_out);
            write_csv_header(out.stream());
            for (std::uint64_t seed : swp_seeds) {
                const ProblemInstance inst = msd_chain(swp_n, swp_t, seed);
                for (int L : swp_ls) {
                    std::cerr << "sweep-l N=" << swp_n << " T=" << swp_t << " seed=" << seed << " L=" << L << "\n";
                    write_csv_row(out.stream(), run_record(inst, seed, swp_flags.config(InnerSolver::Pcg, L)),
                                  swp_flags.deterministic);
                }
            }
            return kExitConverged;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
