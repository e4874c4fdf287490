#include <pathcg/bench.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <ostream>

namespace pathcg {

double per_newton_seconds(const IpmResult &r) {
    if (r.steps.empty())
        return 0.0;
    const std::size_t first = r.steps.size() > 2 ? 2 : 0;
    double s = 0.0;
    for (std::size_t i = first; i < r.steps.size(); ++i)
        s += r.steps[i].seconds;
    return s / static_cast<double>(r.steps.size() - first);
}

BenchRecord run_record(const ProblemInstance &inst, std::uint64_t seed, const IpmConfig &cfg) {
    BenchRecord rec;
    rec.N = inst.N;
    rec.T = inst.T;
    rec.seed = seed;
    rec.solver = to_string(cfg.solver);
    rec.L = cfg.solver == InnerSolver::Pcg ? cfg.L : 0;
    try {
        const IpmResult r = solve(inst, cfg);
        rec.newton_steps = r.newton_steps;
        rec.max_inner_iters = r.max_inner_iterations();
        rec.avg_inner_iters = r.avg_inner_iterations();
        rec.total_time_s = r.seconds;
        rec.per_newton_time_s = per_newton_seconds(r);
        rec.final_mu = r.mu;
        rec.final_cost = r.cost;
        rec.status = r.converged ? "converged" : "not_converged";
    } catch (const std::exception &e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        rec.status = "error:" + msg;
    }
    return rec;
}

void write_csv_header(std::ostream &os) {
    os << "# schema=" << kCsvSchema << "\n"
       << "N,T,seed,solver,L,newton_steps,max_inner_iters,avg_inner_iters,total_time_s,per_newton_time_s,final_mu,"
          "final_cost,status\n";
}

void write_csv_row(std::ostream &os, const BenchRecord &r, bool deterministic) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%d,%d,%llu,%s,%d,%d,%ld,%.4f,%.6e,%.6e,%.9e,%.12e,", r.N, r.T,
                  static_cast<unsigned long long>(r.seed), r.solver.c_str(), r.L, r.newton_steps, r.max_inner_iters,
                  r.avg_inner_iters, deterministic ? 0.0 : r.total_time_s, deterministic ? 0.0 : r.per_newton_time_s,
                  r.final_mu, r.final_cost);
    os << buf << r.status << "\n";
}

} // namespace pathcg
