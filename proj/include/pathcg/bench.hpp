#pragma once

#include <pathcg/ipm.hpp>
#include <pathcg/problem.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pathcg {

/// One row of the benchmark CSV.
struct BenchRecord {
    int N = 0;
    int T = 0;
    std::uint64_t seed = 0;
    std::string solver;
    int L = 0;
    int newton_steps = 0;
    long max_inner_iters = 0;
    double avg_inner_iters = 0.0;
    double total_time_s = 0.0;
    double per_newton_time_s = 0.0;
    double final_mu = 0.0;
    double final_cost = 0.0;
    std::string status; ///< converged | not_converged | error:<message>
};

inline constexpr int kCsvSchema = 1;

/// Mean step time over Newton steps 3..end (all steps when there are fewer).
double per_newton_seconds(const IpmResult &r);

/// Runs the interior-point solver and fills a record. Exceptions become an
/// error status.
BenchRecord run_record(const ProblemInstance &inst, std::uint64_t seed, const IpmConfig &cfg);

/// Writes "# schema=1" and the column header.
void write_csv_header(std::ostream &os);
/// `deterministic` zeroes the two timing columns so output is byte-stable.
void write_csv_row(std::ostream &os, const BenchRecord &r, bool deterministic = false);

} // namespace pathcg
