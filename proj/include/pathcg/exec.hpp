#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>

namespace pathcg {

/// Thread policy for the data-parallel kernels.
///
/// `threads == 1` selects the serial reference loops, which never open an
/// OpenMP region. `threads == 0` uses the OpenMP default team size. Every
/// kernel produces bit-identical results for any thread count: work is split
/// over subsystems, pairs or fixed-size chunks, and reductions combine
/// per-chunk partial sums in index order.
struct Exec {
    int threads = 0;

    static Exec serial() { return Exec{1}; }
    static Exec with_threads(int n) { return Exec{n}; }

    [[nodiscard]] int team_size() const;
    [[nodiscard]] bool is_serial() const { return team_size() <= 1; }
};

namespace detail {

class FirstError {
  public:
    void capture() {
        std::lock_guard lock(mutex_);
        if (!error_)
            error_ = std::current_exception();
    }
    void rethrow() const {
        if (error_)
            std::rethrow_exception(error_);
    }

  private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

} // namespace detail

/// Runs fn(i) for i in [0, n). Exceptions thrown by fn are rethrown on the
/// calling thread after the loop (first one wins).
template <class Fn>
void parallel_for(const Exec &exec, std::ptrdiff_t n, Fn &&fn) {
    if (exec.is_serial()) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    detail::FirstError err;
    const int team = exec.team_size();
#pragma omp parallel for schedule(static) num_threads(team)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            err.capture();
        }
    }
    err.rethrow();
}

/// Chunk length of the fixed-order reductions below.
inline constexpr std::ptrdiff_t kReduceChunk = 2048;

double dot(const Exec &exec, std::span<const double> a, std::span<const double> b);
double norm_inf(const Exec &exec, std::span<const double> a);
/// y += alpha * x
void axpy(const Exec &exec, double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(const Exec &exec, std::span<const double> x, double beta, std::span<double> y);

} // namespace pathcg
