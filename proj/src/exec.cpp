#include <pathcg/exec.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <omp.h>

namespace pathcg {

int Exec::team_size() const {
    if (threads > 0)
        return threads;
    return omp_get_max_threads();
}

namespace {

std::ptrdiff_t chunk_count(std::ptrdiff_t n) { return (n + kReduceChunk - 1) / kReduceChunk; }

void check_same_size(std::size_t a, std::size_t b) {
    if (a != b)
        throw std::invalid_argument("vector length mismatch");
}

} // namespace

double dot(const Exec &exec, std::span<const double> a, std::span<const double> b) {
    check_same_size(a.size(), b.size());
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    const auto chunks = chunk_count(n);
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
    parallel_for(exec, chunks, [&](std::ptrdiff_t c) {
        const auto lo = c * kReduceChunk;
        const auto hi = std::min(n, lo + kReduceChunk);
        double s = 0.0;
        for (auto i = lo; i < hi; ++i)
            s += a[i] * b[i];
        partial[c] = s;
    });
    double s = 0.0;
    for (double p : partial)
        s += p;
    return s;
}

double norm_inf(const Exec &exec, std::span<const double> a) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    const auto chunks = chunk_count(n);
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
    parallel_for(exec, chunks, [&](std::ptrdiff_t c) {
        const auto lo = c * kReduceChunk;
        const auto hi = std::min(n, lo + kReduceChunk);
        double m = 0.0;
        for (auto i = lo; i < hi; ++i)
            m = std::max(m, std::abs(a[i]));
        partial[c] = m;
    });
    double m = 0.0;
    for (double p : partial)
        m = std::max(m, p);
    return m;
}

void axpy(const Exec &exec, double alpha, std::span<const double> x, std::span<double> y) {
    check_same_size(x.size(), y.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    parallel_for(exec, chunk_count(n), [&](std::ptrdiff_t c) {
        const auto lo = c * kReduceChunk;
        const auto hi = std::min(n, lo + kReduceChunk);
        for (auto i = lo; i < hi; ++i)
            y[i] += alpha * x[i];
    });
}

void xpby(const Exec &exec, std::span<const double> x, double beta, std::span<double> y) {
    check_same_size(x.size(), y.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    parallel_for(exec, chunk_count(n), [&](std::ptrdiff_t c) {
        const auto lo = c * kReduceChunk;
        const auto hi = std::min(n, lo + kReduceChunk);
        for (auto i = lo; i < hi; ++i)
            y[i] = x[i] + beta * y[i];
    });
}

} // namespace pathcg
