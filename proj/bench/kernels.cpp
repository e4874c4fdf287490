// Serial reference loops (threads = 1) against the OpenMP kernels on the same
// data. Arguments: N = T, then the thread count (0 selects the OpenMP default).

#include <pathcg/ipm.hpp>
#include <pathcg/kkt.hpp>
#include <pathcg/krylov.hpp>
#include <pathcg/precond.hpp>

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

using namespace pathcg;

namespace {

struct Fixture {
    ProblemInstance inst;
    std::unique_ptr<ReducedSystem> red;
    std::unique_ptr<PairedBlocks> pairs;

    explicit Fixture(int size) : inst(msd_chain(size, size, 0)) {
        const IpmIterate it = initialize(inst);
        red = std::make_unique<ReducedSystem>(reduce(assemble_full(inst, it, 0.1)));
        pairs = std::make_unique<PairedBlocks>(build_pairs(*red));
    }
};

const Fixture &fixture(int size) {
    static std::map<int, std::unique_ptr<Fixture>> cache;
    auto &f = cache[size];
    if (!f)
        f = std::make_unique<Fixture>(size);
    return *f;
}

Exec exec_of(const benchmark::State &state) { return Exec{static_cast<int>(state.range(1))}; }

void BM_ReducedMatvec(benchmark::State &state) {
    const auto &f = fixture(static_cast<int>(state.range(0)));
    const Exec exec = exec_of(state);
    const VectorXd v = VectorXd::Ones(f.red->dim());
    VectorXd out(v.size());
    for (auto _ : state) {
        f.red->matvec(exec, {v.data(), static_cast<std::size_t>(v.size())},
                      {out.data(), static_cast<std::size_t>(out.size())});
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_JacobiApply(benchmark::State &state) {
    const auto &f = fixture(static_cast<int>(state.range(0)));
    const Exec exec = exec_of(state);
    const JacobiPreconditioner pre(*f.pairs, 2);
    const VectorXd v = VectorXd::Ones(f.red->dim());
    VectorXd out(v.size());
    for (auto _ : state) {
        pre.apply(exec, {v.data(), static_cast<std::size_t>(v.size())},
                  {out.data(), static_cast<std::size_t>(out.size())});
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_BuildPairs(benchmark::State &state) {
    const auto &f = fixture(static_cast<int>(state.range(0)));
    const Exec exec = exec_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_pairs(*f.red, exec));
}

void BM_NewtonStepPcg(benchmark::State &state) {
    const auto &f = fixture(static_cast<int>(state.range(0)));
    IpmConfig cfg;
    cfg.exec = exec_of(state);
    const IpmIterate it = initialize(f.inst);
    for (auto _ : state)
        benchmark::DoNotOptimize(newton_step(f.inst, it, 0.1, cfg));
}

void sizes(benchmark::internal::Benchmark *b) {
    for (int size : {50, 100, 200})
        for (int threads : {1, 0})
            b->Args({size, threads});
    b->ArgNames({"NT", "threads"})->Unit(benchmark::kMillisecond);
}

} // namespace

BENCHMARK(BM_ReducedMatvec)->Apply(sizes);
BENCHMARK(BM_JacobiApply)->Apply(sizes);
BENCHMARK(BM_BuildPairs)->Apply(sizes);
BENCHMARK(BM_NewtonStepPcg)->Apply(sizes);

BENCHMARK_MAIN();
