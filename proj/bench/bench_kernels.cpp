#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "litpipe/qc.hpp"
#include "litpipe/similarity.hpp"

using namespace litpipe;

namespace {

const char* kWords[] = {"summarize", "identify", "describe", "the",      "sample",  "population", "risk",
                        "factors",   "outcome",  "cohort",   "patients", "results", "methods",    "we",
                        "found",     "review",   "survey",   "trial",    "viral",   "load"};

std::vector<InstructionTriplet> dataset(std::size_t n) {
    std::mt19937_64 gen(n);
    std::vector<InstructionTriplet> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string instruction, input;
        for (int w = 0; w < 8; ++w) instruction += std::string(kWords[gen() % 20]) + " ";
        instruction += std::to_string(gen() % 1000);
        for (int w = 0; w < 260; ++w) input += std::string(kWords[gen() % 20]) + " ";
        out.push_back({instruction, input, "output", Origin::synthetic, std::nullopt});
    }
    return out;
}

void BM_dedup(benchmark::State& state) {
    auto data = dataset(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dedup_triplets(data, 0.7).kept.size());
}

void BM_dedup_reference(benchmark::State& state) {
    auto data = dataset(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::dedup_triplets(data, 0.7).kept.size());
}

void BM_qc_report(benchmark::State& state) {
    auto data = dataset(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(qc_report(data, 120, 1).total);
}

void BM_qc_report_reference(benchmark::State& state) {
    auto data = dataset(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::qc_report(data, 120, 1).total);
}

}  // namespace

BENCHMARK(BM_dedup)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dedup_reference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_qc_report)->Arg(1097)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_qc_report_reference)->Arg(1097)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
