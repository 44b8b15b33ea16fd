#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "acsa/aggregate.hpp"
#include "acsa/domain.hpp"
#include "acsa/eval.hpp"
#include "acsa/kmeans.hpp"
#include "acsa/parse.hpp"

namespace {

std::string random_label(std::mt19937_64& rng, std::size_t length) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz#_";
    std::string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i)
        out.push_back(alphabet[rng() % (sizeof(alphabet) - 1)]);
    return out;
}

void bench_similarity(benchmark::State& state) {
    std::mt19937_64 rng(7);
    const std::size_t length = static_cast<std::size_t>(state.range(0));
    std::string a = random_label(rng, length);
    std::string b = random_label(rng, length);
    for (auto _ : state) benchmark::DoNotOptimize(acsa::similarity(a, b));
}
BENCHMARK(bench_similarity)->Arg(8)->Arg(32)->Arg(128);

void bench_kmeans(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<acsa::EmbeddingVector> points(n, acsa::EmbeddingVector(16));
    for (auto& p : points)
        for (double& v : p) v = dist(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(acsa::kmeans(points, 4, {.max_iterations = 100}));
}
BENCHMARK(bench_kmeans)->Arg(32)->Arg(256);

void bench_spearman(benchmark::State& state) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = dist(rng);
        y[i] = dist(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(acsa::spearman(x, y));
}
BENCHMARK(bench_spearman)->Arg(100)->Arg(1000);

void bench_pooled_pairs(benchmark::State& state) {
    std::mt19937_64 rng(17);
    std::vector<acsa::ScoredList> lists(6);
    const auto polarity = [](std::uint64_t v) {
        switch (v % 3) {
            case 0: return acsa::Polarity::positive;
            case 1: return acsa::Polarity::neutral;
            default: return acsa::Polarity::negative;
        }
    };
    for (auto& list : lists) {
        std::vector<acsa::ScoredPair> pairs;
        for (int i = 0; i < state.range(0); ++i)
            pairs.push_back({{random_label(rng, 12), polarity(rng())},
                             static_cast<double>(rng() % 1000) / 1000.0,
                             "ACO"});
        list = acsa::make_scored_list(std::move(pairs));
    }
    for (auto _ : state) benchmark::DoNotOptimize(acsa::pooled_unique_pairs(lists));
}
BENCHMARK(bench_pooled_pairs)->Arg(4)->Arg(16);

}  // namespace
