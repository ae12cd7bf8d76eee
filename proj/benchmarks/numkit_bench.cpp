#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "feas/numkit.hpp"

namespace {

feas::Vector random_vector(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    feas::Vector v(n);
    for (auto& x : v) x = nd(gen);
    return v;
}

feas::OrthoFactorization filled(std::size_t d, std::size_t k, std::mt19937_64& gen) {
    feas::OrthoFactorization f(d);
    for (std::size_t j = 0; j < k; ++j) f.append_column(random_vector(d, gen));
    return f;
}

// Drop the first column of a half-full factorization (the full Givens
// sweep) and append it again at the end.
void BM_AppendRemove(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 gen(1);
    std::vector<feas::Vector> cols;
    feas::OrthoFactorization f(d);
    for (std::size_t j = 0; j < d / 2; ++j) {
        cols.push_back(random_vector(d, gen));
        f.append_column(cols.back());
    }
    std::size_t next = 0;
    for (auto _ : state) {
        f.remove_column(0);
        f.append_column(cols[next]);
        next = (next + 1) % cols.size();
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AppendRemove)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_RankOneUpdate(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 gen(2);
    auto f = filled(d, d, gen);
    auto w = random_vector(d, gen);
    for (auto& x : w) x *= 1e-3;
    const auto v = random_vector(d, gen);
    for (auto _ : state) {
        f.rank_one_update(w, v, 1.0);
        benchmark::DoNotOptimize(f.r()(0, 0));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RankOneUpdate)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_Factorize(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 gen(3);
    feas::Matrix a(d, 0);
    for (std::size_t j = 0; j < d; ++j) a.append_col(random_vector(d, gen));
    for (auto _ : state) benchmark::DoNotOptimize(feas::OrthoFactorization::factorize(a));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Factorize)->RangeMultiplier(2)->Range(16, 256)->Complexity();

} // namespace
