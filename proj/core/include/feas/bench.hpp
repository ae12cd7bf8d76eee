#pragma once

// Benchmark matrices over the generated families and the power-law fit of
// mean step counts against dimension.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feas/problems.hpp"
#include "feas/solver.hpp"

namespace feas {

enum class Algorithm { simplex, combinatorial, monotone, polynomial, rescaled };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
std::vector<Algorithm> all_algorithms();

struct BenchSpec {
    std::vector<Family> families;
    std::vector<std::size_t> dims;
    /// n = n_factor * d, unless n_fixed is non-empty.
    std::size_t n_factor = 8;
    std::vector<std::size_t> n_fixed;
    std::size_t seeds_per_cell = 5;
    /// Instance k of a cell uses seed first_seed + k.
    std::uint64_t first_seed = 1;
    std::vector<Algorithm> algorithms;
    /// 0 picks hardware concurrency; FEAS_THREADS caps either choice.
    std::size_t threads = 0;

    void validate() const;
    std::vector<std::size_t> sizes(std::size_t d) const;
};

struct BenchRow {
    Family family = Family::ex1;
    std::size_t d = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Algorithm alg = Algorithm::combinatorial;
    /// feasible, infeasible, budget_exhausted or error
    std::string status;
    std::size_t steps = 0;
    std::size_t rescalings = 0;
    double ms = 0.0;
    std::string error;
};

struct BenchMean {
    Family family = Family::ex1;
    std::size_t d = 0;
    std::size_t n = 0;
    Algorithm alg = Algorithm::combinatorial;
    /// Common status of the runs, or "mixed".
    std::string status;
    double steps = 0.0;
    double rescalings = 0.0;
    double ms = 0.0;
    std::size_t runs = 0;
};

struct BenchResult {
    /// Ordered by (family, d, n, seed, alg) in spec order.
    std::vector<BenchRow> rows;
    std::vector<BenchMean> means;
};

/// One run of one algorithm; solver errors are captured in the row.
BenchRow run_one(const EuclideanInstance& inst, Algorithm alg);
BenchResult run_bench(const BenchSpec& spec);

/// requested (or hardware concurrency when 0), capped by FEAS_THREADS.
std::size_t worker_count(std::size_t requested);

inline constexpr const char* kBenchHeader = "family,d,n,seed,alg,status,steps,rescalings,ms";
void write_bench_csv(const BenchResult& result, std::ostream& out);
/// Means with one decimal, one line per cell and one column per algorithm.
void write_bench_table(const BenchResult& result, std::ostream& out);

struct FitResult {
    double alpha = 0.0;
    double beta = 0.0;
    /// RMS of the residuals of log(steps).
    double residual = 0.0;
};

/// Least squares fit of log(steps) = log(alpha) + beta log(d).
/// Throws NonPositiveData for non-positive entries and PreconditionViolated
/// for fewer than two distinct dimensions.
FitResult fit_power_law(std::span<const std::pair<double, double>> points);

} // namespace feas
