#include "feas/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "feas/baseline.hpp"
#include "feas/errors.hpp"

namespace feas {

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::simplex: return "simplex";
    case Algorithm::combinatorial: return "combinatorial";
    case Algorithm::monotone: return "monotone";
    case Algorithm::polynomial: return "polynomial";
    case Algorithm::rescaled: return "rescaled";
    }
    return "simplex";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "simplex") return Algorithm::simplex;
    return static_cast<Algorithm>(static_cast<int>(parse_variant(s)) + 1);
}

std::vector<Algorithm> all_algorithms() {
    return {Algorithm::simplex, Algorithm::combinatorial, Algorithm::monotone, Algorithm::polynomial,
            Algorithm::rescaled};
}

void BenchSpec::validate() const {
    if (families.empty()) throw ConfigError("bench: no families selected");
    if (dims.empty()) throw ConfigError("bench: no dimensions selected");
    if (algorithms.empty()) throw ConfigError("bench: no algorithms selected");
    if (seeds_per_cell == 0) throw ConfigError("bench: seeds per cell must be >= 1");
    if (n_fixed.empty() && n_factor == 0) throw ConfigError("bench: n factor must be >= 1");
    for (std::size_t d : dims)
        if (d == 0) throw ConfigError("bench: dimensions must be positive");
}

std::vector<std::size_t> BenchSpec::sizes(std::size_t d) const {
    if (!n_fixed.empty()) return n_fixed;
    return {n_factor * d};
}

namespace {

Variant variant_of(Algorithm a) { return static_cast<Variant>(static_cast<int>(a) - 1); }

} // namespace

BenchRow run_one(const EuclideanInstance& inst, Algorithm alg) {
    BenchRow row;
    row.family = inst.provenance.family;
    row.d = inst.d;
    row.n = inst.n();
    row.seed = inst.provenance.seed;
    row.alg = alg;
    try {
        if (alg == Algorithm::simplex) {
            const SimplexResult r = simplex_feasibility(inst);
            row.status = r.status == SimplexStatus::feasible ? "feasible" : "infeasible";
            row.steps = r.steps;
            row.ms = r.wall_ms;
        } else {
            SolveConfig cfg;
            cfg.variant = variant_of(alg);
            cfg.record_trace = false;
            const SolveOutcome o = solve(inst, cfg);
            row.status = o.feasible() ? "feasible" : o.infeasible() ? "infeasible" : "budget_exhausted";
            row.steps = o.total_iterations();
            row.rescalings = o.total_rescalings();
            row.ms = o.trace.wall_ms + (o.reduced ? o.reduced->trace.wall_ms : 0.0);
        }
    } catch (const Error& e) {
        row.status = "error";
        row.error = e.what();
    }
    return row;
}

std::size_t worker_count(std::size_t requested) {
    std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FEAS_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
    }
    return std::max<std::size_t>(1, n);
}

BenchResult run_bench(const BenchSpec& spec) {
    spec.validate();
    struct Job {
        Family family;
        std::size_t d, n;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (Family f : spec.families)
        for (std::size_t d : spec.dims)
            for (std::size_t n : spec.sizes(d))
                for (std::size_t k = 0; k < spec.seeds_per_cell; ++k) jobs.push_back({f, d, n, spec.first_seed + k});

    const std::size_t n_alg = spec.algorithms.size();
    BenchResult result;
    result.rows.resize(jobs.size() * n_alg);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job& job = jobs[j];
            std::optional<EuclideanInstance> inst;
            std::string gen_error;
            try {
                inst = generate(job.family, job.d, job.n, job.seed);
            } catch (const Error& e) {
                gen_error = e.what();
            }
            for (std::size_t a = 0; a < n_alg; ++a) {
                BenchRow& row = result.rows[j * n_alg + a];
                if (inst) {
                    row = run_one(*inst, spec.algorithms[a]);
                } else {
                    row = BenchRow{job.family, job.d, job.n, job.seed, spec.algorithms[a], "error", 0, 0, 0.0, gen_error};
                }
            }
        }
    };
    const std::size_t workers = std::min(worker_count(spec.threads), std::max<std::size_t>(1, jobs.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Means per (family, d, n, alg), in row order.
    for (std::size_t start = 0; start < result.rows.size(); start += spec.seeds_per_cell * n_alg) {
        for (std::size_t a = 0; a < n_alg; ++a) {
            BenchMean m;
            const BenchRow& first = result.rows[start + a];
            m.family = first.family;
            m.d = first.d;
            m.n = first.n;
            m.alg = first.alg;
            m.status = first.status;
            for (std::size_t k = 0; k < spec.seeds_per_cell; ++k) {
                const BenchRow& r = result.rows[start + k * n_alg + a];
                if (r.status != m.status) m.status = "mixed";
                if (r.status == "error") continue;
                m.steps += static_cast<double>(r.steps);
                m.rescalings += static_cast<double>(r.rescalings);
                m.ms += r.ms;
                ++m.runs;
            }
            if (m.runs > 0) {
                const double inv = 1.0 / static_cast<double>(m.runs);
                m.steps *= inv;
                m.rescalings *= inv;
                m.ms *= inv;
            }
            result.means.push_back(m);
        }
    }
    return result;
}

void write_bench_csv(const BenchResult& result, std::ostream& out) {
    out << kBenchHeader << '\n';
    for (const auto& r : result.rows)
        out << to_string(r.family) << ',' << r.d << ',' << r.n << ',' << r.seed << ',' << to_string(r.alg) << ','
            << r.status << ',' << r.steps << ',' << r.rescalings << ',' << format_double(r.ms) << '\n';
    for (const auto& m : result.means)
        out << to_string(m.family) << ',' << m.d << ',' << m.n << ",mean," << to_string(m.alg) << ',' << m.status
            << ',' << format_double(m.steps) << ',' << format_double(m.rescalings) << ',' << format_double(m.ms)
            << '\n';
}

void write_bench_table(const BenchResult& result, std::ostream& out) {
    std::vector<Algorithm> algs;
    for (const auto& m : result.means)
        if (std::find(algs.begin(), algs.end(), m.alg) == algs.end()) algs.push_back(m.alg);

    std::ostringstream head;
    head << std::left << std::setw(8) << "family" << std::right << std::setw(6) << "d" << std::setw(8) << "n";
    for (Algorithm a : algs) {
        head << std::setw(15) << to_string(a);
        if (a == Algorithm::rescaled) head << std::setw(12) << "rescalings";
    }
    out << head.str() << '\n';

    out << std::fixed << std::setprecision(1);
    for (std::size_t i = 0; i < result.means.size();) {
        const BenchMean& m0 = result.means[i];
        out << std::left << std::setw(8) << to_string(m0.family) << std::right << std::setw(6) << m0.d << std::setw(8)
            << m0.n;
        std::size_t j = i;
        for (; j < result.means.size() && result.means[j].family == m0.family && result.means[j].d == m0.d &&
               result.means[j].n == m0.n;
             ++j) {
            const BenchMean& m = result.means[j];
            out << std::setw(15) << m.steps;
            if (m.alg == Algorithm::rescaled) out << std::setw(12) << m.rescalings;
        }
        out << '\n';
        i = j;
    }
    out.unsetf(std::ios::fixed);
}

FitResult fit_power_law(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw PreconditionViolated("power-law fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [d, s] : points) {
        if (!(d > 0.0) || !(s > 0.0)) throw NonPositiveData("power-law fit needs positive d and steps");
        const double x = std::log(d), y = std::log(s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double den = n * sxx - sx * sx;
    if (std::abs(den) <= 1e-12 * std::max(1.0, n * sxx)) throw PreconditionViolated("power-law fit needs distinct dimensions");
    FitResult fit;
    fit.beta = (n * sxy - sx * sy) / den;
    const double log_alpha = (sy - fit.beta * sx) / n;
    fit.alpha = std::exp(log_alpha);
    double ss = 0.0;
    for (const auto& [d, s] : points) {
        const double r = std::log(s) - log_alpha - fit.beta * std::log(d);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

} // namespace feas
