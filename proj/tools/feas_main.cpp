// feas: generate instances, run the solvers, benchmark, fit power laws.
//
// Exit status: 0 feasible / success, 1 error, 2 usage, 3 infeasible,
// 4 iteration budget exhausted.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "feas/baseline.hpp"
#include "feas/bench.hpp"
#include "feas/errors.hpp"
#include "feas/problems.hpp"
#include "feas/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitBudget = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

void print_vector(std::ostream& out, const char* label, const feas::Vector& v) {
    out << label << ':';
    for (double x : v) out << ' ' << feas::format_double(x);
    out << '\n';
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string family;
    std::size_t dim = 0;
    std::size_t num = 0;
    std::uint64_t seed = 0;
    std::string output;
};

int cmd_gen(const GenArgs& a) {
    const feas::EuclideanInstance inst = feas::generate(feas::parse_family(a.family), a.dim, a.num, a.seed);
    if (a.output.empty() || a.output == "-") {
        feas::write_instance(inst, std::cout);
    } else {
        feas::write_instance(inst, std::filesystem::path(a.output));
        std::cout << "wrote " << a.output << ": family " << a.family << ", d " << inst.d << ", n " << inst.n()
                  << ", seed " << a.seed << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string input;
    std::string alg = "combinatorial";
    std::string rule;
    double tol = 1e-9;
    std::size_t max_iters = 0;
    std::string poly_l;
    std::string trace;
};

void print_outcome(std::ostream& out, const feas::SolveOutcome& o, const feas::SphericalInstance& solved) {
    const std::size_t it = o.total_iterations();
    const char* verdict = o.feasible() ? "feasible" : o.infeasible() ? "infeasible" : "budget exhausted";
    out << verdict << ", " << it << (it == 1 ? " iteration" : " iterations") << '\n';
    out << "status: " << feas::to_string(o.status) << '\n';
    out << "iterations: " << it << '\n';
    out << "rescalings: " << o.total_rescalings() << '\n';
    if (o.trace.transforms) out << "transforms: " << o.trace.transforms << '\n';
    out << "time_ms: " << std::fixed << std::setprecision(3) << o.trace.wall_ms << '\n';
    out.unsetf(std::ios::fixed);
    if (!o.equality_indices.empty()) {
        out << "equalities:";
        for (std::size_t i : o.equality_indices) out << ' ' << i;
        out << '\n';
    }
    if (o.point) print_vector(out, "sphere_point", *o.point);
    if (o.euclidean_point) print_vector(out, "point", *o.euclidean_point);
    if (o.certificate) {
        const auto& c = *o.certificate;
        out << "certificate_indices:";
        for (std::size_t i : c.indices) out << ' ' << i;
        out << '\n';
        print_vector(out, "certificate_coefficients", c.coefficients);
        out << "certificate_residual: " << feas::format_double(c.residual(solved)) << '\n';
        out << "certificate_verified: " << (c.verify(solved) ? "yes" : "no") << '\n';
    }
}

int cmd_solve(const SolveArgs& a) {
    const feas::EuclideanInstance inst = feas::read_instance(std::filesystem::path(a.input));
    feas::SolveConfig cfg;
    try {
        cfg.variant = feas::parse_variant(a.alg);
        if (!a.rule.empty()) cfg.constraint_rule = feas::parse_rule(a.rule);
    } catch (const feas::ConfigError& e) {
        throw UsageError(e.what());
    }
    cfg.feas_tol = a.tol;
    cfg.max_iters = a.max_iters;
    if (cfg.variant == feas::Variant::polynomial) {
        if (a.poly_l == "auto") {
            cfg.poly_L = feas::estimate_instance_size(inst);
        } else if (!a.poly_l.empty()) {
            try {
                cfg.poly_L = std::stoull(a.poly_l);
            } catch (const std::exception&) {
                throw UsageError("--poly-L expects a positive integer or 'auto'");
            }
        } else if (auto L = feas::exact_instance_size(inst)) {
            cfg.poly_L = *L;
        } else {
            throw UsageError("instance size L is not derivable (some entry needs more than 64 bits); "
                             "pass --poly-L N or --poly-L auto");
        }
    }

    const feas::SphericalInstance h = feas::homogenize(inst);
    const feas::SolveOutcome o = feas::solve(h, cfg);
    print_outcome(std::cout, o, feas::with_side_condition(h));
    if (!a.trace.empty()) {
        std::ofstream tf(a.trace);
        if (!tf) throw feas::Error("cannot open '" + a.trace + "' for writing");
        feas::write_trace_csv(o.trace, tf);
    }
    if (o.feasible()) return kExitOk;
    if (o.infeasible()) return kExitInfeasible;
    return kExitBudget;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string families = "ex1,ex2,ex3";
    std::string dims;
    std::size_t factor = 8;
    std::string sizes;
    std::size_t seeds = 5;
    std::uint64_t first_seed = 1;
    std::string algs = "simplex,combinatorial,rescaled";
    std::size_t threads = 0;
    std::string csv;
    bool table = false;
};

std::vector<std::size_t> parse_counts(const std::string& s, const char* what) {
    std::vector<std::size_t> out;
    for (const auto& tok : split_list(s)) {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(tok, &pos);
            if (pos != tok.size() || v == 0) throw std::invalid_argument(tok);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw UsageError(std::string("bad ") + what + " '" + tok + "'");
        }
    }
    return out;
}

int cmd_bench(const BenchArgs& a) {
    feas::BenchSpec spec;
    try {
        for (const auto& f : split_list(a.families)) {
            const feas::Family fam = feas::parse_family(f);
            if (fam == feas::Family::custom) throw feas::ConfigError("family 'custom' cannot be generated");
            spec.families.push_back(fam);
        }
        if (a.algs == "all") {
            spec.algorithms = feas::all_algorithms();
        } else {
            for (const auto& s : split_list(a.algs)) spec.algorithms.push_back(feas::parse_algorithm(s));
        }
        spec.dims = parse_counts(a.dims, "dimension");
        spec.n_fixed = parse_counts(a.sizes, "size");
        spec.n_factor = a.factor;
        spec.seeds_per_cell = a.seeds;
        spec.first_seed = a.first_seed;
        spec.threads = a.threads;
        spec.validate();
    } catch (const feas::ConfigError& e) {
        throw UsageError(e.what());
    }

    const feas::BenchResult r = feas::run_bench(spec);
    if (!a.csv.empty()) {
        std::ofstream f(a.csv);
        if (!f) throw feas::Error("cannot open '" + a.csv + "' for writing");
        feas::write_bench_csv(r, f);
    }
    if (a.table || !a.csv.empty()) {
        feas::write_bench_table(r, std::cout);
    } else {
        feas::write_bench_csv(r, std::cout);
    }
    for (const auto& row : r.rows)
        if (row.status == "error")
            std::cerr << "error: " << feas::to_string(row.family) << " d=" << row.d << " n=" << row.n
                      << " seed=" << row.seed << " " << feas::to_string(row.alg) << ": " << row.error << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string points;
    bool add_d = false;
};

void print_fit(const std::string& label, std::vector<std::pair<double, double>> pts, bool add_d) {
    if (add_d)
        for (auto& p : pts) p.second += p.first;
    const feas::FitResult f = feas::fit_power_law(pts);
    std::cout << label << "alpha " << std::setprecision(6) << f.alpha << " beta " << f.beta << " residual "
              << f.residual << '\n';
}

int cmd_fit(const FitArgs& a) {
    if (!a.points.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& tok : split_list(a.points)) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw UsageError("points must look like d:steps");
            try {
                pts.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
            } catch (const std::exception&) {
                throw UsageError("bad point '" + tok + "'");
            }
        }
        print_fit("", std::move(pts), a.add_d);
        return kExitOk;
    }
    if (a.input.empty()) throw UsageError("fit needs a bench CSV file or --points");

    // Mean rows of a bench CSV, grouped by (family, alg).
    std::ifstream in(a.input);
    if (!in) throw feas::Error("cannot open '" + a.input + "'");
    std::string line;
    std::getline(in, line);
    if (line != feas::kBenchHeader) throw feas::Error("'" + a.input + "' is not a bench CSV");
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> groups;
    while (std::getline(in, line)) {
        const auto f = split_list(line);
        if (f.size() != 9 || f[3] != "mean") continue;
        groups[{f[0], f[4]}].emplace_back(std::stod(f[1]), std::stod(f[6]));
    }
    if (groups.empty()) throw feas::Error("no mean rows in '" + a.input + "'");
    for (auto& [key, pts] : groups) print_fit(key.first + " " + key.second + ": ", std::move(pts), a.add_d);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear feasibility by touching-sphere relaxation"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate an instance file");
    g->add_option("--family", gen.family, "ex1, ex2 or ex3")->required();
    g->add_option("--dim", gen.dim, "Dimension d")->required();
    g->add_option("--num", gen.num, "Number of constraints n")->required();
    g->add_option("--seed", gen.seed, "Random seed")->required();
    g->add_option("-o,--output", gen.output, "Output file (stdout when omitted)");

    SolveArgs sol;
    auto* s = app.add_subcommand("solve", "Solve an instance file");
    s->add_option("input", sol.input, "Instance file")->required();
    s->add_option("--alg", sol.alg, "combinatorial, monotone, polynomial or rescaled");
    s->add_option("--rule", sol.rule, "most_violated or first_violated");
    s->add_option("--tol", sol.tol, "Feasibility tolerance on the sphere");
    s->add_option("--max-iters", sol.max_iters, "Iteration cap (0 = default)");
    s->add_option("--poly-L", sol.poly_l, "Instance size L for the polynomial variant, or 'auto'");
    s->add_option("--trace", sol.trace, "Write the iteration trace as CSV");

    BenchArgs ben;
    auto* b = app.add_subcommand("bench", "Run a benchmark matrix");
    b->add_option("--families", ben.families, "Comma-separated families");
    b->add_option("--dims", ben.dims, "Comma-separated dimensions")->required();
    b->add_option("--factor", ben.factor, "n = factor * d");
    b->add_option("--sizes", ben.sizes, "Comma-separated fixed n values (overrides --factor)");
    b->add_option("--seeds", ben.seeds, "Instances per cell");
    b->add_option("--first-seed", ben.first_seed, "Seed of the first instance in each cell");
    b->add_option("--algs", ben.algs, "Comma-separated algorithms or 'all'");
    b->add_option("--threads", ben.threads, "Worker threads (0 = hardware; FEAS_THREADS caps)");
    b->add_option("--csv", ben.csv, "Write CSV rows here and print the table");
    b->add_flag("--table", ben.table, "Print the mean table instead of CSV");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Fit steps = alpha d^beta");
    f->add_option("input", fit.input, "Bench CSV (mean rows are fitted per family and algorithm)");
    f->add_option("--points", fit.points, "Comma-separated d:steps pairs");
    f->add_flag("--add-d", fit.add_d, "Add d to every step count before fitting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*s) return cmd_solve(sol);
        if (*b) return cmd_bench(ben);
        if (*f) return cmd_fit(fit);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const feas::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}
