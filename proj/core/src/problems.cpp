#include "feas/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "feas/errors.hpp"

namespace feas {

std::string to_string(Family f) {
    switch (f) {
    case Family::ex1: return "ex1";
    case Family::ex2: return "ex2";
    case Family::ex3: return "ex3";
    case Family::custom: return "custom";
    }
    return "custom";
}

Family parse_family(const std::string& s) {
    if (s == "ex1") return Family::ex1;
    if (s == "ex2") return Family::ex2;
    if (s == "ex3") return Family::ex3;
    if (s == "custom") return Family::custom;
    throw ConfigError("unknown family '" + s + "'");
}

void EuclideanInstance::validate() const {
    if (d == 0) throw DimensionMismatch("instance dimension must be positive");
    if (normals.empty()) throw DimensionMismatch("instance has no constraints");
    if (offsets.size() != normals.size()) throw DimensionMismatch("offset count differs from constraint count");
    for (const auto& a : normals) {
        if (a.size() != d) throw DimensionMismatch("constraint normal has wrong dimension");
        if (!all_finite(a)) throw NonFinite("non-finite constraint normal");
    }
    if (!all_finite(offsets)) throw NonFinite("non-finite offset");
    if (!provenance.translation.empty() && provenance.translation.size() != d)
        throw DimensionMismatch("translation has wrong dimension");
}

double EuclideanInstance::violation(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < n(); ++i) v = std::max(v, offsets[i] - dot(normals[i], x));
    return v;
}

bool EuclideanInstance::is_feasible(std::span<const double> x, double tol) const { return violation(x) <= tol; }

// ---------------------------------------------------------------------------
// Rng

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

Vector Rng::unit_vector(std::size_t dim) {
    for (;;) {
        Vector v(dim);
        for (auto& x : v) x = gaussian();
        const double n = norm(v);
        if (n > 1e-12) {
            scale(v, 1.0 / n);
            return v;
        }
    }
}

// ---------------------------------------------------------------------------
// Generators

namespace {

Vector draw_translation(Rng& rng, std::size_t d) {
    Vector t(d);
    for (auto& x : t) x = rng.uniform(-1.0, 1.0);
    return t;
}

void push_ex1_constraint(EuclideanInstance& inst, Rng& rng) {
    inst.normals.push_back(rng.unit_vector(inst.d));
    inst.offsets.push_back(rng.uniform(kOffsetLow, kOffsetHigh));
}

EuclideanInstance gen_unique_point(Family family, std::size_t d, std::size_t n, std::uint64_t seed) {
    if (d == 0) throw DimensionTooSmall("dimension must be positive");
    if (n < d + 1)
        throw DimensionTooSmall("family " + to_string(family) + " needs n >= d+1 (d=" + std::to_string(d) +
                                ", n=" + std::to_string(n) + ")");
    Rng rng(seed);
    EuclideanInstance inst;
    inst.d = d;
    inst.provenance.family = family;
    inst.provenance.seed = seed;
    Vector sum(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        inst.normals.push_back(rng.unit_vector(d));
        inst.offsets.push_back(0.0);
        axpy(1.0, inst.normals.back(), sum);
    }
    Vector closing = normalized(sum);
    scale(closing, -1.0);
    inst.normals.push_back(std::move(closing));
    inst.offsets.push_back(family == Family::ex3 ? kInfeasibleOffset : 0.0);
    for (std::size_t i = d + 1; i < n; ++i) push_ex1_constraint(inst, rng);
    const Vector t = draw_translation(rng, d);
    return translate(std::move(inst), t);
}

} // namespace

EuclideanInstance gen_ex1(std::size_t d, std::size_t n, std::uint64_t seed) {
    if (d == 0 || n == 0) throw DimensionTooSmall("ex1 needs d >= 1 and n >= 1");
    Rng rng(seed);
    EuclideanInstance inst;
    inst.d = d;
    inst.provenance.family = Family::ex1;
    inst.provenance.seed = seed;
    for (std::size_t i = 0; i < n; ++i) push_ex1_constraint(inst, rng);
    const Vector t = draw_translation(rng, d);
    return translate(std::move(inst), t);
}

EuclideanInstance gen_ex2(std::size_t d, std::size_t n, std::uint64_t seed) {
    return gen_unique_point(Family::ex2, d, n, seed);
}

EuclideanInstance gen_ex3(std::size_t d, std::size_t n, std::uint64_t seed) {
    return gen_unique_point(Family::ex3, d, n, seed);
}

EuclideanInstance generate(Family family, std::size_t d, std::size_t n, std::uint64_t seed) {
    switch (family) {
    case Family::ex1: return gen_ex1(d, n, seed);
    case Family::ex2: return gen_ex2(d, n, seed);
    case Family::ex3: return gen_ex3(d, n, seed);
    case Family::custom: break;
    }
    throw ConfigError("cannot generate family 'custom'");
}

EuclideanInstance translate(EuclideanInstance inst, std::span<const double> t) {
    if (t.size() != inst.d) throw DimensionMismatch("translate: vector has wrong dimension");
    for (std::size_t i = 0; i < inst.n(); ++i) inst.offsets[i] += dot(inst.normals[i], t);
    auto& acc = inst.provenance.translation;
    if (acc.empty()) acc.assign(inst.d, 0.0);
    axpy(1.0, t, acc);
    return inst;
}

// ---------------------------------------------------------------------------
// File format
//
//   feas-v1 <d> <n> <family> <seed>
//   a_1 ... a_d b            (n lines)
//   translation t_1 ... t_d  (coordinates omitted when there is none)

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kMagic = "feas-v";
constexpr int kVersion = 1;

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) throw ParseError(line, "bad number '" + tok + "'");
    if (!std::isfinite(v)) throw ParseError(line, "non-finite number '" + tok + "'");
    return v;
}

std::uint64_t parse_count(const std::string& tok, std::size_t line, const char* what) {
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(line, std::string("bad ") + what + " '" + tok + "'");
    return v;
}

} // namespace

void write_instance(const EuclideanInstance& inst, std::ostream& out) {
    inst.validate();
    out << kMagic << kVersion << ' ' << inst.d << ' ' << inst.n() << ' ' << to_string(inst.provenance.family) << ' '
        << inst.provenance.seed << '\n';
    for (std::size_t i = 0; i < inst.n(); ++i) {
        for (double a : inst.normals[i]) out << format_double(a) << ' ';
        out << format_double(inst.offsets[i]) << '\n';
    }
    out << "translation";
    for (double t : inst.provenance.translation) out << ' ' << format_double(t);
    out << '\n';
}

void write_instance(const EuclideanInstance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_instance(inst, out);
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

EuclideanInstance read_instance(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> std::vector<std::string> {
        while (std::getline(in, line)) {
            ++lineno;
            auto toks = split(line);
            if (!toks.empty()) return toks;
        }
        return {};
    };

    auto header = next_line();
    if (header.empty()) throw ParseError(lineno, "empty file");
    const std::string& magic = header[0];
    if (magic.rfind(kMagic, 0) != 0) throw ParseError(lineno, "missing feas-v header");
    if (magic != std::string(kMagic) + std::to_string(kVersion))
        throw VersionMismatch("unsupported format version '" + magic + "'");
    if (header.size() != 5) throw ParseError(lineno, "header must be 'feas-v1 d n family seed'");

    EuclideanInstance inst;
    inst.d = parse_count(header[1], lineno, "dimension");
    const std::uint64_t n = parse_count(header[2], lineno, "constraint count");
    if (inst.d == 0) throw ParseError(lineno, "dimension must be positive");
    if (n == 0) throw ParseError(lineno, "empty constraint list");
    try {
        inst.provenance.family = parse_family(header[3]);
    } catch (const ConfigError&) {
        throw ParseError(lineno, "unknown family '" + header[3] + "'");
    }
    inst.provenance.seed = parse_count(header[4], lineno, "seed");

    for (std::uint64_t i = 0; i < n; ++i) {
        auto toks = next_line();
        if (toks.empty()) throw ParseError(lineno, "expected " + std::to_string(n) + " constraints");
        if (toks.size() != inst.d + 1)
            throw ParseError(lineno, "constraint needs " + std::to_string(inst.d + 1) + " numbers");
        Vector a(inst.d);
        for (std::size_t j = 0; j < inst.d; ++j) a[j] = parse_double(toks[j], lineno);
        inst.normals.push_back(std::move(a));
        inst.offsets.push_back(parse_double(toks[inst.d], lineno));
    }

    auto trailer = next_line();
    if (trailer.empty() || trailer[0] != "translation") throw ParseError(lineno, "missing translation line");
    if (trailer.size() != 1 && trailer.size() != inst.d + 1)
        throw ParseError(lineno, "translation needs 0 or " + std::to_string(inst.d) + " numbers");
    for (std::size_t j = 1; j < trailer.size(); ++j) inst.provenance.translation.push_back(parse_double(trailer[j], lineno));
    if (!next_line().empty()) throw ParseError(lineno, "trailing content after translation line");
    return inst;
}

EuclideanInstance read_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_instance(in);
}

} // namespace feas
