#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "feas/numkit.hpp"

namespace feas {

enum class Family { ex1, ex2, ex3, custom };

std::string to_string(Family f);
/// Accepts "ex1", "ex2", "ex3", "custom"; throws ConfigError otherwise.
Family parse_family(const std::string& s);

struct Provenance {
    Family family = Family::custom;
    std::uint64_t seed = 0;
    /// The random translation applied after construction; empty when none.
    Vector translation;
};

/// n constraints a_i^T x >= b_i in R^d.
struct EuclideanInstance {
    std::size_t d = 0;
    std::vector<Vector> normals;
    Vector offsets;
    Provenance provenance;

    std::size_t n() const noexcept { return normals.size(); }

    /// Throws DimensionMismatch / NonFinite when the shape or entries are invalid.
    void validate() const;

    /// max(0, max_i (b_i - a_i^T x))
    double violation(std::span<const double> x) const;
    bool is_feasible(std::span<const double> x, double tol) const;
};

/// splitmix64 seeding a xoshiro256** stream. Bit-identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal (Marsaglia polar method).
    double gaussian();
    /// Uniform point on the unit sphere S^{dim-1}.
    Vector unit_vector(std::size_t dim);

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Ex1 offsets are drawn from [kOffsetLow, kOffsetHigh]; translations from [-1, 1]^d.
inline constexpr double kOffsetLow = -1.0;
inline constexpr double kOffsetHigh = -1e-6;
inline constexpr double kInfeasibleOffset = 10.0;

EuclideanInstance gen_ex1(std::size_t d, std::size_t n, std::uint64_t seed);
EuclideanInstance gen_ex2(std::size_t d, std::size_t n, std::uint64_t seed);
EuclideanInstance gen_ex3(std::size_t d, std::size_t n, std::uint64_t seed);
EuclideanInstance generate(Family family, std::size_t d, std::size_t n, std::uint64_t seed);

/// b_i <- b_i + a_i^T t. The translation is accumulated in the provenance.
EuclideanInstance translate(EuclideanInstance inst, std::span<const double> t);

void write_instance(const EuclideanInstance& inst, std::ostream& out);
void write_instance(const EuclideanInstance& inst, const std::filesystem::path& path);
EuclideanInstance read_instance(std::istream& in);
EuclideanInstance read_instance(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

} // namespace feas
