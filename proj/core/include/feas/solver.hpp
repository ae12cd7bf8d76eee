#pragma once

// Relaxation solvers for the spherical feasibility problem
//
//   find x on S^d with a_i^T x >= 0 for all i.
//
// Each iterate is the center of the touching sphere of an active set Q of
// normals. A violated constraint is added, and vertices are dropped until the
// new center lies in the convex hull. Four variants share that core:
//
//   combinatorial  plain expansion from y = x^k
//   monotone       y = point of the line x^k a_m closest to the origin
//   polynomial     monotone steps plus a stretching transform whenever the
//                  deficiency falls below beta_d / (d+1)
//   rescaled       combinatorial steps plus a rank-one rescaling of all
//                  normals whenever v(x^k) <= 1/sqrt(d)

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "feas/numkit.hpp"
#include "feas/problems.hpp"
#include "feas/sphere.hpp"

namespace feas {

enum class Variant { combinatorial, monotone, polynomial, rescaled };
enum class ConstraintRule { most_violated, first_violated };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
std::string to_string(ConstraintRule r);
ConstraintRule parse_rule(const std::string& s);

struct SolveConfig {
    Variant variant = Variant::combinatorial;
    double feas_tol = 1e-9;
    /// Iteration cap; 0 selects the default (max(100, 10 d^2), larger for the
    /// polynomial variant).
    std::size_t max_iters = 0;
    /// Defaults to first_violated for the polynomial variant, most_violated
    /// otherwise.
    std::optional<ConstraintRule> constraint_rule;
    /// Instance size L for the polynomial transform budget; estimated when absent.
    std::optional<std::uint64_t> poly_L;
    /// Rescaling trigger; defaults to 1/sqrt(d).
    std::optional<double> rescale_trigger;
    std::uint64_t seed = 0;
    /// Record one IterRecord per iteration (totals are always kept).
    bool record_trace = true;

    void validate() const;
};

/// Point of the form sum_i weights[i] * a_{indices[i]}.
struct Combination {
    Vector point;
    Vector weights;
};

/// The active set Q_k with its factorization and touching-sphere center.
class ActiveSet {
public:
    ActiveSet(const SphericalInstance& inst, std::size_t first);
    ActiveSet(std::vector<std::size_t> indices, OrthoFactorization f);

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    const OrthoFactorization& factorization() const noexcept { return fact_; }
    const Combination& center() const noexcept { return center_; }
    std::size_t size() const noexcept { return indices_.size(); }
    double deficiency() const { return norm(center_.point); }
    bool contains(std::size_t idx) const;
    std::vector<Vector> points(const SphericalInstance& inst) const;

    /// max_{i,j in Q} |a_i^T x - a_j^T x| for the stored center.
    double circumcenter_error() const;

    /// Recomputes the factorization from the instance normals and the center.
    void rebuild(const SphericalInstance& inst);

private:
    void recompute_center();

    std::vector<std::size_t> indices_;
    OrthoFactorization fact_;
    Combination center_;
};

enum class ExpandKind { accepted, needs_drop, positively_spanning };

struct Expansion {
    ExpandKind kind = ExpandKind::accepted;
    /// Candidate center over Q ∪ {m} (weights in that order). For the
    /// positively spanning case this is the affine combination of 0.
    Combination center;
    std::optional<ActiveSet> next;
};

inline constexpr double kBarycentricTol = 1e-10;

Expansion step_expand(const SphericalInstance& inst, const ActiveSet& state, std::size_t m);

struct Drop {
    ActiveSet state;
    /// New y over the reduced Q ∪ {m}.
    Combination y;
    std::size_t left = 0;
};

/// Ratio test along y -> C over Q ∪ {m}; only members of Q may leave.
/// Ties break toward the smallest constraint index.
Drop step_drop(const SphericalInstance& inst, const ActiveSet& state, std::size_t m, const Combination& y,
               const Combination& center);

/// Closest point to the origin on the line through x_k and a_m.
Vector monotone_y(std::span<const double> x_k, std::span<const double> a_m);
/// Right-hand side of the per-step deficiency bound of the monotone variant.
double monotone_bound(double deficiency, double v);

/// Stretches the feasible region about the witness vertex of the vertex
/// diameter: feasible points map by psi_2, normals by psi_{1/2}.
struct PolyTransform {
    SphericalInstance instance;
    Vector pole;
};
PolyTransform transform_polynomial(const SphericalInstance& inst, const ActiveSet& state);

struct Rescale {
    SphericalInstance instance;
    ActiveSet state;
    double lambda = 0.0;
    /// a'_i = normalize(a_i + kappa (a_i^T u) u) with u = x_k / |x_k|.
    double kappa = 0.0;
    Vector direction;
    bool refactorized = false;
};

/// Rescales every normal by I + lambda x_k x_k^T so that a'_r^T u = -sqrt(2/d).
/// Throws TriggerNotMet unless 0 < v <= trigger (no upper check when trigger is
/// absent) and Unsolvable when sqrt(2/d) >= 1.
Rescale rescale_violation(const SphericalInstance& inst, const ActiveSet& state, std::span<const double> x_k,
                          std::size_t r, std::optional<double> trigger = std::nullopt);

struct Reduction {
    SphericalInstance instance;
    /// Orthonormal basis of the complement of span(S), one column per reduced
    /// coordinate.
    Matrix basis;
    /// Original index of each reduced normal.
    std::vector<std::size_t> kept;
    /// Indices of the spanning set and of normals lying in its span.
    std::vector<std::size_t> equalities;
};

Reduction reduce_degenerate(const SphericalInstance& inst, const std::vector<std::size_t>& span_indices);

/// eta_{k+1} = delta + eps sqrt(1 + delta^2) / sqrt(1 + eps^2)
double eq17_fixture(double epsilon, double delta);

struct PositiveSpanCertificate {
    std::vector<std::size_t> indices;
    Vector coefficients;

    /// |sum_i mu_i a_i|
    double residual(const SphericalInstance& inst) const;
    /// mu >= 0, sum mu = 1, residual <= tol.
    bool verify(const SphericalInstance& inst, double tol = 1e-8) const;
};

enum class EventKind { none, rescale, transform, reduce };

struct IterRecord {
    std::size_t iteration = 0;
    /// Polynomial transform round (1-based); 1 for other variants.
    std::size_t round = 1;
    std::size_t active = 0;
    double deficiency = 0.0;
    /// Violation of the chosen constraint at x^k (0 when feasible).
    double violation = 0.0;
    std::optional<std::size_t> constraint;
    bool entered = false;
    std::vector<std::size_t> left;
    EventKind event = EventKind::none;
    /// lambda for a rescale, alpha for a transform.
    double event_value = 0.0;
    Vector pole;
};

struct IterTrace {
    std::vector<IterRecord> records;
    std::size_t iterations = 0;
    std::size_t rescalings = 0;
    std::size_t transforms = 0;
    double wall_ms = 0.0;
};

enum class Status { feasible, infeasible, degenerate, budget_exhausted };
std::string to_string(Status s);

struct SolveOutcome {
    Status status = Status::budget_exhausted;
    /// Feasible point on the sphere (also set for a feasible degenerate outcome).
    std::optional<Vector> point;
    std::optional<Vector> euclidean_point;
    std::optional<PositiveSpanCertificate> certificate;
    std::vector<std::size_t> equality_indices;
    std::shared_ptr<const SolveOutcome> reduced;
    IterTrace trace;

    /// Feasibility of the original instance: true for Feasible and for a
    /// Degenerate outcome whose reduced run found a point.
    bool feasible() const noexcept { return point.has_value(); }
    bool infeasible() const noexcept;
    /// Iterations including the recursive run of a degenerate outcome.
    std::size_t total_iterations() const noexcept;
    std::size_t total_rescalings() const noexcept;
};

/// Homogenized instances are solved with the extra normal e_{d+1} (index n)
/// enforcing a positive last coordinate; certificates may reference it.
SolveOutcome solve(const SphericalInstance& inst, const SolveConfig& cfg);
SolveOutcome solve(const EuclideanInstance& inst, const SolveConfig& cfg);

/// The instance as solved: the side-condition normal appended when present.
SphericalInstance with_side_condition(const SphericalInstance& inst);

/// Bits of the shortest dyadic representation m 2^e of x (|m| odd): bitlen(m) + |e|.
std::uint64_t dyadic_bits(double x);
/// Sum over entries of 1 + min(64, dyadic_bits).
std::uint64_t estimate_instance_size(const EuclideanInstance& inst);
std::uint64_t estimate_instance_size(const SphericalInstance& inst);
/// Like the estimate, but nullopt when some entry needs more than 64 bits.
std::optional<std::uint64_t> exact_instance_size(const EuclideanInstance& inst);

/// Iteration cap used when cfg.max_iters is 0.
std::size_t default_max_iters(Variant v, std::size_t d);

void write_trace_csv(const IterTrace& trace, std::ostream& out);

} // namespace feas
