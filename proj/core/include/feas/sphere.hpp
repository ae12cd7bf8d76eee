#pragma once

// Spherical geometry: homogenization, violation, touching spheres, spanning
// tests, vertex diameter, diameter/circumradius bounds and the stretching map
// psi_alpha.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "feas/numkit.hpp"
#include "feas/problems.hpp"

namespace feas {

inline constexpr double kZeroTol = 1e-10;  // deficiency / barycentric zero
inline constexpr double kPoleTol = 1e-12;  // dehomogenization guard
inline constexpr double kUnitTol = 1e-10;

/// A point of the unit sphere S^d in R^{d+1}.
class UnitVector {
public:
    /// Normalizes v. Throws NonFinite for zero or non-finite input.
    static UnitVector normalize(std::span<const double> v);
    /// Accepts v only if | |v| - 1 | <= kUnitTol.
    static UnitVector from_unit(Vector v);

    std::span<const double> coords() const noexcept { return coords_; }
    const Vector& vec() const noexcept { return coords_; }
    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    operator std::span<const double>() const noexcept { return coords_; }

private:
    explicit UnitVector(Vector v) : coords_(std::move(v)) {}
    Vector coords_;
};

struct HomogenizationMeta {
    std::size_t euclidean_dim = 0;
    /// Feasible points must have a positive last coordinate.
    bool side_condition = true;
};

/// n unit normals a_i on S^d; feasible points x satisfy a_i^T x >= 0.
struct SphericalInstance {
    std::size_t ambient_dim = 0;
    std::vector<UnitVector> normals;
    std::optional<HomogenizationMeta> origin_meta;

    std::size_t n() const noexcept { return normals.size(); }
    /// Sphere dimension d (ambient_dim - 1).
    std::size_t sphere_dim() const noexcept { return ambient_dim - 1; }
    void validate() const;
    static SphericalInstance from_vectors(const std::vector<Vector>& normals);
};

SphericalInstance homogenize(const EuclideanInstance& inst);
/// Lifts a point of R^d to S^d.
UnitVector homogenize_point(std::span<const double> x);
/// Throws AtInfinity when the last coordinate is <= kPoleTol.
Vector dehomogenize(std::span<const double> x);

struct Violation {
    double value = 0.0;
    /// Most violated constraint (lowest index on ties); meaningful when value > 0.
    std::size_t index = 0;
};

Violation violation(const SphericalInstance& inst, std::span<const double> x);
/// First constraint with a_i^T x < -tol, if any.
std::optional<std::size_t> first_violated(const SphericalInstance& inst, std::span<const double> x, double tol);
/// Membership in the information set M(x) = {a : a^T x >= -v(x)}.
bool in_information_set(std::span<const double> a, std::span<const double> x, double v);

struct TouchingSphere {
    Vector center;
    double radius = 0.0;
    Vector barycentric;
    bool center_in_hull = false;
    double deficiency = 0.0;
};

/// Sphere centered in the affine hull of the points and passing through all of
/// them. Throws AffinelyDependent.
TouchingSphere touching_sphere(std::span<const Vector> points);
bool is_positively_spanning(std::span<const Vector> points);
std::pair<bool, double> is_nearly_positively_spanning(std::span<const Vector> points);

struct VertexDiameter {
    double value = 0.0;
    std::size_t witness = 0;
};

/// Max over vertices of the angle to the opposite-facet point built from the
/// barycentric coefficients of the circumcenter. Throws PreconditionViolated
/// unless the circumcenter is interior (all coefficients > kZeroTol).
VertexDiameter vertex_diameter(std::span<const Vector> points);
/// cos of the vertex diameter of a regular simplex with cos(circumradius) = cos_r.
double regular_vertex_diameter(double cos_r, std::size_t d);

struct SantaloBounds {
    double cos_lower = 0.0;
    double cos_upper = 0.0;
};

SantaloBounds santalo_bounds(double cos_r, std::size_t d);
/// Upper bound on sin(phi), the half-width of the zone holding the feasible set.
double zone_width_bound(double cos_r, std::size_t d);

/// Stretches the pole component of x by alpha and renormalizes.
Vector psi_alpha(std::span<const double> x, double alpha, std::span<const double> pole);
double local_volume_factor(double beta, double alpha, std::size_t d);

/// Deficiency threshold of the rescaling algorithm: sqrt(((4/3)^{2/(d+2)} - 1)/3).
double beta_d(std::size_t d);

/// Angle between two unit vectors using a clamped arccosine.
double spherical_angle(std::span<const double> a, std::span<const double> b);

} // namespace feas
