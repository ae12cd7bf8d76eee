#include "feas/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "feas/errors.hpp"

namespace feas {

UnitVector UnitVector::normalize(std::span<const double> v) { return UnitVector(normalized(v)); }

UnitVector UnitVector::from_unit(Vector v) {
    if (!all_finite(v)) throw NonFinite("UnitVector: non-finite coordinate");
    if (std::abs(norm(v) - 1.0) > kUnitTol) throw PreconditionViolated("UnitVector: vector is not of unit length");
    return UnitVector(std::move(v));
}

void SphericalInstance::validate() const {
    if (ambient_dim < 1) throw DimensionMismatch("spherical instance needs ambient dimension >= 1");
    if (normals.empty()) throw DimensionMismatch("spherical instance has no normals");
    for (const auto& a : normals)
        if (a.size() != ambient_dim) throw DimensionMismatch("normal has wrong dimension");
}

SphericalInstance SphericalInstance::from_vectors(const std::vector<Vector>& normals) {
    if (normals.empty()) throw DimensionMismatch("spherical instance has no normals");
    SphericalInstance inst;
    inst.ambient_dim = normals.front().size();
    for (const auto& a : normals) {
        if (a.size() != inst.ambient_dim) throw DimensionMismatch("normal has wrong dimension");
        inst.normals.push_back(UnitVector::normalize(a));
    }
    return inst;
}

SphericalInstance homogenize(const EuclideanInstance& inst) {
    inst.validate();
    SphericalInstance out;
    out.ambient_dim = inst.d + 1;
    out.origin_meta = HomogenizationMeta{inst.d, true};
    out.normals.reserve(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i) {
        Vector v(inst.normals[i]);
        v.push_back(-inst.offsets[i]);
        if (norm(v) == 0.0) throw ZeroConstraint(i);
        out.normals.push_back(UnitVector::normalize(v));
    }
    return out;
}

UnitVector homogenize_point(std::span<const double> x) {
    Vector v(x.begin(), x.end());
    v.push_back(1.0);
    return UnitVector::normalize(v);
}

Vector dehomogenize(std::span<const double> x) {
    if (x.empty()) throw DimensionMismatch("dehomogenize: empty vector");
    const double last = x.back();
    if (!(last > kPoleTol)) throw AtInfinity("point lies at or beyond the horizon (last coordinate <= 1e-12)");
    Vector out(x.begin(), x.end() - 1);
    scale(out, 1.0 / last);
    return out;
}

Violation violation(const SphericalInstance& inst, std::span<const double> x) {
    Violation v;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inst.n(); ++i) {
        const double neg = -dot(inst.normals[i], x);
        if (neg > worst) {
            worst = neg;
            v.index = i;
        }
    }
    v.value = std::max(0.0, worst);
    return v;
}

std::optional<std::size_t> first_violated(const SphericalInstance& inst, std::span<const double> x, double tol) {
    for (std::size_t i = 0; i < inst.n(); ++i)
        if (dot(inst.normals[i], x) < -tol) return i;
    return std::nullopt;
}

bool in_information_set(std::span<const double> a, std::span<const double> x, double v) {
    return dot(a, x) >= -v;
}

// ---------------------------------------------------------------------------
// Touching spheres

namespace {

struct AffineFrame {
    OrthoFactorization diffs;
    Vector origin_projection;     // foot of the perpendicular from 0 onto aff(points)
    Vector origin_barycentric;
};

AffineFrame affine_frame(std::span<const Vector> points) {
    if (points.empty()) throw AffinelyDependent("empty point set");
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw DimensionMismatch("points have different dimensions");
    Matrix diff(dim, 0);
    for (std::size_t j = 1; j < points.size(); ++j) {
        Vector dj(points[j]);
        axpy(-1.0, points[0], dj);
        diff.append_col(dj);
    }
    OrthoFactorization f(dim);
    if (diff.cols() > 0) {
        try {
            f = OrthoFactorization::factorize(diff);
        } catch (const RankDeficient&) {
            throw AffinelyDependent("points are affinely dependent");
        }
    }
    // p0 = resid + D c  =>  projection of 0 is p0 - D c = resid.
    LeastSquares ls = f.least_squares(points[0]);
    Vector bary(points.size());
    double tail = 0.0;
    for (std::size_t j = 1; j < points.size(); ++j) {
        bary[j] = -ls.coefficients[j - 1];
        tail += bary[j];
    }
    bary[0] = 1.0 - tail;
    return {std::move(f), std::move(ls.residual), std::move(bary)};
}

} // namespace

TouchingSphere touching_sphere(std::span<const Vector> points) {
    AffineFrame fr = affine_frame(points);
    TouchingSphere ts;
    const std::size_t k = points.size();
    if (k == 1) {
        ts.center = points[0];
        ts.barycentric = {1.0};
    } else {
        // Circumcenter p0 + D t with D^T D t = h, h_j = |D_j|^2 / 2.
        const Matrix& d = fr.diffs.columns();
        Vector h(k - 1);
        for (std::size_t j = 0; j + 1 < k; ++j) h[j] = 0.5 * dot(d.col(j), d.col(j));
        const Vector t = fr.diffs.solve_r(fr.diffs.solve_rt(h));
        ts.center = points[0];
        for (std::size_t j = 0; j + 1 < k; ++j) axpy(t[j], d.col(j), ts.center);
        ts.barycentric.assign(k, 0.0);
        double tail = 0.0;
        for (std::size_t j = 1; j < k; ++j) {
            ts.barycentric[j] = t[j - 1];
            tail += t[j - 1];
        }
        ts.barycentric[0] = 1.0 - tail;
    }
    Vector diff0(points[0]);
    axpy(-1.0, ts.center, diff0);
    ts.radius = norm(diff0);
    ts.center_in_hull = std::all_of(ts.barycentric.begin(), ts.barycentric.end(), [](double m) { return m >= -kZeroTol; });
    ts.deficiency = norm(fr.origin_projection);
    return ts;
}

std::pair<bool, double> is_nearly_positively_spanning(std::span<const Vector> points) {
    AffineFrame fr = affine_frame(points);
    const bool inside = std::all_of(fr.origin_barycentric.begin(), fr.origin_barycentric.end(),
                                    [](double m) { return m >= -kZeroTol; });
    return {inside, norm(fr.origin_projection)};
}

bool is_positively_spanning(std::span<const Vector> points) {
    auto [inside, def] = is_nearly_positively_spanning(points);
    return inside && def <= kZeroTol;
}

// ---------------------------------------------------------------------------
// Vertex diameter and bounds

double spherical_angle(std::span<const double> a, std::span<const double> b) {
    const Vector ua = normalized(a);
    const Vector ub = normalized(b);
    Vector diff(ua), sum(ua);
    axpy(-1.0, ub, diff);
    axpy(1.0, ub, sum);
    return 2.0 * std::atan2(norm(diff), norm(sum));
}

VertexDiameter vertex_diameter(std::span<const Vector> points) {
    if (points.size() < 2) throw PreconditionViolated("vertex diameter needs at least two vertices");
    const TouchingSphere ts = touching_sphere(points);
    for (double m : ts.barycentric)
        if (!(m > kZeroTol)) throw PreconditionViolated("circumcenter is not interior to the simplex");
    VertexDiameter best{-1.0, 0};
    for (std::size_t i = 0; i < points.size(); ++i) {
        Vector opposite(ts.center);
        axpy(-ts.barycentric[i], points[i], opposite);
        const double angle = spherical_angle(points[i], opposite);
        if (angle > best.value) best = {angle, i};
    }
    return best;
}

double regular_vertex_diameter(double cos_r, std::size_t d) {
    if (cos_r < 0.0 || cos_r > 1.0) throw PreconditionViolated("cos R' must lie in [0, 1]");
    const double dd = static_cast<double>(d);
    const double c2 = cos_r * cos_r;
    return ((dd + 1.0) * c2 - 1.0) / std::sqrt(1.0 + (dd - 1.0) * (dd + 1.0) * c2);
}

SantaloBounds santalo_bounds(double cos_r, std::size_t d) {
    if (cos_r < 0.0 || cos_r > 1.0) throw PreconditionViolated("cos R' must lie in [0, 1]");
    if (d == 0) throw PreconditionViolated("santalo_bounds needs d >= 1");
    const double dd = static_cast<double>(d);
    const double c2 = cos_r * cos_r;
    const double num = (dd + 1.0) * c2 - 1.0;
    SantaloBounds b;
    b.cos_lower = 2.0 * c2 - 1.0;
    if (cos_r >= 1.0 / std::sqrt(dd + 1.0)) {
        b.cos_upper = num / dd;
    } else if (d % 2 == 1) {
        b.cos_upper = num / (1.0 + (dd + 1.0) * c2);
    } else {
        b.cos_upper = num / (std::sqrt(1.0 + (dd + 1.0) * c2) *
                             std::sqrt(1.0 + (dd + 1.0) * (dd - 2.0) / (dd + 2.0) * c2));
    }
    return b;
}

double zone_width_bound(double cos_r, std::size_t d) {
    if (cos_r < 0.0 || cos_r > 1.0) throw PreconditionViolated("cos R' must lie in [0, 1]");
    return std::min(1.0, static_cast<double>(d + 1) * cos_r);
}

Vector psi_alpha(std::span<const double> x, double alpha, std::span<const double> pole) {
    if (!(alpha > 0.0)) throw PreconditionViolated("psi_alpha needs alpha > 0");
    if (x.size() != pole.size()) throw DimensionMismatch("psi_alpha: dimension mismatch");
    const Vector p = normalized(pole);
    Vector y(x.begin(), x.end());
    axpy((alpha - 1.0) * dot(p, x), p, y);
    return normalized(y);
}

double local_volume_factor(double beta, double alpha, std::size_t d) {
    if (std::abs(beta) > 1.0) throw PreconditionViolated("|beta| must be <= 1");
    if (!(alpha > 0.0)) throw PreconditionViolated("alpha must be positive");
    return alpha / std::pow(1.0 + beta * beta * (alpha * alpha - 1.0), 0.5 * static_cast<double>(d + 1));
}

double beta_d(std::size_t d) {
    const double dd = static_cast<double>(d);
    return std::sqrt((std::pow(4.0 / 3.0, 2.0 / (dd + 2.0)) - 1.0) / 3.0);
}

} // namespace feas
