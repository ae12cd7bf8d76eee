#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "feas/errors.hpp"
#include "feas/sphere.hpp"
#include "oracle.hpp"

using namespace feas;

namespace {

const double kS2 = std::sqrt(0.5);

Vector unit(std::size_t n, std::size_t i) {
    Vector v(n, 0.0);
    v[i] = 1.0;
    return v;
}

Vector angle2(double deg) {
    const double r = deg * std::numbers::pi / 180.0;
    return {std::cos(r), std::sin(r)};
}

// Regular simplex of d+1 vertices on S^d about the last axis, spherical
// circumradius R with cos R = cos_r.
std::vector<Vector> regular_simplex(std::size_t d, double cos_r) {
    const auto k = static_cast<Eigen::Index>(d + 1);
    Eigen::MatrixXd centered = Eigen::MatrixXd::Identity(k, k) - Eigen::MatrixXd::Constant(k, k, 1.0 / k);
    // Orthonormal basis of the complement of the all-ones direction.
    Eigen::MatrixXd full(k, k);
    full << Eigen::VectorXd::Constant(k, 1.0), centered.leftCols(k - 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(full);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd basis = q.rightCols(k - 1);
    const double sin_r = std::sqrt(1 - cos_r * cos_r);
    std::vector<Vector> pts;
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::VectorXd w = basis.transpose() * centered.col(i);
        w.normalize();
        Vector p(d + 1);
        for (std::size_t j = 0; j < d; ++j) p[j] = sin_r * w(j);
        p[d] = cos_r;
        pts.push_back(p);
    }
    return pts;
}

std::vector<Vector> random_points(std::size_t count, std::size_t dim, std::mt19937_64& gen) {
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < count; ++i) pts.push_back(oracle::random_unit(dim, gen));
    return pts;
}

// Points in the cap of angular radius rho about center.
std::vector<Vector> cap_points(std::size_t count, const Vector& center, double rho, std::mt19937_64& gen) {
    std::vector<Vector> pts;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    while (pts.size() < count) {
        const auto p = oracle::random_unit(center.size(), gen);
        if (dot(p, center) >= std::cos(rho)) pts.push_back(p);
    }
    return pts;
}

// Distance from the origin to conv(points), by enumerating every subset whose
// affine-hull projection of the origin is inside the subset's hull.
double hull_distance(const std::vector<Vector>& pts) {
    const std::size_t m = pts.size();
    double best = 1e300;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<Eigen::VectorXd> sub;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i)) sub.push_back(oracle::to_eigen(pts[i]));
        const auto k = static_cast<Eigen::Index>(sub.size());
        // Minimize |sum mu_i p_i| subject to sum mu = 1 via the KKT system.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) kkt(i, j) = sub[i].dot(sub[j]);
        kkt.block(0, k, k, 1).setOnes();
        kkt.block(k, 0, 1, k).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
        rhs(k) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (lu.rank() < k + 1) continue;
        const Eigen::VectorXd mu = lu.solve(rhs).head(k);
        if (mu.minCoeff() < -1e-12) continue;
        Eigen::VectorXd p = Eigen::VectorXd::Zero(sub[0].size());
        for (Eigen::Index i = 0; i < k; ++i) p += mu(i) * sub[i];
        best = std::min(best, p.norm());
    }
    return best;
}

// Opposite-facet angle by intersecting the great circle through a_i and C with
// the hyperplane spanned by the other vertices.
double facet_angle(const std::vector<Vector>& pts, std::size_t i, const Eigen::VectorXd& c) {
    const auto dim = static_cast<Eigen::Index>(pts[0].size());
    Eigen::MatrixXd others(pts.size() - 1, dim);
    for (std::size_t j = 0, r = 0; j < pts.size(); ++j)
        if (j != i) others.row(r++) = oracle::to_eigen(pts[j]).transpose();
    const Eigen::VectorXd nrm = oracle::kernel(others).col(0);
    const Eigen::VectorXd a = oracle::to_eigen(pts[i]);
    const double t = nrm.dot(c) / nrm.dot(a);
    Eigen::VectorXd p = c - t * a;
    p.normalize();
    return std::acos(std::clamp(a.dot(p), -1.0, 1.0));
}

// Minimal enclosing cap radius of a few points in an open hemisphere.
double min_cap_radius(const std::vector<Vector>& pts) {
    const std::size_t m = pts.size();
    double best = 10.0;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<Vector> sub;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i)) sub.push_back(pts[i]);
        if (sub.size() > pts[0].size()) continue;
        TouchingSphere ts;
        try {
            ts = touching_sphere(sub);
        } catch (const AffinelyDependent&) {
            continue;
        }
        if (ts.deficiency < 1e-12) continue;
        const Vector c = normalized(ts.center);
        double r = 0;
        for (const auto& p : pts) r = std::max(r, spherical_angle(c, p));
        best = std::min(best, r);
    }
    return best;
}

} // namespace

TEST(Homogenize, Examples) {
    EuclideanInstance e;
    e.d = 2;
    e.normals = {{1, 0}, {0, 1}};
    e.offsets = {-1, 0};
    const auto s = homogenize(e);
    ASSERT_EQ(s.ambient_dim, 3u);
    EXPECT_NEAR(s.normals[0][0], kS2, 1e-15);
    EXPECT_NEAR(s.normals[0][1], 0.0, 1e-15);
    EXPECT_NEAR(s.normals[0][2], kS2, 1e-15);
    EXPECT_EQ(s.normals[1].vec(), (Vector{0, 1, 0}));
    ASSERT_TRUE(s.origin_meta.has_value());
    EXPECT_EQ(s.origin_meta->euclidean_dim, 2u);
    EXPECT_TRUE(s.origin_meta->side_condition);
}

TEST(Homogenize, ZeroConstraint) {
    EuclideanInstance e;
    e.d = 2;
    e.normals = {{1, 0}, {0, 0}};
    e.offsets = {-1, 0};
    try {
        (void)homogenize(e);
        FAIL();
    } catch (const ZeroConstraint& z) {
        EXPECT_EQ(z.index(), 1u);
    }
}

TEST(Homogenize, PreservesFeasibility) {
    std::mt19937_64 gen(9);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto e = gen_ex1(4, 30, 9 + seed);
        const auto s = homogenize(e);
        const auto origin = homogenize_point(Vector(4, 0.0));
        EXPECT_EQ(origin.vec(), (Vector{0, 0, 0, 0, 1}));
        for (int k = 0; k < 200; ++k) {
            Vector x = oracle::random_vector(4, gen);
            const auto y = homogenize_point(x);
            for (std::size_t i = 0; i < e.n(); ++i) {
                const double lhs = dot(e.normals[i], x) - e.offsets[i];
                if (std::abs(lhs) < 1e-9) continue;
                ASSERT_EQ(lhs >= 0, dot(s.normals[i], y) >= 0);
            }
        }
    }
}

TEST(Dehomogenize, Examples) {
    EXPECT_EQ(dehomogenize(Vector{0, 0, 1}), (Vector{0, 0}));
    const auto x = dehomogenize(Vector{kS2, 0, kS2});
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], 0.0, 1e-15);
    EXPECT_THROW(dehomogenize(Vector{1, 0, 0}), AtInfinity);
    EXPECT_THROW(dehomogenize(Vector{1, 0, 1e-13}), AtInfinity);
}

TEST(Dehomogenize, RoundTrip) {
    std::mt19937_64 gen(3);
    for (int k = 0; k < 100; ++k) {
        const Vector x = oracle::random_vector(5, gen);
        const auto back = dehomogenize(homogenize_point(x));
        for (std::size_t i = 0; i < 5; ++i) ASSERT_NEAR(back[i], x[i], 1e-12 * (1 + std::abs(x[i])));
    }
}

TEST(Violation, Examples) {
    const auto one = SphericalInstance::from_vectors({{0, 1}});
    EXPECT_EQ(violation(one, Vector{1, 0}).value, 0.0);
    const auto v = violation(one, Vector{0, -1});
    EXPECT_EQ(v.value, 1.0);
    EXPECT_EQ(v.index, 0u);
}

TEST(Violation, LowestIndexWinsTies) {
    // Mirror images give bit-identical violations.
    const auto three = SphericalInstance::from_vectors({angle2(90), {-0.6, 0.8}, {-0.6, -0.8}});
    const auto v = violation(three, Vector{1, 0});
    EXPECT_EQ(v.value, 0.6);
    EXPECT_EQ(v.index, 1u);
    // At 90/210/330 only the 210 degree normal attains the maximum.
    const auto other = SphericalInstance::from_vectors({angle2(90), angle2(210), angle2(330)});
    const auto w = violation(other, Vector{1, 0});
    EXPECT_NEAR(w.value, std::sqrt(3.0) / 2, 1e-15);
    EXPECT_EQ(w.index, 1u);
    EXPECT_EQ(first_violated(other, Vector{1, 0}, 0.0), std::optional<std::size_t>(1));
    EXPECT_FALSE(first_violated(other, Vector{0, 1}, 0.9).has_value());
}

TEST(InformationSet, Membership) {
    EXPECT_TRUE(in_information_set(Vector{0, 1}, Vector{1, 0}, 0.0));
    EXPECT_FALSE(in_information_set(Vector{-1, 0}, Vector{1, 0}, 0.5));
    EXPECT_TRUE(in_information_set(Vector{-0.5, 0}, Vector{1, 0}, 0.5));
}

TEST(TouchingSphere, Examples) {
    std::vector<Vector> two{unit(3, 0), unit(3, 1)};
    auto ts = touching_sphere(two);
    EXPECT_NEAR(ts.center[0], 0.5, 1e-15);
    EXPECT_NEAR(ts.center[1], 0.5, 1e-15);
    EXPECT_NEAR(ts.center[2], 0.0, 1e-15);
    EXPECT_NEAR(ts.radius, kS2, 1e-15);
    EXPECT_NEAR(ts.deficiency, kS2, 1e-15);
    EXPECT_TRUE(ts.center_in_hull);

    std::vector<Vector> three{unit(4, 0), unit(4, 1), unit(4, 2)};
    ts = touching_sphere(three);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ts.center[i], 1.0 / 3, 1e-15);
    EXPECT_NEAR(ts.radius, std::sqrt(6.0) / 3, 1e-15);
    EXPECT_NEAR(ts.deficiency, 1 / std::sqrt(3.0), 1e-15);

    std::vector<Vector> single{normalized(Vector{1, 2, 2})};
    ts = touching_sphere(single);
    EXPECT_EQ(ts.radius, 0.0);
    EXPECT_NEAR(ts.deficiency, 1.0, 1e-15);

    std::vector<Vector> dependent{unit(2, 0), unit(2, 0)};
    EXPECT_THROW(touching_sphere(dependent), AffinelyDependent);
}

TEST(TouchingSphere, RandomSetsSatisfyCenterProperties) {
    std::mt19937_64 gen(17);
    int checked = 0;
    while (checked < 200) {
        const std::size_t d = 1 + gen() % 8;
        const std::size_t k = 1 + gen() % (d + 1);
        const auto pts = random_points(k, d + 1, gen);
        const auto ts = touching_sphere(pts);
        // Equal inner products with every point.
        double lo = 1e300, hi = -1e300;
        for (const auto& p : pts) {
            lo = std::min(lo, dot(p, ts.center));
            hi = std::max(hi, dot(p, ts.center));
        }
        ASSERT_LE(hi - lo, 1e-9 * std::max(1.0, norm(ts.center)));
        // Center is an affine combination with the stated coefficients.
        Vector c(d + 1, 0.0);
        double sum = 0;
        for (std::size_t i = 0; i < k; ++i) {
            axpy(ts.barycentric[i], pts[i], c);
            sum += ts.barycentric[i];
        }
        ASSERT_NEAR(sum, 1.0, 1e-10);
        for (std::size_t j = 0; j <= d; ++j) ASSERT_NEAR(c[j], ts.center[j], 1e-10);
        if (ts.center_in_hull) {
            ASSERT_NEAR(ts.deficiency, std::sqrt(1 - ts.radius * ts.radius), 1e-9);
            ++checked;
        }
    }
}

TEST(TouchingSphere, DeficiencyIsHullDistanceWhenNearlySpanning) {
    std::mt19937_64 gen(23);
    int checked = 0;
    while (checked < 60) {
        const std::size_t d = 1 + gen() % 4;
        const std::size_t k = 2 + gen() % d;
        const auto pts = random_points(std::min(k, d + 1), d + 1, gen);
        const auto [nearly, def] = is_nearly_positively_spanning(pts);
        if (!nearly) continue;
        ASSERT_NEAR(def, hull_distance(pts), 1e-7);
        ++checked;
    }
}

TEST(Spanning, Examples) {
    std::vector<Vector> anti{{1, 0}, {-1, 0}};
    EXPECT_TRUE(is_positively_spanning(anti));
    std::vector<Vector> two{{1, 0}, {0, 1}};
    EXPECT_FALSE(is_positively_spanning(two));
    std::vector<Vector> tri{angle2(0), angle2(120), angle2(240)};
    EXPECT_TRUE(is_positively_spanning(tri));

    auto [a, da] = is_nearly_positively_spanning(std::vector<Vector>{unit(3, 0), unit(3, 1)});
    EXPECT_TRUE(a);
    EXPECT_NEAR(da, kS2, 1e-15);
    auto [b, db] = is_nearly_positively_spanning(std::vector<Vector>{unit(3, 0)});
    EXPECT_TRUE(b);
    EXPECT_NEAR(db, 1.0, 1e-15);
    // Three nearly aligned vectors: the projection of 0 lies outside their hull.
    std::vector<Vector> flat{angle2(0), angle2(10), angle2(20)};
    for (auto& p : flat) p.push_back(0.0);
    flat[1][2] = 0.01;
    flat[1] = normalized(flat[1]);
    auto [c, dc] = is_nearly_positively_spanning(flat);
    EXPECT_FALSE(c);
}

TEST(VertexDiameter, TwoPointsGiveTwiceTheRadius) {
    const double r = 0.4;
    std::vector<Vector> pair{angle2(r * 180 / std::numbers::pi), angle2(-r * 180 / std::numbers::pi)};
    const auto vd = vertex_diameter(pair);
    EXPECT_NEAR(vd.value, 2 * r, 1e-12);
    EXPECT_NEAR(regular_vertex_diameter(std::cos(r), 1), std::cos(2 * r), 1e-12);
}

TEST(VertexDiameter, RegularTriangle) {
    const double expected = -0.25 / std::sqrt(1.75);
    EXPECT_NEAR(expected, -0.18898, 1e-5);
    EXPECT_NEAR(regular_vertex_diameter(0.5, 2), expected, 1e-14);
    const auto vd = vertex_diameter(regular_simplex(2, 0.5));
    EXPECT_NEAR(std::cos(vd.value), expected, 1e-12);
}

TEST(VertexDiameter, MatchesFacetIntersection) {
    std::mt19937_64 gen(13);
    int done = 0;
    while (done < 20) {
        const auto pts = cap_points(4, unit(4, 3), 1.2, gen);
        const auto ts = touching_sphere(pts);
        if (ts.barycentric.size() != 4 || *std::min_element(ts.barycentric.begin(), ts.barycentric.end()) <= 1e-3)
            continue;
        const auto vd = vertex_diameter(pts);
        const Eigen::VectorXd c = oracle::to_eigen(ts.center);
        double best = -1;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            const double a = facet_angle(pts, i, c);
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        ASSERT_NEAR(vd.value, best, 1e-9);
        ASSERT_EQ(vd.witness, arg);
        ++done;
    }
}

TEST(VertexDiameter, RequiresInteriorCenter) {
    std::vector<Vector> pts{angle2(0), angle2(10), angle2(20)};
    for (auto& p : pts) p.push_back(0.0);
    pts[1][2] = 0.01;
    pts[1] = normalized(pts[1]);
    EXPECT_THROW(vertex_diameter(pts), PreconditionViolated);
}

TEST(VertexDiameter, RegularSimplicesAgreeWithFormula) {
    for (std::size_t d = 2; d <= 5; ++d)
        for (double cos_r : {0.3, 0.6, 0.9}) {
            const auto vd = vertex_diameter(regular_simplex(d, cos_r));
            EXPECT_NEAR(std::cos(vd.value), regular_vertex_diameter(cos_r, d), 1e-9) << d << " " << cos_r;
        }
}

TEST(RegularVertexDiameter, ZeroRadiusLimit) {
    EXPECT_NEAR(regular_vertex_diameter(1.0, 2), 1.0, 1e-15);
    EXPECT_NEAR(regular_vertex_diameter(0.5, 1), -0.5, 1e-15);
}

TEST(Santalo, Examples) {
    const auto one = santalo_bounds(1.0, 4);
    EXPECT_NEAR(one.cos_lower, 1.0, 1e-15);
    EXPECT_NEAR(one.cos_upper, 1.0, 1e-15);
    const auto odd = santalo_bounds(0.3, 3);
    EXPECT_NEAR(odd.cos_upper, -0.64 / 1.36, 1e-12);
    EXPECT_NEAR(odd.cos_lower, 2 * 0.09 - 1, 1e-12);
    for (std::size_t d = 1; d <= 8; ++d)
        for (double c = 0.0; c <= 1.0; c += 0.05) {
            const auto b = santalo_bounds(c, d);
            ASSERT_LE(b.cos_lower, b.cos_upper + 1e-12) << d << " " << c;
        }
}

TEST(Santalo, DiameterAtMostTwiceCircumradius) {
    std::mt19937_64 gen(21);
    for (int k = 0; k < 500; ++k) {
        const std::size_t d = 2 + k % 2;
        const auto center = oracle::random_unit(d + 1, gen);
        const auto pts = cap_points(3 + gen() % 4, center, 0.3 + 0.9 * (gen() % 100) / 100.0, gen);
        double diam = 0;
        for (const auto& p : pts)
            for (const auto& q : pts) diam = std::max(diam, spherical_angle(p, q));
        const double r = min_cap_radius(pts);
        ASSERT_LE(std::cos(2 * r) - 1e-9, std::cos(diam)) << k;
        const auto b = santalo_bounds(std::cos(r), d);
        ASSERT_LE(b.cos_lower - 1e-9, std::cos(diam)) << k;
    }
}

TEST(ZoneWidth, Examples) {
    EXPECT_EQ(zone_width_bound(0.0, 4), 0.0);
    EXPECT_NEAR(beta_d(10), 0.12795, 1e-5);
    EXPECT_NEAR(zone_width_bound(beta_d(10) / 11, 10), beta_d(10), 1e-15);
    EXPECT_EQ(zone_width_bound(1.0, 5), 1.0);
}

TEST(Psi, Examples) {
    const Vector pole = unit(3, 0);
    EXPECT_EQ(psi_alpha(pole, 2.0, pole), pole);
    const Vector eq{0, 0.6, 0.8};
    const auto same = psi_alpha(eq, 3.0, pole);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(same[i], eq[i], 1e-15);
    const auto y = psi_alpha(Vector{0.6, 0, 0.8}, 2.0, pole);
    EXPECT_NEAR(y[0], 1.2 / std::sqrt(2.08), 1e-15);
    EXPECT_NEAR(y[1], 0.0, 1e-15);
    EXPECT_NEAR(y[2], 0.8 / std::sqrt(2.08), 1e-15);
    EXPECT_NEAR(y[0], 0.83205, 1e-5);
}

TEST(Psi, InverseIsOneOverAlpha) {
    std::mt19937_64 gen(31);
    for (int k = 0; k < 200; ++k) {
        const auto pole = oracle::random_unit(5, gen);
        const auto x = oracle::random_unit(5, gen);
        const double alpha = 0.2 + 3.0 * (gen() % 1000) / 1000.0;
        const auto back = psi_alpha(psi_alpha(x, alpha, pole), 1 / alpha, pole);
        for (std::size_t i = 0; i < 5; ++i) ASSERT_NEAR(back[i], x[i], 1e-12);
    }
}

TEST(VolumeFactor, Examples) {
    EXPECT_EQ(local_volume_factor(0.0, 2.5, 4), 2.5);
    EXPECT_NEAR(local_volume_factor(0.7, 1.0, 4), 1.0, 1e-15);
    EXPECT_NEAR(local_volume_factor(0.5, 2.0, 2), 2 / std::pow(1.75, 1.5), 1e-15);
}

// Area of psi_alpha(M) for a cap M on S^2, estimated by sampling the sphere and
// pulling samples back with psi_{1/alpha}.
TEST(VolumeFactor, MonteCarloLowerBound) {
    const Vector pole = unit(3, 0);
    const double alpha = 2.0;
    struct Cap {
        Vector center;
        double rho;
    };
    const std::vector<Cap> caps{{normalized(Vector{0.2, 1, 0}), 0.3}, {normalized(Vector{0.6, 0.3, 1}), 0.25}};
    for (const auto& cap : caps) {
        // Largest |pole coordinate| over the cap.
        const double beta = std::sin(std::min(std::numbers::pi / 2, std::asin(std::abs(cap.center[0])) + cap.rho));
        const double v_m = (1 - std::cos(cap.rho)) / 2;  // area fraction of the cap
        std::mt19937_64 gen(41);
        const int samples = 1000000;
        int hits = 0;
        for (int s = 0; s < samples; ++s) {
            const auto x = oracle::random_unit(3, gen);
            if (dot(psi_alpha(x, 1 / alpha, pole), cap.center) >= std::cos(cap.rho)) ++hits;
        }
        const double p = static_cast<double>(hits) / samples;
        const double sigma = std::sqrt(p * (1 - p) / samples);
        EXPECT_GE(p + 3 * sigma, local_volume_factor(beta, alpha, 2) * v_m);
    }
}

TEST(SphericalAngle, ClampsRounding) {
    const Vector a{1, 0};
    EXPECT_EQ(spherical_angle(a, a), 0.0);
    EXPECT_NEAR(spherical_angle(a, Vector{-1, 0}), std::numbers::pi, 1e-15);
    EXPECT_FALSE(std::isnan(spherical_angle(Vector{1 + 1e-16, 0}, a)));
}

TEST(UnitVectorTest, Construction) {
    EXPECT_THROW(UnitVector::normalize(Vector{0, 0}), NonFinite);
    EXPECT_THROW(UnitVector::from_unit(Vector{1, 1}), Error);
    EXPECT_NEAR(UnitVector::normalize(Vector{3, 4})[1], 0.8, 1e-15);
}
