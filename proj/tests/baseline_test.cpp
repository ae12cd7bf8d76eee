#include <gtest/gtest.h>

#include <map>

#include "feas/baseline.hpp"
#include "feas/errors.hpp"
#include "oracle.hpp"

using namespace feas;

namespace {

// Feasibility by enumerating every vertex of the arrangement with Eigen.
bool vertex_enumeration(const EuclideanInstance& inst) {
    const std::size_t d = inst.d, n = inst.n();
    std::vector<std::size_t> pick(d);
    std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t from) {
        if (pos == d) {
            Eigen::MatrixXd a(d, d);
            Eigen::VectorXd b(d);
            for (std::size_t r = 0; r < d; ++r) {
                a.row(r) = oracle::to_eigen(inst.normals[pick[r]]).transpose();
                b(r) = inst.offsets[pick[r]];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (lu.rank() < static_cast<Eigen::Index>(d)) return false;
            const Eigen::VectorXd x = lu.solve(b);
            return inst.violation(Vector(x.data(), x.data() + d)) <= 1e-9;
        }
        for (std::size_t i = from; i < n; ++i) {
            pick[pos] = i;
            if (rec(pos + 1, i + 1)) return true;
        }
        return false;
    };
    return rec(0, 0);
}

} // namespace

TEST(Simplex, OriginFeasibleInstance) {
    auto inst = gen_ex1(2, 4, 1);
    Vector back = inst.provenance.translation;
    for (auto& x : back) x = -x;
    inst = translate(inst, back);
    for (double b : inst.offsets) ASSERT_LT(b, 0.0);
    const auto r = simplex_feasibility(inst);
    ASSERT_EQ(r.status, SimplexStatus::feasible);
    EXPECT_LE(inst.violation(r.point), 1e-9);
    EXPECT_EQ(r.init_pivots, 2u);
}

TEST(Simplex, TinyEx3IsInfeasible) {
    const auto inst = gen_ex3(2, 16, 4);
    EXPECT_FALSE(vertex_enumeration(inst));
    EXPECT_EQ(simplex_feasibility(inst).status, SimplexStatus::infeasible);
}

TEST(Simplex, SingleConstraint) {
    EuclideanInstance inst;
    inst.d = 1;
    inst.normals = {{1.0}};
    inst.offsets = {-1.0};
    const auto r = simplex_feasibility(inst);
    ASSERT_EQ(r.status, SimplexStatus::feasible);
    EXPECT_GE(r.point[0], -1.0 - 1e-12);
}

TEST(Simplex, NormalsMustSpan) {
    EuclideanInstance inst;
    inst.d = 2;
    inst.normals = {{1.0, 0.0}, {-1.0, 0.0}};
    inst.offsets = {-1.0, -1.0};
    EXPECT_THROW(simplex_feasibility(inst), DimensionTooSmall);
}

TEST(Simplex, FeasiblePointsSatisfyAllConstraints) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t d = 5 + seed % 20;
        const auto inst = gen_ex1(d, 8 * d, seed);
        const auto r = simplex_feasibility(inst);
        ASSERT_EQ(r.status, SimplexStatus::feasible);
        double bmax = 0;
        for (double b : inst.offsets) bmax = std::max(bmax, std::abs(b));
        // The d basic constraints hold with equality.
        std::size_t tight = 0;
        for (std::size_t i = 0; i < inst.n(); ++i) {
            const double s = dot(inst.normals[i], r.point) - inst.offsets[i];
            ASSERT_GE(s, -1e-9 * (1 + bmax));
            if (std::abs(s) <= 1e-8 * (1 + bmax)) ++tight;
        }
        EXPECT_GE(tight, d);
    }
}

TEST(BruteForce, Examples) {
    EXPECT_TRUE(brute_force_feasible(gen_ex1(3, 20, 4)));
    EXPECT_FALSE(brute_force_feasible(gen_ex3(3, 24, 4)));
    EXPECT_TRUE(brute_force_feasible(gen_ex2(2, 16, 4)));
    EXPECT_THROW(brute_force_feasible(gen_ex1(5, 20, 1)), TooLarge);
    EXPECT_THROW(brute_force_feasible(gen_ex1(3, 61, 1)), TooLarge);
}

TEST(BruteForce, AgreesWithSimplexAndVertexEnumeration) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto fam = static_cast<Family>(seed % 3);
        const std::size_t d = 1 + seed % 4;
        const auto inst = generate(fam, d, 4 + seed % 30, 300 + seed);
        const bool bf = brute_force_feasible(inst);
        EXPECT_EQ(bf, simplex_feasibility(inst).status == SimplexStatus::feasible) << seed;
        EXPECT_EQ(bf, vertex_enumeration(inst)) << seed;
    }
}

// Mean pivot counts against the published simplex column, factor 3.
class PublishedPivots : public ::testing::TestWithParam<Family> {};

TEST_P(PublishedPivots, MeanWithinFactorThree) {
    const std::map<std::pair<Family, std::size_t>, double> published{
        {{Family::ex1, 10}, 13.4}, {{Family::ex1, 20}, 31.2}, {{Family::ex1, 40}, 93.4},
        {{Family::ex2, 10}, 17.0}, {{Family::ex2, 20}, 42.6}, {{Family::ex2, 40}, 122.0},
        {{Family::ex3, 10}, 15.8}, {{Family::ex3, 20}, 41.0}, {{Family::ex3, 40}, 112.4}};
    const Family fam = GetParam();
    for (std::size_t d : {10u, 20u, 40u}) {
        const double want = published.at({fam, d});
        double sum = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
            sum += static_cast<double>(simplex_feasibility(generate(fam, d, 8 * d, seed)).steps);
        const double mean = sum / 5;
        EXPECT_LE(mean, 3 * want) << "d=" << d << " mean " << mean << " published " << want;
        EXPECT_GE(mean, want / 3) << "d=" << d << " mean " << mean << " published " << want;
    }
}

INSTANTIATE_TEST_SUITE_P(Families, PublishedPivots, ::testing::Values(Family::ex1, Family::ex2, Family::ex3),
                         [](const auto& info) { return to_string(info.param); });
