#pragma once

// Reference methods for linear feasibility: a dense phase-I simplex working on
// the dual of a standard-form problem, and an exhaustive vertex enumeration
// for tiny instances.

#include <cstddef>

#include "feas/numkit.hpp"
#include "feas/problems.hpp"

namespace feas {

struct SimplexConfig {
    /// Constraint j counts as satisfied when b_j - a_j^T x <= tol * (1 + |b|_inf).
    double tol = 1e-9;
    /// The basis inverse is recomputed from scratch this often.
    std::size_t refactor_interval = 50;
};

enum class SimplexStatus { feasible, infeasible };

struct SimplexResult {
    SimplexStatus status = SimplexStatus::infeasible;
    /// Point of the final basis (feasible outcomes only).
    Vector point;
    /// Pivots after the starting basis was built.
    std::size_t steps = 0;
    /// Pivots spent building the starting basis (always d).
    std::size_t init_pivots = 0;
    std::size_t degenerate_pivots = 0;
    double wall_ms = 0.0;
};

/// Solves max b^T y s.t. sum_i y_i a_i = c, y >= 0 where c = A_B^T 1 for the
/// starting basis B. An optimum yields a point satisfying all a_i^T x >= b_i;
/// an unbounded ray shows the inequalities are infeasible.
/// Throws DimensionTooSmall when the normals do not span R^d and Cycling when
/// 50 n consecutive degenerate pivots occur.
SimplexResult simplex_feasibility(const EuclideanInstance& inst, const SimplexConfig& cfg = {});

/// Enumerates the vertices of the arrangement (all rank-sized constraint
/// subsets) plus a random cloud and the construction's translation.
/// Throws TooLarge unless d <= 4 and n <= 60.
bool brute_force_feasible(const EuclideanInstance& inst);

} // namespace feas
