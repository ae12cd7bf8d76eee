#include "feas/solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "feas/errors.hpp"

namespace feas {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::combinatorial: return "combinatorial";
    case Variant::monotone: return "monotone";
    case Variant::polynomial: return "polynomial";
    case Variant::rescaled: return "rescaled";
    }
    return "combinatorial";
}

Variant parse_variant(const std::string& s) {
    if (s == "combinatorial") return Variant::combinatorial;
    if (s == "monotone") return Variant::monotone;
    if (s == "polynomial") return Variant::polynomial;
    if (s == "rescaled") return Variant::rescaled;
    throw ConfigError("unknown algorithm '" + s + "'");
}

std::string to_string(ConstraintRule r) {
    return r == ConstraintRule::most_violated ? "most_violated" : "first_violated";
}

ConstraintRule parse_rule(const std::string& s) {
    if (s == "most_violated" || s == "most") return ConstraintRule::most_violated;
    if (s == "first_violated" || s == "first") return ConstraintRule::first_violated;
    throw ConfigError("unknown constraint rule '" + s + "'");
}

std::string to_string(Status s) {
    switch (s) {
    case Status::feasible: return "feasible";
    case Status::infeasible: return "infeasible";
    case Status::degenerate: return "degenerate";
    case Status::budget_exhausted: return "budget_exhausted";
    }
    return "budget_exhausted";
}

void SolveConfig::validate() const {
    if (!(feas_tol > 0.0) || !std::isfinite(feas_tol)) throw ConfigError("feas_tol must be positive");
    if (rescale_trigger && !(*rescale_trigger > 0.0)) throw ConfigError("rescale trigger must be positive");
    if (poly_L && *poly_L == 0) throw ConfigError("poly_L must be positive");
}

// ---------------------------------------------------------------------------
// ActiveSet

ActiveSet::ActiveSet(const SphericalInstance& inst, std::size_t first) : fact_(inst.ambient_dim) {
    if (first >= inst.n()) throw IndexOutOfRange("initial constraint index out of range");
    indices_.push_back(first);
    fact_.append_column(inst.normals[first]);
    recompute_center();
}

ActiveSet::ActiveSet(std::vector<std::size_t> indices, OrthoFactorization f)
    : indices_(std::move(indices)), fact_(std::move(f)) {
    if (indices_.size() != fact_.size()) throw DimensionMismatch("active set: index count differs from columns");
    if (indices_.empty()) throw PreconditionViolated("active set must not be empty");
    recompute_center();
}

bool ActiveSet::contains(std::size_t idx) const {
    return std::find(indices_.begin(), indices_.end(), idx) != indices_.end();
}

std::vector<Vector> ActiveSet::points(const SphericalInstance& inst) const {
    std::vector<Vector> out;
    out.reserve(size());
    for (std::size_t i : indices_) out.push_back(inst.normals[i].vec());
    return out;
}

void ActiveSet::recompute_center() {
    // w = R^{-T} 1 gives a_i^T (Q w) = 1 for every column; scaling by 1/|w|^2
    // puts the point on the affine hull.
    const std::size_t k = size();
    const Vector ones(k, 1.0);
    const Vector w = fact_.solve_rt(ones);
    const double s = dot(w, w);
    center_.point = fact_.q().apply(w);
    scale(center_.point, 1.0 / s);
    center_.weights = fact_.solve_r(w);
    scale(center_.weights, 1.0 / s);
}

double ActiveSet::circumcenter_error() const {
    const Matrix& a = fact_.columns();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double p = dot(a.col(j), center_.point);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    return hi - lo;
}

void ActiveSet::rebuild(const SphericalInstance& inst) {
    std::vector<Vector> cols = points(inst);
    fact_ = OrthoFactorization::factorize(Matrix::from_columns(cols));
    recompute_center();
}

// ---------------------------------------------------------------------------
// Expansion and drop

namespace {

Vector combine(const SphericalInstance& inst, const std::vector<std::size_t>& idx, std::span<const double> w) {
    Vector p(inst.ambient_dim, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) axpy(w[i], inst.normals[idx[i]], p);
    return p;
}

bool all_nonnegative(std::span<const double> w, double tol) {
    return std::all_of(w.begin(), w.end(), [tol](double x) { return x >= -tol; });
}

} // namespace

Expansion step_expand(const SphericalInstance& inst, const ActiveSet& state, std::size_t m) {
    if (m >= inst.n()) throw IndexOutOfRange("step_expand: constraint index out of range");
    if (state.contains(m)) throw PreconditionViolated("step_expand: constraint already active");
    const auto& am = inst.normals[m];
    const OrthoFactorization& f = state.factorization();
    const std::size_t k = state.size();

    std::vector<std::size_t> idx = state.indices();
    idx.push_back(m);

    // a_m = a + sum lambda_i a_i with a orthogonal to the active normals.
    LeastSquares ls = f.least_squares(am);
    const Vector& lambda = ls.coefficients;
    const Vector& a = ls.residual;
    const double lambda_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    const double a2 = dot(a, a);

    Expansion out;
    if (std::sqrt(a2) <= f.rank_threshold()) {
        // Dependent: 0 = sum lambda_i a_i - a_m is an affine combination of the union.
        const double denom = lambda_sum - 1.0;
        if (std::abs(denom) < 1e-12) throw NumericalBreakdown(0, "violated constraint lies on the touching sphere");
        Vector nu(k + 1);
        for (std::size_t i = 0; i < k; ++i) nu[i] = lambda[i] / denom;
        nu[k] = -1.0 / denom;
        out.center = {Vector(inst.ambient_dim, 0.0), std::move(nu)};
        out.kind = all_nonnegative(out.center.weights, kBarycentricTol) ? ExpandKind::positively_spanning
                                                                         : ExpandKind::needs_drop;
        return out;
    }

    // Move from the current center P along a until a_m^T C' equals the common
    // inner product c, then rescale onto the affine hull.
    const Combination& p = state.center();
    double c = 0.0;
    for (std::size_t j = 0; j < k; ++j) c += dot(f.columns().col(j), p.point);
    c /= static_cast<double>(k);
    const double rho = (c - dot(am, p.point)) / a2;
    Vector w(k + 1);
    for (std::size_t i = 0; i < k; ++i) w[i] = p.weights[i] - rho * lambda[i];
    w[k] = rho;
    const double s = 1.0 - rho * lambda_sum + rho;
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalBreakdown(0, "touching-sphere center has no affine normalization");
    Vector pt(p.point);
    axpy(rho, a, pt);
    scale(pt, 1.0 / s);
    scale(w, 1.0 / s);
    out.center = {std::move(pt), std::move(w)};

    if (!all_nonnegative(out.center.weights, kBarycentricTol)) {
        out.kind = ExpandKind::needs_drop;
        return out;
    }
    OrthoFactorization g = f;
    try {
        g.append_column(am);
    } catch (const RankDeficient&) {
        throw NumericalBreakdown(0, "expanded active set lost rank");
    }
    out.kind = ExpandKind::accepted;
    out.next.emplace(std::move(idx), std::move(g));
    return out;
}

Drop step_drop(const SphericalInstance& inst, const ActiveSet& state, std::size_t m, const Combination& y,
               const Combination& center) {
    const std::size_t k = state.size();
    if (y.weights.size() != k + 1 || center.weights.size() != k + 1)
        throw DimensionMismatch("step_drop: weights must cover the active set and the new constraint");
    const auto& idx = state.indices();

    std::vector<std::pair<double, std::size_t>> ratios;
    for (std::size_t i = 0; i < k; ++i) {
        const double nu = center.weights[i];
        if (nu >= -kBarycentricTol) continue;
        const double yi = std::max(0.0, y.weights[i]);
        ratios.emplace_back(yi / (yi - nu), i);
    }
    if (ratios.empty()) throw DegenerateRatioTest("no active vertex has a negative coefficient");
    double t_min = std::numeric_limits<double>::infinity();
    for (const auto& r : ratios) t_min = std::min(t_min, r.first);
    std::optional<std::size_t> leave;
    for (const auto& [t, i] : ratios)
        if (t <= t_min + 1e-14 && (!leave || idx[i] < idx[*leave])) leave = i;

    Vector yw(k + 1);
    for (std::size_t i = 0; i <= k; ++i) yw[i] = (1.0 - t_min) * y.weights[i] + t_min * center.weights[i];
    yw.erase(yw.begin() + static_cast<std::ptrdiff_t>(*leave));
    for (auto& v : yw) v = std::max(0.0, v);
    const double sum = std::accumulate(yw.begin(), yw.end(), 0.0);
    if (sum > 0.0) scale(yw, 1.0 / sum);

    std::vector<std::size_t> rest = idx;
    const std::size_t left = rest[*leave];
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(*leave));
    OrthoFactorization f = state.factorization();
    f.remove_column(*leave);

    std::vector<std::size_t> with_m = rest;
    with_m.push_back(m);
    Combination ny{combine(inst, with_m, yw), std::move(yw)};
    if (rest.empty()) throw DegenerateRatioTest("drop emptied the active set");
    return Drop{ActiveSet(std::move(rest), std::move(f)), std::move(ny), left};
}

Vector monotone_y(std::span<const double> x_k, std::span<const double> a_m) {
    Vector dir(a_m.begin(), a_m.end());
    axpy(-1.0, x_k, dir);
    const double dd = dot(dir, dir);
    if (dd == 0.0) throw PreconditionViolated("monotone_y: x_k equals a_m");
    const double t = -dot(x_k, dir) / dd;
    Vector y(x_k.begin(), x_k.end());
    axpy(t, dir, y);
    return y;
}

double monotone_bound(double deficiency, double v) {
    const double num = std::max(0.0, 1.0 - v * v);
    return std::sqrt(num / (1.0 + deficiency * deficiency + 2.0 * deficiency * v)) * deficiency;
}

// ---------------------------------------------------------------------------
// Transforms

PolyTransform transform_polynomial(const SphericalInstance& inst, const ActiveSet& state) {
    const std::size_t d = inst.sphere_dim();
    if (state.size() < 2) throw PreconditionViolated("transform needs at least two active normals");
    const double def = state.deficiency();
    if (!(def < beta_d(d) / static_cast<double>(d + 1)))
        throw PreconditionViolated("deficiency is not below beta_d/(d+1)");
    const auto& w = state.center().weights;
    if (!all_nonnegative(w, kBarycentricTol)) throw PreconditionViolated("center is outside the active simplex");
    // Vertices with zero weight do not support the center; the face spanned by
    // the others has the same circumcenter.
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (w[i] > kZeroTol) pts.push_back(inst.normals[state.indices()[i]].vec());
    const VertexDiameter vd = vertex_diameter(pts);
    PolyTransform out;
    out.pole = pts[vd.witness];
    out.instance.ambient_dim = inst.ambient_dim;
    out.instance.origin_meta = inst.origin_meta;
    out.instance.normals.reserve(inst.n());
    for (const auto& a : inst.normals)
        out.instance.normals.push_back(UnitVector::from_unit(psi_alpha(a, 0.5, out.pole)));
    return out;
}

Rescale rescale_violation(const SphericalInstance& inst, const ActiveSet& state, std::span<const double> x_k,
                          std::size_t r, std::optional<double> trigger) {
    if (r >= inst.n()) throw IndexOutOfRange("rescale: constraint index out of range");
    if (x_k.size() != inst.ambient_dim) throw DimensionMismatch("rescale: iterate has wrong dimension");
    const std::size_t d = inst.sphere_dim();
    const double target = d == 0 ? std::numeric_limits<double>::infinity() : std::sqrt(2.0 / static_cast<double>(d));
    if (target >= 1.0) throw Unsolvable("sqrt(2/d) >= 1: rescaling needs d >= 3");
    const double xnorm = norm(x_k);
    const Vector u = normalized(x_k);
    const double c = dot(inst.normals[r], u);
    const double v = -c;
    if (!(v > 0.0)) throw TriggerNotMet("constraint is not violated at x_k");
    if (trigger && v > *trigger) throw TriggerNotMet("violation exceeds the rescaling trigger");
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    if (s < 1e-12) throw PreconditionViolated("violated normal is antipodal to x_k");

    // a' = a + kappa (a^T u) u, normalized; a'_r^T u = -target fixes kappa.
    const double g = target * s / (std::abs(c) * std::sqrt(1.0 - target * target));
    const double kappa = g - 1.0;

    SphericalInstance next;
    next.ambient_dim = inst.ambient_dim;
    next.origin_meta = inst.origin_meta;
    next.normals.reserve(inst.n());
    for (const auto& a : inst.normals) {
        Vector b(a.vec());
        axpy(kappa * dot(a, u), u, b);
        next.normals.push_back(UnitVector::normalize(b));
    }

    // All active normals share a_i^T u, so the update is rank one plus a
    // uniform scaling of the columns.
    const OrthoFactorization& f = state.factorization();
    const std::size_t k = state.size();
    double cq = 0.0;
    for (std::size_t j = 0; j < k; ++j) cq += dot(f.columns().col(j), u);
    cq /= static_cast<double>(k);
    Vector w(u);
    scale(w, kappa * cq);
    const double mu = 1.0 / std::sqrt(1.0 + (2.0 * kappa + kappa * kappa) * cq * cq);
    const Vector ones(k, 1.0);

    std::vector<std::size_t> idx = state.indices();
    std::optional<OrthoFactorization> g2;
    try {
        OrthoFactorization upd = f;
        upd.rank_one_update(w, ones, mu);
        Matrix expect(inst.ambient_dim, 0);
        for (std::size_t i : idx) expect.append_col(next.normals[i]);
        if (max_abs_diff(upd.columns(), expect) <= 1e-8 && upd.reconstruction_error() <= 1e-8 &&
            upd.orthogonality_error() <= 1e-8)
            g2 = std::move(upd);
    } catch (const RankDeficient&) {
    }
    const bool refactorized = !g2;
    if (!g2) {
        Matrix cols(inst.ambient_dim, 0);
        for (std::size_t i : idx) cols.append_col(next.normals[i]);
        g2 = OrthoFactorization::factorize(cols);
    }
    ActiveSet st(std::move(idx), std::move(*g2));
    return Rescale{std::move(next), std::move(st), kappa / (xnorm * xnorm), kappa, u, refactorized};
}

namespace {

// Orthonormal basis of span(cols) followed by a basis of its complement.
struct SplitBasis {
    OrthoFactorization span;       // independent subset of the columns
    std::vector<std::size_t> used; // positions of that subset
    Matrix complement;
};

SplitBasis split_basis(std::size_t dim, const std::vector<Vector>& cols) {
    SplitBasis sb{OrthoFactorization(dim), {}, Matrix(dim, 0)};
    for (std::size_t j = 0; j < cols.size(); ++j) {
        try {
            sb.span.append_column(cols[j]);
            sb.used.push_back(j);
        } catch (const RankDeficient&) {
        }
    }
    OrthoFactorization full = sb.span;
    for (std::size_t e = 0; e < dim && full.size() < dim; ++e) {
        Vector unit(dim, 0.0);
        unit[e] = 1.0;
        try {
            full.append_column(unit);
        } catch (const RankDeficient&) {
        }
    }
    for (std::size_t j = sb.span.size(); j < full.size(); ++j) sb.complement.append_col(full.q().col(j));
    return sb;
}

} // namespace

Reduction reduce_degenerate(const SphericalInstance& inst, const std::vector<std::size_t>& span_indices) {
    if (span_indices.empty()) throw PreconditionViolated("reduce_degenerate: empty spanning set");
    std::vector<Vector> cols;
    std::vector<bool> in_span(inst.n(), false);
    for (std::size_t i : span_indices) {
        if (i >= inst.n()) throw IndexOutOfRange("reduce_degenerate: index out of range");
        cols.push_back(inst.normals[i].vec());
        in_span[i] = true;
    }
    SplitBasis sb = split_basis(inst.ambient_dim, cols);
    if (sb.complement.cols() == 0) throw EmptyReduction("spanning set leaves no complement");

    Reduction out;
    out.basis = std::move(sb.complement);
    out.instance.ambient_dim = out.basis.cols();
    out.equalities = span_indices;
    for (std::size_t i = 0; i < inst.n(); ++i) {
        if (in_span[i]) continue;
        Vector c = out.basis.apply_transpose(inst.normals[i]);
        if (norm(c) <= OrthoFactorization::kRankFactor) {
            out.equalities.push_back(i);
            continue;
        }
        out.instance.normals.push_back(UnitVector::normalize(c));
        out.kept.push_back(i);
    }
    std::sort(out.equalities.begin(), out.equalities.end());
    return out;
}

double eq17_fixture(double epsilon, double delta) {
    return delta + epsilon * std::sqrt(1.0 + delta * delta) / std::sqrt(1.0 + epsilon * epsilon);
}

// ---------------------------------------------------------------------------
// Certificates

double PositiveSpanCertificate::residual(const SphericalInstance& inst) const {
    Vector s(inst.ambient_dim, 0.0);
    for (std::size_t i = 0; i < indices.size(); ++i) axpy(coefficients[i], inst.normals.at(indices[i]), s);
    return norm(s);
}

bool PositiveSpanCertificate::verify(const SphericalInstance& inst, double tol) const {
    if (indices.size() != coefficients.size() || indices.empty()) return false;
    if (!all_nonnegative(coefficients, 0.0)) return false;
    const double sum = std::accumulate(coefficients.begin(), coefficients.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12 * static_cast<double>(indices.size())) return false;
    for (std::size_t i : indices)
        if (i >= inst.n()) return false;
    return residual(inst) <= tol;
}

namespace {

std::optional<PositiveSpanCertificate> finalize_certificate(std::vector<std::size_t> idx, Vector mu,
                                                            const SphericalInstance& inst) {
    for (double m : mu)
        if (m < -1e-9 || !std::isfinite(m)) return std::nullopt;
    for (auto& m : mu) m = std::max(0.0, m);
    const double sum = std::accumulate(mu.begin(), mu.end(), 0.0);
    if (!(sum > 0.0)) return std::nullopt;
    scale(mu, 1.0 / sum);
    PositiveSpanCertificate cert{std::move(idx), std::move(mu)};
    if (!cert.verify(inst)) return std::nullopt;
    return cert;
}

// Null vector of the columns idx: the first column dependent on the ones
// before it is written as their combination.
std::optional<PositiveSpanCertificate> certify_direct(const SphericalInstance& inst,
                                                      const std::vector<std::size_t>& idx) {
    OrthoFactorization f(inst.ambient_dim);
    std::vector<std::size_t> pos;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& a = inst.normals[idx[j]];
        try {
            f.append_column(a);
            pos.push_back(j);
            continue;
        } catch (const RankDeficient&) {
        }
        LeastSquares ls = f.least_squares(a);
        const double denom = std::accumulate(ls.coefficients.begin(), ls.coefficients.end(), 0.0) - 1.0;
        if (std::abs(denom) < 1e-14) return std::nullopt;
        Vector mu(idx.size(), 0.0);
        for (std::size_t i = 0; i < pos.size(); ++i) mu[pos[i]] = ls.coefficients[i] / denom;
        mu[j] = -1.0 / denom;
        return finalize_certificate(idx, std::move(mu), inst);
    }
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------
// Instance size

std::uint64_t dyadic_bits(double x) {
    if (x == 0.0) return 0;
    if (!std::isfinite(x)) throw NonFinite("dyadic_bits: non-finite value");
    int e = 0;
    const double m = std::frexp(std::abs(x), &e);
    auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
    long exp2 = static_cast<long>(e) - 53;
    const int tz = std::countr_zero(mant);
    mant >>= tz;
    exp2 += tz;
    return static_cast<std::uint64_t>(std::bit_width(mant)) + static_cast<std::uint64_t>(std::labs(exp2));
}

namespace {

template <class F>
void for_each_entry(const EuclideanInstance& inst, F&& f) {
    for (std::size_t i = 0; i < inst.n(); ++i) {
        for (double a : inst.normals[i]) f(a);
        f(inst.offsets[i]);
    }
}

std::uint64_t capped_size(std::uint64_t bits) { return 1 + std::min<std::uint64_t>(64, bits); }

} // namespace

std::uint64_t estimate_instance_size(const EuclideanInstance& inst) {
    std::uint64_t total = 0;
    for_each_entry(inst, [&](double x) { total += capped_size(dyadic_bits(x)); });
    return total;
}

std::uint64_t estimate_instance_size(const SphericalInstance& inst) {
    std::uint64_t total = 0;
    for (const auto& a : inst.normals)
        for (double x : a.coords()) total += capped_size(dyadic_bits(x));
    return total;
}

std::optional<std::uint64_t> exact_instance_size(const EuclideanInstance& inst) {
    std::uint64_t total = 0;
    bool ok = true;
    for_each_entry(inst, [&](double x) {
        const std::uint64_t b = dyadic_bits(x);
        if (b > 64) ok = false;
        total += 1 + b;
    });
    if (!ok) return std::nullopt;
    return total;
}

std::size_t default_max_iters(Variant v, std::size_t d) {
    const std::size_t base = std::max<std::size_t>(100, 10 * d * d);
    if (v == Variant::polynomial) return std::max<std::size_t>(base, 1'000'000);
    return base;
}

// ---------------------------------------------------------------------------
// Outcome helpers

bool SolveOutcome::infeasible() const noexcept {
    if (status == Status::infeasible) return true;
    return status == Status::degenerate && reduced && reduced->infeasible();
}

std::size_t SolveOutcome::total_iterations() const noexcept {
    return trace.iterations + (reduced ? reduced->total_iterations() : 0);
}

std::size_t SolveOutcome::total_rescalings() const noexcept {
    return trace.rescalings + (reduced ? reduced->total_rescalings() : 0);
}

SphericalInstance with_side_condition(const SphericalInstance& inst) {
    if (!inst.origin_meta || !inst.origin_meta->side_condition) return inst;
    SphericalInstance out = inst;
    Vector e(inst.ambient_dim, 0.0);
    e.back() = 1.0;
    out.normals.push_back(UnitVector::from_unit(std::move(e)));
    return out;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

struct LinearMap {
    Vector direction;
    double kappa; // x -> x + kappa (direction^T x) direction
};

constexpr double kSupportTol = 1e-10;

class Runner {
public:
    Runner(const SphericalInstance& base, const SolveConfig& cfg, std::size_t start = 0)
        : base_(base), cfg_(cfg), work_(base), start_(start) {
        dim_ = base.ambient_dim;
        d_ = base.sphere_dim();
        rule_ = cfg.constraint_rule.value_or(cfg.variant == Variant::polynomial ? ConstraintRule::first_violated
                                                                                : ConstraintRule::most_violated);
        max_iters_ = cfg.max_iters ? cfg.max_iters : default_max_iters(cfg.variant, d_);
        trigger_ = cfg.rescale_trigger.value_or(d_ == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(d_)));
        rescale_on_ = cfg.variant == Variant::rescaled && d_ >= 3;
        if (cfg.variant == Variant::polynomial) {
            const std::uint64_t L = cfg.poly_L.value_or(estimate_instance_size(base));
            const double rounds = 6.0 * static_cast<double>(d_ + 2) * static_cast<double>(L);
            max_rounds_ = rounds > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(rounds);
            poly_threshold_ = beta_d(d_) / static_cast<double>(d_ + 1);
        }
        scale_.assign(base.n(), 1.0);
    }

    SolveOutcome run() {
        const auto t0 = std::chrono::steady_clock::now();
        SolveOutcome out = loop();
        out.trace = std::move(trace_);
        out.trace.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

private:
    SolveOutcome loop() {
        ActiveSet state(work_, start_);
        std::size_t round = 1;
        for (;;) {
            if (trace_.iterations >= max_iters_) return budget();
            const std::size_t iter = ++trace_.iterations;
            IterRecord rec;
            rec.iteration = iter;
            rec.round = round;
            rec.active = state.size();
            rec.deficiency = state.deficiency();

            if (rescale_on_) {
                const Vector u = normalized(state.center().point);
                const Violation vi = violation(work_, u);
                if (vi.value > cfg_.feas_tol && vi.value <= trigger_) {
                    Rescale rs = rescale_violation(work_, state, state.center().point, vi.index, trigger_);
                    record_map(rs.direction, rs.kappa);
                    work_ = std::move(rs.instance);
                    state = std::move(rs.state);
                    ++trace_.rescalings;
                    rec.event = EventKind::rescale;
                    rec.event_value = rs.lambda;
                }
            }

            const Vector u = normalized(state.center().point);
            std::optional<std::size_t> m;
            if (rule_ == ConstraintRule::most_violated) {
                const Violation vi = violation(work_, u);
                if (vi.value > cfg_.feas_tol) m = vi.index;
            } else {
                m = first_violated(work_, u, cfg_.feas_tol);
            }
            if (!m) {
                push(std::move(rec));
                return feasible(u, iter);
            }
            rec.constraint = *m;
            rec.violation = -dot(work_.normals[*m], u);

            Combination y = initial_y(state, *m);
            for (;;) {
                Expansion e = step_expand(work_, state, *m);
                if (e.kind == ExpandKind::accepted) {
                    state = std::move(*e.next);
                    rec.entered = true;
                    break;
                }
                if (e.kind == ExpandKind::positively_spanning) {
                    push(std::move(rec));
                    std::vector<std::size_t> s = state.indices();
                    s.push_back(*m);
                    return spanning(std::move(s), e.center.weights, iter);
                }
                if (state.size() == 1) {
                    // Two antipodal-free unit vectors always have their midpoint
                    // inside the hull; reaching here means rounding trouble.
                    throw NumericalBreakdown(iter, "drop requested from a single active normal");
                }
                Drop dr = step_drop(work_, state, *m, y, e.center);
                rec.left.push_back(dr.left);
                state = std::move(dr.state);
                y = std::move(dr.y);
            }

            if (state.circumcenter_error() > 1e-9) {
                state.rebuild(work_);
                if (state.circumcenter_error() > 1e-9)
                    throw NumericalBreakdown(iter, "active normals lost the equal-inner-product property");
            }

            if (cfg_.variant == Variant::polynomial && state.size() >= 2 && state.deficiency() < poly_threshold_) {
                std::optional<PolyTransform> pt;
                try {
                    pt = transform_polynomial(work_, state);
                } catch (const PreconditionViolated&) {
                } catch (const AffinelyDependent&) {
                }
                if (pt) {
                    rec.event = EventKind::transform;
                    rec.event_value = 2.0;
                    rec.pole = pt->pole;
                    record_map(pt->pole, -0.5);
                    work_ = std::move(pt->instance);
                    ++trace_.transforms;
                    ++round;
                    push(std::move(rec));
                    if (trace_.transforms > max_rounds_) return budget();
                    state = ActiveSet(work_, start_);
                    continue;
                }
            }
            push(std::move(rec));
        }
    }

    Combination initial_y(const ActiveSet& state, std::size_t m) const {
        const Combination& x = state.center();
        Vector w(x.weights);
        w.push_back(0.0);
        if (cfg_.variant == Variant::monotone || cfg_.variant == Variant::polynomial) {
            const auto& am = work_.normals[m];
            Vector dir(am.vec());
            axpy(-1.0, x.point, dir);
            const double t = std::clamp(-dot(x.point, dir) / dot(dir, dir), 0.0, 1.0);
            scale(w, 1.0 - t);
            w.back() = t;
            Vector p(x.point);
            axpy(t, dir, p);
            return {std::move(p), std::move(w)};
        }
        return {x.point, std::move(w)};
    }

    // x -> B x with B = I + kappa dd^T maps points of the new instance to the
    // old one; normals went the other way as normalize(B a).
    void record_map(const Vector& direction, double kappa) {
        for (std::size_t i = 0; i < work_.n(); ++i) {
            const double c = dot(work_.normals[i], direction);
            scale_[i] *= std::sqrt(std::max(0.0, 1.0 + (2.0 * kappa + kappa * kappa) * c * c));
        }
        maps_.push_back({direction, kappa});
    }

    Vector lift(Vector x) const {
        for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) axpy(it->kappa * dot(it->direction, x), it->direction, x);
        return normalized(x);
    }

    void push(IterRecord rec) {
        if (cfg_.record_trace) trace_.records.push_back(std::move(rec));
    }

    SolveOutcome budget() {
        SolveOutcome out;
        out.status = Status::budget_exhausted;
        return out;
    }

    SolveOutcome feasible(const Vector& u, std::size_t iter) {
        Vector x = lift(u);
        const double v = violation(base_, x).value;
        if (v > cfg_.feas_tol)
            throw NumericalBreakdown(iter, "point lifted through the transforms violates the input by " +
                                               std::to_string(v));
        SolveOutcome out;
        out.status = Status::feasible;
        out.point = std::move(x);
        return out;
    }

    SolveOutcome spanning(std::vector<std::size_t> s, const Vector& work_weights, std::size_t iter) {
        if (s.size() == dim_ + 1) {
            std::optional<PositiveSpanCertificate> cert = certify_direct(base_, s);
            if (!cert) {
                // Map the working-space combination back through the transforms.
                Vector mu(s.size());
                for (std::size_t i = 0; i < s.size(); ++i) mu[i] = work_weights[i] / scale_[s[i]];
                cert = finalize_certificate(s, std::move(mu), base_);
            }
            if (!cert) throw NumericalBreakdown(iter, "could not verify the positively spanning set");
            // A vanishing coefficient means a proper subset already spans
            // positively: the feasible set is confined to a subspace.
            std::vector<std::size_t> support;
            for (std::size_t i = 0; i < cert->indices.size(); ++i)
                if (cert->coefficients[i] > kSupportTol) support.push_back(cert->indices[i]);
            if (support.size() < s.size()) return degenerate(std::move(support), iter);
            SolveOutcome out;
            out.status = Status::infeasible;
            out.certificate = std::move(cert);
            return out;
        }
        return degenerate(std::move(s), iter);
    }

    SolveOutcome degenerate(std::vector<std::size_t> s, std::size_t iter) {
        Reduction red = reduce_degenerate(base_, s);
        SolveOutcome out;
        out.status = Status::degenerate;
        out.equality_indices = red.equalities;
        if (red.kept.empty()) {
            Vector x(red.basis.col(0).begin(), red.basis.col(0).end());
            if (violation(base_, x).value <= cfg_.feas_tol) out.point = std::move(x);
            return out;
        }
        auto sub = std::make_shared<SolveOutcome>(Runner(red.instance, cfg_).run());
        if (sub->point) {
            Vector x = normalized(red.basis.apply(*sub->point));
            const double v = violation(base_, x).value;
            if (v > cfg_.feas_tol)
                throw NumericalBreakdown(iter, "point lifted from the reduced instance violates the input by " +
                                                   std::to_string(v));
            out.point = std::move(x);
        } else if (sub->certificate) {
            out.certificate = lift_certificate(*sub->certificate, red, s);
        }
        out.reduced = std::move(sub);
        return out;
    }

    // A positive combination of reduced normals is, in the full space, a
    // vector of span(S); cancel it with the spanning set's own null vector.
    std::optional<PositiveSpanCertificate> lift_certificate(const PositiveSpanCertificate& rc, const Reduction& red,
                                                            const std::vector<std::size_t>& s) const {
        Vector v(dim_, 0.0);
        std::vector<std::size_t> idx;
        Vector mu;
        for (std::size_t j = 0; j < rc.indices.size(); ++j) {
            const std::size_t orig = red.kept[rc.indices[j]];
            const double len = norm(red.basis.apply_transpose(base_.normals[orig]));
            const double coef = rc.coefficients[j] / len;
            axpy(coef, base_.normals[orig], v);
            idx.push_back(orig);
            mu.push_back(coef);
        }
        auto pi = certify_direct(base_, s);
        if (!pi) return std::nullopt;
        std::vector<Vector> cols;
        for (std::size_t i : s) cols.push_back(base_.normals[i].vec());
        SplitBasis sb = split_basis(dim_, cols);
        scale(v, -1.0);
        LeastSquares ls = sb.span.least_squares(v);
        Vector nu(s.size(), 0.0);
        for (std::size_t i = 0; i < sb.used.size(); ++i) nu[sb.used[i]] = ls.coefficients[i];
        // nu + t pi >= 0 for the smallest admissible t.
        double t = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::size_t at = static_cast<std::size_t>(
                std::find(pi->indices.begin(), pi->indices.end(), s[i]) - pi->indices.begin());
            const double p = pi->coefficients[at];
            if (nu[i] < 0.0) {
                if (p <= 0.0) return std::nullopt;
                t = std::max(t, -nu[i] / p);
            }
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::size_t at = static_cast<std::size_t>(
                std::find(pi->indices.begin(), pi->indices.end(), s[i]) - pi->indices.begin());
            idx.push_back(s[i]);
            mu.push_back(nu[i] + t * pi->coefficients[at]);
        }
        return finalize_certificate(std::move(idx), std::move(mu), base_);
    }

    const SphericalInstance& base_;
    SolveConfig cfg_;
    SphericalInstance work_;
    std::size_t start_ = 0;
    std::size_t dim_ = 0;
    std::size_t d_ = 0;
    ConstraintRule rule_ = ConstraintRule::most_violated;
    std::size_t max_iters_ = 0;
    double trigger_ = 0.0;
    bool rescale_on_ = false;
    std::size_t max_rounds_ = 0;
    double poly_threshold_ = 0.0;
    std::vector<LinearMap> maps_;
    Vector scale_;
    IterTrace trace_;
};

} // namespace

SolveOutcome solve(const SphericalInstance& inst, const SolveConfig& cfg) {
    cfg.validate();
    inst.validate();
    const SphericalInstance base = with_side_condition(inst);
    // With the side condition present the run starts from its normal, the
    // image of the Euclidean origin.
    const std::size_t start = base.n() > inst.n() ? inst.n() : 0;
    SolveOutcome out = Runner(base, cfg, start).run();
    if (out.point && inst.origin_meta) {
        try {
            out.euclidean_point = dehomogenize(*out.point);
        } catch (const AtInfinity&) {
        }
    }
    return out;
}

SolveOutcome solve(const EuclideanInstance& inst, const SolveConfig& cfg) {
    SolveConfig c = cfg;
    if (c.variant == Variant::polynomial && !c.poly_L) c.poly_L = estimate_instance_size(inst);
    return solve(homogenize(inst), c);
}

void write_trace_csv(const IterTrace& trace, std::ostream& out) {
    out << "iter,round,active,deficiency,violation,constraint,entered,left,event,value\n";
    for (const auto& r : trace.records) {
        out << r.iteration << ',' << r.round << ',' << r.active << ',' << format_double(r.deficiency) << ','
            << format_double(r.violation) << ',';
        if (r.constraint) out << *r.constraint;
        out << ',' << (r.entered ? 1 : 0) << ',';
        for (std::size_t i = 0; i < r.left.size(); ++i) out << (i ? ";" : "") << r.left[i];
        out << ',';
        switch (r.event) {
        case EventKind::none: break;
        case EventKind::rescale: out << "rescale"; break;
        case EventKind::transform: out << "transform"; break;
        case EventKind::reduce: out << "reduce"; break;
        }
        out << ',';
        if (r.event != EventKind::none) out << format_double(r.event_value);
        out << '\n';
    }
}

} // namespace feas
