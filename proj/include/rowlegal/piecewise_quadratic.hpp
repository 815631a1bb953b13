#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rowlegal/quadratic.hpp"

namespace rowlegal {

/**
 * A continuous piecewise-quadratic function on a closed interval [lo, hi],
 * stored as strictly increasing interior breakpoints and one quadratic per
 * breakpoint-delimited segment. Construction canonicalizes the representation
 * (adjacent segments with equal coefficient triples are merged), so the stored
 * breakpoints are exactly the function's kinks.
 *
 * Values are immutable after construction; all operations return new values.
 * Convexity is an invariant of cost functions but not of every intermediate
 * value: clamp_below/clamp_above produce non-convex results when the clamp
 * point is not a minimizer (the caller owns that obligation), so it is checked
 * by is_convex()/require_convex() at the boundaries where it matters, not in
 * the constructor.
 */
class PiecewiseQuadratic {
public:
    PiecewiseQuadratic() : lo_(0.0), hi_(0.0), segments_{Quadratic{}} {}

    /** Canonicalizing builder; `segments.size()` must equal `breakpoints.size() + 1`. */
    static PiecewiseQuadratic from_segments(double lo, double hi, std::vector<double> breakpoints,
                                            std::vector<Quadratic> segments);
    static PiecewiseQuadratic constant(double lo, double hi, double value);
    static PiecewiseQuadratic single(double lo, double hi, Quadratic q);
    /** weight * (x - target)^2 on [lo, hi]. */
    static PiecewiseQuadratic square_displacement(double lo, double hi, double target,
                                                  double weight = 1.0);
    /** weight * |x - target| on [lo, hi]; one kink when target is interior. */
    static PiecewiseQuadratic abs_displacement(double lo, double hi, double target,
                                               double weight = 1.0);
    /** Huber-style displacement: quadratic within `radius` of target, linear outside. */
    static PiecewiseQuadratic huber_displacement(double lo, double hi, double target,
                                                 double radius = 1.0, double weight = 1.0);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Quadratic>& segments() const { return segments_; }
    std::size_t kink_count() const { return breakpoints_.size(); }

    /** Value at x; throws DomainError outside [lo, hi] (up to tolerance). */
    double evaluate(double x) const;

    /** Index of the segment owning x, left-continuous at breakpoints. */
    std::size_t segment_index(double x) const;

    /** Pointwise sum; domains must coincide. Kinks of the result are a subset of the union. */
    PiecewiseQuadratic sum(const PiecewiseQuadratic& other) const;

    /** x -> f(x + delta); domain moves to [lo - delta, hi - delta]. */
    PiecewiseQuadratic shift(double delta) const;

    /** x -> f(max(x, x0)): constant left of x0. Convex iff f is non-decreasing right of x0. */
    PiecewiseQuadratic clamp_below(double x0) const;

    /** x -> f(min(x, x0)): constant right of x0. Convex iff f is non-increasing left of x0. */
    PiecewiseQuadratic clamp_above(double x0) const;

    /** Same function on [d_lo, d_hi] ⊆ [lo, hi]. */
    PiecewiseQuadratic restrict(double d_lo, double d_hi) const;

    /**
     * Same function on an arbitrary window [new_lo, new_hi]: inside the old
     * domain this is restrict; beyond it the boundary segments extend with
     * their own formulas. Used by the reduction where summands are never
     * evaluated outside their natural range but must share one domain.
     */
    PiecewiseQuadratic rewindow(double new_lo, double new_hi) const;

    /**
     * Keeps the function on [keep_lo, keep_hi] and replaces everything outside
     * by the tangent-line continuations at those boundaries. Leaves the domain
     * unchanged; a no-op on sides without kinks outside the kept range. For a
     * function convex on [keep_lo, keep_hi] the result is convex everywhere.
     */
    PiecewiseQuadratic tangent_extended(double keep_lo, double keep_hi) const;

    /**
     * Closed interval [f-, f+] of minimizers of f restricted to [d_lo, d_hi],
     * for convex f. Flat stretches widen the interval; slopes within tolerance
     * of zero count as flat.
     */
    std::pair<double, double> argmin_interval(double d_lo, double d_hi) const;

    /** Largest one-sided |f'| over the domain. */
    double max_abs_slope() const;

    /** Magnitude of the terms entering evaluate(x): the roundoff scale of the result. */
    double value_scale_at(double x) const;

    bool is_convex(double* worst_violation = nullptr) const;
    /** Throws ValidationError naming `what` if not convex or not continuous. */
    void require_convex(const std::string& what) const;

    nlohmann::json to_json() const;
    /** Strict loader: enforces ordering, continuity and convexity. */
    static PiecewiseQuadratic from_json(const nlohmann::json& j);

    /** Exact representational equality (domain, kinks and coefficients). */
    bool operator==(const PiecewiseQuadratic&) const = default;

private:
    double lo_, hi_;
    std::vector<double> breakpoints_;
    std::vector<Quadratic> segments_;

    double coord_eps() const;
    void canonicalize();

    friend class PwqBuilder;
};

} // namespace rowlegal
