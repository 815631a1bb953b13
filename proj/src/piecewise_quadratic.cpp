#include "rowlegal/piecewise_quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rowlegal/errors.hpp"
#include "rowlegal/tolerances.hpp"

namespace rowlegal {

namespace {

bool coef_close(double u, double v) {
    return std::abs(u - v) <= kRelEps * std::max({1.0, std::abs(u), std::abs(v)});
}

bool quad_close(const Quadratic& p, const Quadratic& q) {
    return coef_close(p.a, q.a) && coef_close(p.b, q.b) && coef_close(p.c, q.c);
}

} // namespace

double PiecewiseQuadratic::coord_eps() const {
    return position_eps(std::max(std::abs(lo_), std::abs(hi_)));
}

void PiecewiseQuadratic::canonicalize() {
    const double eps = coord_eps();
    std::vector<double> bps;
    std::vector<Quadratic> segs;
    bps.reserve(breakpoints_.size());
    segs.reserve(segments_.size());
    segs.push_back(segments_.front());
    for (std::size_t q = 0; q < breakpoints_.size(); ++q) {
        const double b = breakpoints_[q];
        const Quadratic& right = segments_[q + 1];
        if (b <= lo_ + eps) {
            // Everything left of b lies outside the domain; the right segment wins.
            segs.back() = right;
            continue;
        }
        if (b >= hi_ - eps) break; // this and later kinks fall outside
        if (!bps.empty() && b <= bps.back() + eps) {
            // Degenerate sliver between coincident kinks: keep the newer right segment.
            segs.back() = right;
            continue;
        }
        if (quad_close(segs.back(), right)) continue; // not a real kink
        bps.push_back(b);
        segs.push_back(right);
    }
    breakpoints_ = std::move(bps);
    segments_ = std::move(segs);
}

PiecewiseQuadratic PiecewiseQuadratic::from_segments(double lo, double hi,
                                                     std::vector<double> breakpoints,
                                                     std::vector<Quadratic> segments) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw DomainError("piecewise quadratic domain [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] is invalid");
    if (segments.size() != breakpoints.size() + 1)
        throw ValidationError("piecewise quadratic needs exactly one more segment than breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
        throw ValidationError("piecewise quadratic breakpoints must be increasing");
    PiecewiseQuadratic f;
    f.lo_ = lo;
    f.hi_ = hi;
    f.breakpoints_ = std::move(breakpoints);
    f.segments_ = std::move(segments);
    f.canonicalize();
    return f;
}

PiecewiseQuadratic PiecewiseQuadratic::constant(double lo, double hi, double value) {
    return single(lo, hi, Quadratic{0.0, 0.0, value});
}

PiecewiseQuadratic PiecewiseQuadratic::single(double lo, double hi, Quadratic q) {
    return from_segments(lo, hi, {}, {q});
}

PiecewiseQuadratic PiecewiseQuadratic::square_displacement(double lo, double hi, double target,
                                                           double weight) {
    return single(lo, hi, Quadratic{weight, -2.0 * weight * target, weight * target * target});
}

PiecewiseQuadratic PiecewiseQuadratic::abs_displacement(double lo, double hi, double target,
                                                        double weight) {
    return from_segments(lo, hi, {target},
                         {Quadratic{0.0, -weight, weight * target},
                          Quadratic{0.0, weight, -weight * target}});
}

PiecewiseQuadratic PiecewiseQuadratic::huber_displacement(double lo, double hi, double target,
                                                          double radius, double weight) {
    const double r = radius;
    // weight * (x-t)^2 within |x-t| <= r, linear continuation of matching slope outside.
    Quadratic core{weight, -2.0 * weight * target, weight * target * target};
    double sl = 2.0 * weight * r; // |slope| at the junctions
    Quadratic left{0.0, -sl, core.value(target - r) - sl * (r - target)};
    Quadratic right{0.0, sl, core.value(target + r) - sl * (target + r)};
    return from_segments(lo, hi, {target - r, target + r}, {left, core, right});
}

std::size_t PiecewiseQuadratic::segment_index(double x) const {
    // Left-continuous: a position exactly on a kink belongs to the left segment.
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<std::size_t>(it - breakpoints_.begin());
}

double PiecewiseQuadratic::evaluate(double x) const {
    const double eps = coord_eps();
    if (x < lo_ - eps || x > hi_ + eps)
        throw DomainError("evaluate(" + std::to_string(x) + ") outside domain [" +
                          std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    return segments_[segment_index(std::clamp(x, lo_, hi_))].value(x);
}

PiecewiseQuadratic PiecewiseQuadratic::sum(const PiecewiseQuadratic& other) const {
    const double eps = std::max(coord_eps(), other.coord_eps());
    if (std::abs(lo_ - other.lo_) > eps || std::abs(hi_ - other.hi_) > eps)
        throw DomainError("sum requires identical domains");
    std::vector<double> bps;
    bps.reserve(breakpoints_.size() + other.breakpoints_.size());
    std::vector<Quadratic> segs;
    segs.reserve(breakpoints_.size() + other.breakpoints_.size() + 1);
    std::size_t i = 0, j = 0;
    segs.push_back(segments_[0] + other.segments_[0]);
    while (i < breakpoints_.size() || j < other.breakpoints_.size()) {
        double bi = i < breakpoints_.size() ? breakpoints_[i] : std::numeric_limits<double>::infinity();
        double bj = j < other.breakpoints_.size() ? other.breakpoints_[j]
                                                  : std::numeric_limits<double>::infinity();
        double b = std::min(bi, bj);
        if (bi <= b + eps) ++i;
        if (bj <= b + eps) ++j;
        bps.push_back(b);
        segs.push_back(segments_[i] + other.segments_[j]);
    }
    return from_segments(lo_, hi_, std::move(bps), std::move(segs));
}

PiecewiseQuadratic PiecewiseQuadratic::shift(double delta) const {
    PiecewiseQuadratic f;
    f.lo_ = lo_ - delta;
    f.hi_ = hi_ - delta;
    f.segments_.clear(); // drop the default-constructed sentinel segment
    f.breakpoints_.reserve(breakpoints_.size());
    for (double b : breakpoints_) f.breakpoints_.push_back(b - delta);
    f.segments_.reserve(segments_.size());
    for (const Quadratic& q : segments_) f.segments_.push_back(q.shifted(delta));
    f.canonicalize();
    return f;
}

PiecewiseQuadratic PiecewiseQuadratic::clamp_below(double x0) const {
    const double eps = coord_eps();
    if (x0 < lo_ - eps || x0 > hi_ + eps)
        throw DomainError("clamp_below point outside domain");
    if (x0 <= lo_ + eps) return *this;
    if (x0 >= hi_ - eps) return constant(lo_, hi_, evaluate(hi_));
    const double v0 = evaluate(x0);
    std::vector<double> bps{x0};
    std::vector<Quadratic> segs{Quadratic{0.0, 0.0, v0}};
    // Keep f to the right of x0. The segment containing x0 continues at x0 itself,
    // so use the right-continuous segment there.
    std::size_t idx = segment_index(x0);
    if (idx < breakpoints_.size() && std::abs(breakpoints_[idx] - x0) <= eps) ++idx;
    segs.push_back(segments_[idx]);
    for (std::size_t q = idx; q < breakpoints_.size(); ++q) {
        if (breakpoints_[q] <= x0 + eps) continue;
        bps.push_back(breakpoints_[q]);
        segs.push_back(segments_[q + 1]);
    }
    return from_segments(lo_, hi_, std::move(bps), std::move(segs));
}

PiecewiseQuadratic PiecewiseQuadratic::clamp_above(double x0) const {
    const double eps = coord_eps();
    if (x0 < lo_ - eps || x0 > hi_ + eps)
        throw DomainError("clamp_above point outside domain");
    if (x0 >= hi_ - eps) return *this;
    if (x0 <= lo_ + eps) return constant(lo_, hi_, evaluate(lo_));
    const double v0 = evaluate(x0);
    std::vector<double> bps;
    std::vector<Quadratic> segs;
    for (std::size_t q = 0; q <= breakpoints_.size(); ++q) {
        segs.push_back(segments_[q]);
        if (q < breakpoints_.size() && breakpoints_[q] < x0 - eps)
            bps.push_back(breakpoints_[q]);
        else
            break;
    }
    bps.push_back(x0);
    segs.push_back(Quadratic{0.0, 0.0, v0});
    return from_segments(lo_, hi_, std::move(bps), std::move(segs));
}

PiecewiseQuadratic PiecewiseQuadratic::restrict(double d_lo, double d_hi) const {
    const double eps = coord_eps();
    if (d_lo > d_hi) throw DomainError("restrict to empty interval");
    if (d_lo < lo_ - eps || d_hi > hi_ + eps)
        throw DomainError("restrict window is not a subset of the domain");
    return rewindow(std::max(d_lo, lo_), std::min(d_hi, hi_));
}

PiecewiseQuadratic PiecewiseQuadratic::rewindow(double new_lo, double new_hi) const {
    if (new_lo > new_hi) throw DomainError("rewindow to empty interval");
    PiecewiseQuadratic f;
    f.lo_ = new_lo;
    f.hi_ = new_hi;
    f.breakpoints_ = breakpoints_;
    f.segments_ = segments_;
    f.canonicalize(); // drops kinks outside (new_lo, new_hi); end segments extend
    return f;
}

PiecewiseQuadratic PiecewiseQuadratic::tangent_extended(double keep_lo, double keep_hi) const {
    const double eps = coord_eps();
    keep_lo = std::clamp(keep_lo, lo_, hi_);
    keep_hi = std::clamp(keep_hi, lo_, hi_);
    if (keep_lo > keep_hi) throw DomainError("tangent_extended keep range is empty");
    bool need_left = false, need_right = false;
    for (double b : breakpoints_) {
        if (b <= keep_lo + eps) need_left = true;
        if (b >= keep_hi - eps) need_right = true;
    }
    if (!need_left && !need_right) return *this;

    // Core slice [qlo, qhi]: the segments covering [keep_lo, keep_hi].
    std::size_t qlo = 0, qhi = breakpoints_.size();
    if (need_left) {
        qlo = segment_index(keep_lo);
        if (qlo < breakpoints_.size() && std::abs(breakpoints_[qlo] - keep_lo) <= eps)
            ++qlo; // boundary sits on a kink: continue with the right-hand segment
    }
    if (need_right) {
        qhi = segment_index(keep_hi);
        if (qhi > 0 && breakpoints_[qhi - 1] >= keep_hi - eps)
            --qhi; // boundary sits on a kink: tangent off the left-hand segment
    }
    if (qhi < qlo) qhi = qlo;

    std::vector<double> bps;
    std::vector<Quadratic> segs;
    auto is_curved = [](const Quadratic& s) { return s.a > kRelEps * std::max(1.0, s.a); };
    if (need_left && is_curved(segments_[qlo])) {
        const Quadratic& s = segments_[qlo];
        const double m = s.slope(keep_lo);
        segs.push_back(Quadratic{0.0, m, s.value(keep_lo) - m * keep_lo});
        bps.push_back(keep_lo);
    }
    segs.push_back(segments_[qlo]);
    for (std::size_t q = qlo; q < qhi; ++q) {
        bps.push_back(breakpoints_[q]);
        segs.push_back(segments_[q + 1]);
    }
    if (need_right && is_curved(segments_[qhi])) {
        const Quadratic& s = segments_[qhi];
        const double m = s.slope(keep_hi);
        bps.push_back(keep_hi);
        segs.push_back(Quadratic{0.0, m, s.value(keep_hi) - m * keep_hi});
    }
    return from_segments(lo_, hi_, std::move(bps), std::move(segs));
}

std::pair<double, double> PiecewiseQuadratic::argmin_interval(double d_lo, double d_hi) const {
    const double eps = coord_eps();
    if (d_lo > d_hi) throw DomainError("argmin_interval on empty interval");
    if (d_lo < lo_ - eps || d_hi > hi_ + eps)
        throw DomainError("argmin_interval window outside domain");
    d_lo = std::clamp(d_lo, lo_, hi_);
    d_hi = std::clamp(d_hi, lo_, hi_);

    const std::size_t first = segment_index(d_lo);
    const std::size_t last = segment_index(d_hi);

    auto piece = [&](std::size_t q) -> std::pair<double, double> {
        double u = q == 0 ? lo_ : breakpoints_[q - 1];
        double v = q == breakpoints_.size() ? hi_ : breakpoints_[q];
        return {std::max(u, d_lo), std::min(v, d_hi)};
    };
    auto seps = [&](const Quadratic& s, double u, double v) {
        return slope_eps(std::max(std::abs(2.0 * s.a * u), std::max(std::abs(2.0 * s.a * v), std::abs(s.b))));
    };

    double f_minus = d_hi;
    for (std::size_t q = first; q <= last; ++q) {
        auto [u, v] = piece(q);
        if (v < u) continue;
        const Quadratic& s = segments_[q];
        const double es = seps(s, u, v);
        if (s.slope(u) >= -es) {
            f_minus = u;
            break;
        }
        if (s.slope(v) >= -es) { // sign change inside: take the exact vertex
            f_minus = std::clamp(-s.b / (2.0 * s.a), u, v);
            break;
        }
    }
    double f_plus = d_lo;
    for (std::size_t q = last + 1; q-- > first;) {
        auto [u, v] = piece(q);
        if (v < u) continue;
        const Quadratic& s = segments_[q];
        const double es = seps(s, u, v);
        if (s.slope(v) <= es) {
            f_plus = v;
            break;
        }
        if (s.slope(u) <= es) {
            f_plus = std::clamp(-s.b / (2.0 * s.a), u, v);
            break;
        }
    }
    if (f_minus > f_plus) f_minus = f_plus = 0.5 * (f_minus + f_plus);
    return {f_minus, f_plus};
}

double PiecewiseQuadratic::value_scale_at(double x) const {
    const Quadratic& s = segments_[segment_index(std::clamp(x, lo_, hi_))];
    return std::max({1.0, std::abs(s.a * x * x), std::abs(s.b * x), std::abs(s.c)});
}

double PiecewiseQuadratic::max_abs_slope() const {
    double m = 0.0;
    for (std::size_t q = 0; q < segments_.size(); ++q) {
        double u = q == 0 ? lo_ : breakpoints_[q - 1];
        double v = q == breakpoints_.size() ? hi_ : breakpoints_[q];
        m = std::max({m, std::abs(segments_[q].slope(u)), std::abs(segments_[q].slope(v))});
    }
    return m;
}

bool PiecewiseQuadratic::is_convex(double* worst_violation) const {
    double worst = 0.0; // positive = violation magnitude
    bool ok = true;
    for (const Quadratic& s : segments_) {
        const double curv_eps = kRelEps * std::max(1.0, std::abs(s.a));
        worst = std::max(worst, -s.a);
        if (s.a < -curv_eps) ok = false;
    }
    const double ceps = coord_eps();
    for (std::size_t q = 0; q < breakpoints_.size(); ++q) {
        const double b = breakpoints_[q];
        const Quadratic& sl = segments_[q];
        const Quadratic& sr = segments_[q + 1];
        const double left = sl.slope(b);
        const double right = sr.slope(b);
        // Tolerance follows the terms entering the slopes plus the slope drift
        // a kink can pick up when canonicalization merges breakpoints that
        // coincide up to the coordinate tolerance.
        const double es = slope_eps(std::max({std::abs(2.0 * sl.a * b), std::abs(sl.b),
                                              std::abs(2.0 * sr.a * b), std::abs(sr.b)})) +
                          2.0 * ceps * (std::abs(sl.a) + std::abs(sr.a));
        worst = std::max(worst, left - right);
        if (right < left - es) ok = false;
    }
    if (worst_violation) *worst_violation = worst;
    return ok;
}

void PiecewiseQuadratic::require_convex(const std::string& what) const {
    const double ceps = coord_eps();
    for (std::size_t q = 0; q < breakpoints_.size(); ++q) {
        const double b = breakpoints_[q];
        const Quadratic& sl = segments_[q];
        const Quadratic& sr = segments_[q + 1];
        const double vl = sl.value(b);
        const double vr = sr.value(b);
        // Evaluation roundoff scales with the term magnitudes (a*b^2 etc.), and
        // merging kinks that coincide up to the coordinate tolerance perturbs
        // values by slope * coord_eps on top of that.
        const double terms =
            std::max({1.0, std::abs(vl), std::abs(vr), std::abs(sl.a * b * b),
                      std::abs(sl.b * b), std::abs(sl.c), std::abs(sr.a * b * b),
                      std::abs(sr.b * b), std::abs(sr.c)});
        const double tol =
            value_eps(terms) + ceps * std::max(std::abs(sl.slope(b)), std::abs(sr.slope(b)));
        if (std::abs(vl - vr) > tol)
            throw ValidationError(what + " is discontinuous at breakpoint " + std::to_string(b) +
                                  " (" + std::to_string(vl) + " vs " + std::to_string(vr) + ")");
    }
    if (!is_convex())
        throw ValidationError(what + " is not convex");
}

nlohmann::json PiecewiseQuadratic::to_json() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const Quadratic& s : segments_) segs.push_back({s.a, s.b, s.c});
    return {{"lo", lo_}, {"hi", hi_}, {"breakpoints", breakpoints_}, {"segments", segs}};
}

PiecewiseQuadratic PiecewiseQuadratic::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("lo") || !j.contains("hi") || !j.contains("breakpoints") ||
        !j.contains("segments"))
        throw ValidationError("cost must be an object with lo, hi, breakpoints, segments");
    double lo = j.at("lo").get<double>();
    double hi = j.at("hi").get<double>();
    std::vector<double> bps = j.at("breakpoints").get<std::vector<double>>();
    std::vector<Quadratic> segs;
    for (const auto& t : j.at("segments")) {
        if (!t.is_array() || t.size() != 3)
            throw ValidationError("each segment must be a coefficient triple [a, b, c]");
        segs.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
    if (segs.size() != bps.size() + 1)
        throw ValidationError("segments count must be breakpoints count + 1");
    const double eps = position_eps(std::max(std::abs(lo), std::abs(hi)));
    for (std::size_t q = 0; q < bps.size(); ++q) {
        if (bps[q] <= lo + eps || bps[q] >= hi - eps)
            throw ValidationError("breakpoint " + std::to_string(bps[q]) +
                                  " must lie strictly inside (lo, hi)");
        if (q > 0 && bps[q] <= bps[q - 1] + eps)
            throw ValidationError("breakpoints must be strictly increasing");
        const double b = bps[q];
        const double vl = segs[q].value(b);
        const double vr = segs[q + 1].value(b);
        const double terms =
            std::max({1.0, std::abs(vl), std::abs(vr), std::abs(segs[q].a * b * b),
                      std::abs(segs[q].b * b), std::abs(segs[q + 1].a * b * b),
                      std::abs(segs[q + 1].b * b)});
        if (std::abs(vl - vr) > value_eps(terms))
            throw ValidationError("segments disagree at breakpoint " + std::to_string(b) + ": " +
                                  std::to_string(vl) + " vs " + std::to_string(vr));
    }
    PiecewiseQuadratic f = from_segments(lo, hi, std::move(bps), std::move(segs));
    f.require_convex("cost");
    return f;
}

} // namespace rowlegal
