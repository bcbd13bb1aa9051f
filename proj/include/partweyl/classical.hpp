#ifndef PARTWEYL_CLASSICAL_HPP
#define PARTWEYL_CLASSICAL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "partweyl/geometry.hpp"
#include "partweyl/rng.hpp"

// Classical billiard flow, invariant-region classification and the two
// coefficients of the partial level-count asymptotics: the phase-space
// area-like coefficient A_Gamma and the boundary coefficient L_Gamma,
// the latter determined by boundary points whose parallel trajectories
// belong to the region.

namespace partweyl {

/// Boundary section coordinates: arc length s and tangential momentum
/// component p = cos(angle between the outgoing velocity and the tangent).
struct BirkhoffCoord {
    double s = 0.0;
    double p = 0.0;
};

enum class RegionKind {
    mushroom_regular,
    mushroom_chaotic,
    ellipse_rotating,
    ellipse_oscillating,
    mask,
    full
};

inline const char* to_string(RegionKind k) {
    switch (k) {
        case RegionKind::mushroom_regular: return "mushroom_regular";
        case RegionKind::mushroom_chaotic: return "mushroom_chaotic";
        case RegionKind::ellipse_rotating: return "ellipse_rotating";
        case RegionKind::ellipse_oscillating: return "ellipse_oscillating";
        case RegionKind::mask: return "mask";
        case RegionKind::full: return "full";
    }
    return "?";
}

/// Binary grid over a window of the boundary section.  Cell values are
/// weights in {0, 1/2, 1}, stored as 0/1/2.
struct SectionMask {
    int ns = 0, np = 0;
    double s_lo = 0.0, s_hi = 0.0;
    double p_lo = -1.0, p_hi = 1.0;
    std::vector<std::uint8_t> cells; // row-major: index = ip * ns + is

    bool in_window(double s) const { return s >= s_lo && s < s_hi; }

    int cell_index(double s, double p) const {
        int is = static_cast<int>((s - s_lo) / (s_hi - s_lo) * ns);
        int ip = static_cast<int>((p - p_lo) / (p_hi - p_lo) * np);
        is = std::clamp(is, 0, ns - 1);
        ip = std::clamp(ip, 0, np - 1);
        return ip * ns + is;
    }
    double weight_at(double s, double p) const {
        return 0.5 * cells[cell_index(s, p)];
    }
    double cell_area() const {
        return (s_hi - s_lo) / ns * (p_hi - p_lo) / np;
    }
};

struct RegionSpec {
    RegionKind kind = RegionKind::full;
    std::shared_ptr<const SectionMask> mask;
    bool complemented = false;
    std::string name = "full";

    static RegionSpec full() { return {}; }
    static RegionSpec analytic(RegionKind k, std::string nm = {}) {
        RegionSpec r;
        r.kind = k;
        r.name = nm.empty() ? to_string(k) : std::move(nm);
        return r;
    }
    static RegionSpec from_mask(std::shared_ptr<const SectionMask> m, std::string nm = "mask") {
        RegionSpec r;
        r.kind = RegionKind::mask;
        r.mask = std::move(m);
        r.name = std::move(nm);
        return r;
    }

    RegionSpec complement(std::string nm = {}) const {
        RegionSpec r = *this;
        switch (kind) {
            case RegionKind::mushroom_regular: r.kind = RegionKind::mushroom_chaotic; break;
            case RegionKind::mushroom_chaotic: r.kind = RegionKind::mushroom_regular; break;
            case RegionKind::ellipse_rotating: r.kind = RegionKind::ellipse_oscillating; break;
            case RegionKind::ellipse_oscillating: r.kind = RegionKind::ellipse_rotating; break;
            case RegionKind::mask: r.complemented = !complemented; break;
            case RegionKind::full:
                throw invalid_parameter("complement of the full region is empty");
        }
        r.name = nm.empty() ? (name + "_complement") : std::move(nm);
        return r;
    }
};

/// Coefficients of the partial mean level count
/// N(E) = A_Gamma E/(4 pi) + bc_sign L_Gamma sqrt(E)/(4 pi).
struct WeylCoefficients {
    double A_gamma = 0.0;
    double A_stderr = 0.0;
    double L_gamma = 0.0;
    int bc_sign = -1; // -1 Dirichlet, +1 Neumann
};

// ---------------------------------------------------------------------------
// flow

struct Collision {
    BirkhoffCoord x;  // outgoing section coordinates
    Vec2 q;           // collision point
    Vec2 v_out;       // reflected direction (unit)
    int segment = -1;
};

namespace flow_detail {
inline constexpr double kCornerTol = 1e-10;
}

/// First boundary collision of the ray from q along v; the returned section
/// coordinates describe the outgoing (specularly reflected) ray.
inline Collision next_collision_dir(const Domain& dom, Vec2 q, Vec2 v, double tmin_scale = 1e-9) {
    const auto hit = dom.first_hit(q, v, tmin_scale * dom.diameter());
    if (!hit) throw numerical_failure("ray escaped the domain (no boundary hit)");
    for (const auto& c : dom.corners())
        if ((dom.at(hit->s).q - c.q).norm() < flow_detail::kCornerTol) throw corner_collision();
    const auto bp = dom.at(hit->s);
    const Vec2 v_out = v - 2.0 * v.dot(bp.normal) * bp.normal;
    Collision col;
    col.x = {hit->s, v_out.dot(bp.tangent)};
    col.q = bp.q;
    col.v_out = v_out;
    col.segment = hit->segment;
    return col;
}

/// Spec operation: first collision from an interior point at direction beta.
inline BirkhoffCoord next_collision(const Domain& dom, Vec2 q, double beta) {
    return next_collision_dir(dom, q, unit_vector(beta)).x;
}

/// One application of the boundary map in Birkhoff coordinates.
inline BirkhoffCoord billiard_map(const Domain& dom, BirkhoffCoord x) {
    if (std::abs(x.p) >= 1.0 - 1e-12) throw grazing_tangency();
    const auto bp = dom.at(x.s);
    const Vec2 v = x.p * bp.tangent + std::sqrt(1.0 - x.p * x.p) * bp.normal;
    return next_collision_dir(dom, bp.q, v).x;
}

// ---------------------------------------------------------------------------
// classification

struct ClassifyResult {
    double weight = 0.0;
    /// Signed decision residual: positive inside the region, negative outside,
    /// zero on its boundary.  Magnitude is meaningful only for limit tests.
    double margin = 0.0;
};

namespace classify_detail {

inline ClassifyResult from_margin(double m) {
    if (m > 0.0) return {1.0, m};
    if (m < 0.0) return {0.0, m};
    return {0.5, 0.0};
}

inline double mushroom_regular_margin(const Domain& dom, Vec2 q, Vec2 v) {
    const double a = dom.spec().param("a");
    if (q.y < 0.0) return q.y; // stem points are chaotic
    const double d = std::abs(q.cross(v)); // chord distance from the cap center
    return d - a;
}

inline double ellipse_rotating_margin(const Domain& dom, Vec2 q, Vec2 v) {
    const double ra = dom.spec().param("r_a"), rb = dom.spec().param("r_b");
    const double f = std::sqrt(ra * ra - rb * rb);
    const double l1 = (q.x - f) * v.y - q.y * v.x;
    const double l2 = (q.x + f) * v.y - q.y * v.x;
    return l1 * l2; // the second invariant; > 0 rotating, < 0 oscillating
}

} // namespace classify_detail

inline ClassifyResult classify_dir(const Domain& dom, const RegionSpec& region, Vec2 q, Vec2 v,
                                   int max_hops = 3000);

/// Classify a boundary-section point (s, p): the outgoing ray at q(s).
inline ClassifyResult classify_section(const Domain& dom, const RegionSpec& region, double s,
                                       double p, int max_hops = 3000) {
    if (region.kind == RegionKind::mask && region.mask->in_window(s)) {
        const double w0 = region.mask->weight_at(s, p);
        const double w = region.complemented ? 1.0 - w0 : w0;
        return {w, w == 0.5 ? 0.0 : (w > 0.5 ? 1.0 : -1.0)};
    }
    const auto bp = dom.at(s);
    const double pc = std::clamp(p, -1.0, 1.0);
    const Vec2 v = pc * bp.tangent + std::sqrt(std::max(0.0, 1.0 - pc * pc)) * bp.normal;
    return classify_dir(dom, region, bp.q, v, max_hops);
}

/// Characteristic-function evaluation for a phase-space point.
inline ClassifyResult classify_dir(const Domain& dom, const RegionSpec& region, Vec2 q, Vec2 v,
                                   int max_hops) {
    using namespace classify_detail;
    switch (region.kind) {
        case RegionKind::full: return {1.0, 1.0};
        case RegionKind::mushroom_regular:
            if (dom.spec().kind != DomainKind::mushroom)
                throw invalid_parameter("mushroom region on non-mushroom domain");
            return from_margin(mushroom_regular_margin(dom, q, v));
        case RegionKind::mushroom_chaotic: {
            if (dom.spec().kind != DomainKind::mushroom)
                throw invalid_parameter("mushroom region on non-mushroom domain");
            auto r = from_margin(mushroom_regular_margin(dom, q, v));
            return {1.0 - r.weight, -r.margin};
        }
        case RegionKind::ellipse_rotating:
            if (dom.spec().kind != DomainKind::quarter_ellipse)
                throw invalid_parameter("ellipse region on non-ellipse domain");
            return from_margin(ellipse_rotating_margin(dom, q, v));
        case RegionKind::ellipse_oscillating: {
            if (dom.spec().kind != DomainKind::quarter_ellipse)
                throw invalid_parameter("ellipse region on non-ellipse domain");
            auto r = from_margin(ellipse_rotating_margin(dom, q, v));
            return {1.0 - r.weight, -r.margin};
        }
        case RegionKind::mask: break;
    }
    // Mask region: follow the trajectory to the section window and look the
    // cell up there.  Orbits that never reach the window carry weight 0.
    const auto& mask = *region.mask;
    Vec2 cq = q;
    Vec2 cv = v;
    for (int hop = 0; hop < max_hops; ++hop) {
        Collision col;
        bool ok = false;
        for (int attempt = 0; attempt < 6 && !ok; ++attempt) {
            try {
                col = next_collision_dir(dom, cq, cv);
                ok = true;
            } catch (const corner_collision&) {
                const double ang = 1e-9 * (attempt + 1) * ((attempt % 2) ? -1.0 : 1.0);
                const double ca = std::cos(ang), sa = std::sin(ang);
                cv = {cv.x * ca - cv.y * sa, cv.x * sa + cv.y * ca};
            }
        }
        if (!ok) return {0.0, -1.0};
        if (mask.in_window(col.x.s)) {
            const double w0 = mask.weight_at(col.x.s, col.x.p);
            const double w = region.complemented ? 1.0 - w0 : w0;
            return {w, w == 0.5 ? 0.0 : (w > 0.5 ? 1.0 : -1.0)};
        }
        cq = col.q;
        cv = col.v_out;
    }
    return {region.complemented ? 1.0 : 0.0, region.complemented ? 1.0 : -1.0};
}

/// chi_Gamma(q, beta) in {0, 1/2, 1}.
inline double classify_point(const Domain& dom, const RegionSpec& region, Vec2 q, double beta) {
    return classify_dir(dom, region, q, unit_vector(beta)).weight;
}

// ---------------------------------------------------------------------------
// A_Gamma by Monte Carlo

struct AreaEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Monte Carlo estimate of the phase-space area coefficient:
/// integral over the domain of the direction-averaged characteristic function.
inline AreaEstimate area_gamma(const Domain& dom, const RegionSpec& region,
                               std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw invalid_parameter("area_gamma requires n_samples >= 1000");
    const auto box = dom.bounding_box();
    const double box_area = (box.hi.x - box.lo.x) * (box.hi.y - box.lo.y);
    const int n_streams = 64;
    double sum = 0.0, sum_sq = 0.0;
    CounterRng master(seed);
    for (int st = 0; st < n_streams; ++st) {
        CounterRng rng = master.split(st);
        const std::int64_t lo = n_samples * st / n_streams;
        const std::int64_t hi = n_samples * (st + 1) / n_streams;
        double local = 0.0, local_sq = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const Vec2 q{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
            const double beta = rng.uniform(0.0, two_pi);
            if (dom.locate(q) != Location::inside) continue;
            double w;
            try {
                w = classify_point(dom, region, q, beta);
            } catch (const corner_collision&) {
                continue;
            }
            local += w;
            local_sq += w * w;
        }
        sum += local;
        sum_sq += local_sq;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {box_area * mean, box_area * std::sqrt(var / n)};
}

// ---------------------------------------------------------------------------
// L_Gamma by boundary scan

struct LengthGammaOptions {
    int nodes_per_segment = 64;
    double eps_rel = 1e-6;     // launch offset relative to the perimeter
    double dir_offset = 0.0;   // pi/2 gives the perpendicular variant
    double richardson_tol = 0.01;
    double transition_resolution = 1e-9; // relative to segment length
};

struct LengthGammaResult {
    double value = 0.0;
    std::vector<double> per_segment;
};

namespace length_detail {

/// Limit value of chi at launch offset eps: detects classifier margins that
/// vanish with eps (the region-boundary case) and returns 1/2 for them.
inline double eps_limit_weight(const Domain& dom, const RegionSpec& region, const BoundaryPoint& bp,
                               double beta, double eps) {
    auto eval = [&](double e) {
        return classify_dir(dom, region, bp.q + e * bp.normal, unit_vector(beta));
    };
    const auto r1 = eval(eps);
    const auto r2 = eval(0.5 * eps);
    if (r1.weight == 0.5 || r2.weight == 0.5) return 0.5;
    const bool shrink12 = std::abs(r2.margin) <= 0.6 * std::abs(r1.margin);
    if (r1.weight == r2.weight && !shrink12) return r1.weight;
    const auto r3 = eval(0.25 * eps);
    if (r3.weight == 0.5) return 0.5;
    const bool shrink23 = std::abs(r3.margin) <= 0.6 * std::abs(r2.margin);
    if (shrink12 && shrink23) return 0.5; // margin -> 0 with eps: boundary of Gamma
    return r3.weight;
}

inline double node_weight(const Domain& dom, const RegionSpec& region, double s, double eps,
                          double dir_offset) {
    const auto bp = dom.at(s);
    const double b1 = bp.tangent_angle + dir_offset;
    const double w1 = eps_limit_weight(dom, region, bp, b1, eps);
    const double w2 = eps_limit_weight(dom, region, bp, b1 + pi, eps);
    return 0.5 * (w1 + w2);
}

inline double segment_value(const Domain& dom, const RegionSpec& region, int iseg, double eps,
                            const LengthGammaOptions& opt) {
    const auto [s_lo, s_hi] = dom.segment_range(iseg);
    const double len = s_hi - s_lo;
    const int n = std::max(4, opt.nodes_per_segment);
    std::vector<double> s(n), w(n);
    for (int i = 0; i < n; ++i) {
        s[i] = s_lo + len * (i + 0.5) / n;
        w[i] = node_weight(dom, region, s[i], eps, opt.dir_offset);
    }
    bool constant = true;
    for (int i = 1; i < n; ++i) constant &= (w[i] == w[0]);
    if (constant) return len * w[0]; // exact when chi is constant on the segment
    // piecewise-constant integral with bisected transition points
    double acc = 0.0;
    double seg_start = s_lo;
    double wcur = w[0];
    const double res = opt.transition_resolution * len;
    for (int i = 1; i < n; ++i) {
        if (w[i] == wcur) continue;
        // locate the end of the wcur stretch; ties at the exact transition
        // point may return a third value, so only the predicate w == wcur is
        // trusted and the next stretch takes the node value.
        double a = s[i - 1], b = s[i];
        const double wa = wcur;
        while (b - a > res) {
            const double mid = 0.5 * (a + b);
            if (node_weight(dom, region, mid, eps, opt.dir_offset) == wa)
                a = mid;
            else
                b = mid;
        }
        const double cut = 0.5 * (a + b);
        acc += (cut - seg_start) * wcur;
        seg_start = cut;
        wcur = w[i];
    }
    acc += (s_hi - seg_start) * wcur;
    return acc;
}

} // namespace length_detail

/// Boundary-length coefficient: integral over the boundary of the limiting
/// characteristic function of trajectories launched parallel to the wall
/// (or rotated by dir_offset).  Region-boundary pieces contribute 1/2.
inline LengthGammaResult length_gamma(const Domain& dom, const RegionSpec& region,
                                      LengthGammaOptions opt = {}) {
    const double eps = opt.eps_rel * dom.perimeter();
    LengthGammaResult res;
    res.per_segment.resize(dom.segments().size());
    for (int i = 0; i < int(dom.segments().size()); ++i) {
        const double v1 = length_detail::segment_value(dom, region, i, eps, opt);
        const double v2 = length_detail::segment_value(dom, region, i, 0.5 * eps, opt);
        const double len = segment_length(dom.segments()[i]);
        if (std::abs(v1 - v2) > opt.richardson_tol * std::max(len, 1e-12))
            throw numerical_failure("length_gamma did not converge between eps and eps/2 on segment " +
                                    std::to_string(i));
        res.per_segment[i] = v2;
        res.value += v2;
    }
    return res;
}

// ---------------------------------------------------------------------------
// island masks

struct MaskBuildReport {
    RegionSpec region;
    double invariance_mismatch = 0.0;
    int visited_cells = 0;
    int filled_cells = 0;
};

/// Builds an invariant-region mask from the closure of a single orbit: the
/// orbit is rasterized onto the section window, the smallest complementary
/// component (with its p -> -p mirror) is filled, and orbit cells carry
/// half weight.
inline MaskBuildReport build_island_mask(const Domain& dom, BirkhoffCoord seed, std::int64_t n_iter,
                                         int ns, int np, std::uint64_t check_seed = 7777) {
    auto mask = std::make_shared<SectionMask>();
    {
        const auto bp = dom.at(seed.s);
        const auto [lo, hi] = dom.segment_range(bp.segment);
        mask->ns = ns;
        mask->np = np;
        mask->s_lo = lo;
        mask->s_hi = hi;
        mask->cells.assign(std::size_t(ns) * np, 0);
    }
    std::vector<std::uint8_t> visited(std::size_t(ns) * np, 0);
    auto mark = [&](double s, double p) {
        if (!mask->in_window(s) || p < -1.0 || p > 1.0) return;
        visited[mask->cell_index(s, p)] = 1;
    };
    mark(seed.s, seed.p);
    BirkhoffCoord x = seed;
    for (std::int64_t it = 0; it < n_iter; ++it) {
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
            try {
                x = billiard_map(dom, x);
                ok = true;
            } catch (const corner_collision&) {
                x.p = std::clamp(x.p + 1e-9 * (attempt + 1), -0.999999, 0.999999);
            } catch (const grazing_tangency&) {
                x.p = std::copysign(1.0 - 1e-9 * (attempt + 2), x.p);
            }
        }
        if (!ok) throw numerical_failure("island orbit stalled at a corner");
        mark(x.s, x.p);
    }
    // time-reversal symmetrization
    for (int ip = 0; ip < np; ++ip)
        for (int is = 0; is < ns; ++is)
            if (visited[std::size_t(ip) * ns + is])
                visited[std::size_t(np - 1 - ip) * ns + is] = 1;

    std::int64_t nvis = 0;
    for (auto v : visited) nvis += v;
    if (nvis > std::int64_t(ns) * np / 2)
        throw not_an_island("seed orbit visits more than half of the section window");

    // connected components of the complement (4-neighbour)
    std::vector<std::int32_t> comp(std::size_t(ns) * np, -1);
    std::vector<std::int64_t> comp_size;
    for (int start = 0; start < ns * np; ++start) {
        if (visited[start] || comp[start] >= 0) continue;
        const std::int32_t id = static_cast<std::int32_t>(comp_size.size());
        std::int64_t size = 0;
        std::vector<int> stack{start};
        comp[start] = id;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            ++size;
            const int is = c % ns, ip = c / ns;
            const int nb[4] = {is > 0 ? c - 1 : -1, is < ns - 1 ? c + 1 : -1,
                               ip > 0 ? c - ns : -1, ip < np - 1 ? c + ns : -1};
            for (int nc : nb) {
                if (nc >= 0 && !visited[nc] && comp[nc] < 0) {
                    comp[nc] = id;
                    stack.push_back(nc);
                }
            }
        }
        comp_size.push_back(size);
    }
    if (comp_size.size() < 2)
        throw not_an_island("orbit closure does not enclose a region");
    std::int32_t best = 0;
    for (std::int32_t i = 1; i < std::int32_t(comp_size.size()); ++i)
        if (comp_size[i] < comp_size[best]) best = i;

    MaskBuildReport report;
    for (int ip = 0; ip < np; ++ip) {
        for (int is = 0; is < ns; ++is) {
            const std::size_t idx = std::size_t(ip) * ns + is;
            const std::size_t mir = std::size_t(np - 1 - ip) * ns + is;
            if (!visited[idx] && (comp[idx] == best || comp[mir] == best)) {
                mask->cells[idx] = 2;
                ++report.filled_cells;
            } else if (visited[idx]) {
                mask->cells[idx] = 1; // orbit-closure boundary: half weight
            }
        }
    }
    report.visited_cells = static_cast<int>(nvis);
    report.region = RegionSpec::from_mask(mask, "island");

    // invariance check: membership should survive one map application
    CounterRng rng(check_seed);
    int tested = 0, mismatched = 0;
    for (int i = 0; i < 1000; ++i) {
        BirkhoffCoord y{rng.uniform(mask->s_lo, mask->s_hi), rng.uniform(-0.999, 0.999)};
        const double w0 = mask->weight_at(y.s, y.p);
        if (w0 == 0.5) continue;
        BirkhoffCoord y1;
        try {
            y1 = billiard_map(dom, y);
        } catch (...) {
            continue;
        }
        double w1;
        if (mask->in_window(y1.s)) {
            w1 = mask->weight_at(y1.s, y1.p);
        } else {
            const auto bp = dom.at(y1.s);
            const Vec2 v = y1.p * bp.tangent + std::sqrt(std::max(0.0, 1.0 - y1.p * y1.p)) * bp.normal;
            w1 = classify_dir(dom, report.region, bp.q, v).weight;
        }
        if (w1 == 0.5) continue;
        ++tested;
        if (w0 != w1) ++mismatched;
    }
    report.invariance_mismatch = tested ? double(mismatched) / tested : 0.0;
    if (report.invariance_mismatch >= 0.01)
        throw numerical_failure("island mask is not invariant: mismatch " +
                                std::to_string(report.invariance_mismatch));
    return report;
}

} // namespace partweyl

#endif
