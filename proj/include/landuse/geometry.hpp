#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "landuse/errors.hpp"
#include "landuse/grid.hpp"

namespace landuse {

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

/// Ordered vertex list. Closed rings repeat the first vertex at the end.
using Ring = std::vector<Point>;

struct Rect {
    double min_x, min_y, max_x, max_y;
    bool contains(double x, double y) const { return x >= min_x && x < max_x && y >= min_y && y < max_y; }
};

/// Signed shoelace area; positive for counter-clockwise rings. Accepts both
/// open and closed (first == last) vertex lists.
inline double signed_area(const Ring& ring) {
    double a = 0.0;
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = ring[i];
        const Point& q = ring[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

inline double ring_area(const Ring& ring) { return std::abs(signed_area(ring)); }

namespace detail {

// Proper or improper intersection of closed segments ab and cd.
inline bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
    auto cross = [](const Point& o, const Point& p, const Point& q) {
        return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    };
    auto on_segment = [](const Point& p, const Point& q, const Point& r) {
        return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
               std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
    };
    double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(c, a, d)) return true;
    if (d2 == 0 && on_segment(c, b, d)) return true;
    if (d3 == 0 && on_segment(a, c, b)) return true;
    if (d4 == 0 && on_segment(a, d, b)) return true;
    return false;
}

// One Sutherland-Hodgman pass against a half-plane. inside(p) keeps p;
// intersect(p,q) returns the boundary crossing point.
template <class InsideFn, class CrossFn>
Ring clip_half_plane(const Ring& poly, InsideFn inside, CrossFn intersect) {
    Ring out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 4);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& cur = poly[i];
        const Point& prev = poly[(i + n - 1) % n];
        bool cur_in = inside(cur), prev_in = inside(prev);
        if (cur_in) {
            if (!prev_in) out.push_back(intersect(prev, cur));
            out.push_back(cur);
        } else if (prev_in) {
            out.push_back(intersect(prev, cur));
        }
    }
    return out;
}

}  // namespace detail

/// Clips a ring (open representation: no repeated end vertex required)
/// to an axis-aligned rectangle. Sutherland-Hodgman, one pass per edge.
inline Ring clip_ring_to_rect(const Ring& ring_in, const Rect& r) {
    // Work on the open form.
    Ring poly = ring_in;
    if (poly.size() >= 2 && poly.front() == poly.back()) poly.pop_back();

    auto lerp = [](const Point& p, const Point& q, double t) {
        return Point{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
    };
    poly = detail::clip_half_plane(
        poly, [&](const Point& p) { return p.x >= r.min_x; },
        [&](const Point& p, const Point& q) { return lerp(p, q, (r.min_x - p.x) / (q.x - p.x)); });
    poly = detail::clip_half_plane(
        poly, [&](const Point& p) { return p.x <= r.max_x; },
        [&](const Point& p, const Point& q) { return lerp(p, q, (r.max_x - p.x) / (q.x - p.x)); });
    poly = detail::clip_half_plane(
        poly, [&](const Point& p) { return p.y >= r.min_y; },
        [&](const Point& p, const Point& q) { return lerp(p, q, (r.min_y - p.y) / (q.y - p.y)); });
    poly = detail::clip_half_plane(
        poly, [&](const Point& p) { return p.y <= r.max_y; },
        [&](const Point& p, const Point& q) { return lerp(p, q, (r.max_y - p.y) / (q.y - p.y)); });
    return poly;
}

/// Area of the part of `ring` inside `r`.
inline double clipped_area(const Ring& ring, const Rect& r) {
    Ring clipped = clip_ring_to_rect(ring, r);
    if (clipped.size() < 3) return 0.0;
    return ring_area(clipped);
}

/// A zoning parcel: exterior ring, optional holes, one land-use class.
struct ZoningPolygon {
    Ring exterior;
    std::vector<Ring> holes;
    LandUseClass land_use = LandUseClass::Residential;

    Rect bounding_box() const {
        Rect b{exterior[0].x, exterior[0].y, exterior[0].x, exterior[0].y};
        for (const Point& p : exterior) {
            b.min_x = std::min(b.min_x, p.x);
            b.min_y = std::min(b.min_y, p.y);
            b.max_x = std::max(b.max_x, p.x);
            b.max_y = std::max(b.max_y, p.y);
        }
        return b;
    }

    /// Area of this polygon inside `r`; holes subtract from the exterior only.
    double area_in_rect(const Rect& r) const {
        double a = clipped_area(exterior, r);
        for (const Ring& h : holes) a -= clipped_area(h, r);
        return std::max(a, 0.0);
    }
};

/// Closed ring with >= 4 vertices (first == last) and no self-intersection
/// between non-adjacent edges.
inline void validate_ring(const Ring& ring, const std::string& what) {
    if (ring.size() < 4) throw InputError(what + ": ring needs >= 4 vertices (closed), got " +
                                          std::to_string(ring.size()));
    if (!(ring.front() == ring.back())) throw InputError(what + ": ring is not closed");
    const std::size_t n = ring.size() - 1;  // edges
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (detail::segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]))
                throw InputError(what + ": self-intersecting ring (edges " + std::to_string(i) +
                                 " and " + std::to_string(j) + ")");
        }
    if (ring_area(ring) <= 0.0) throw InputError(what + ": degenerate ring (zero area)");
}

inline void validate_polygon(const ZoningPolygon& poly, std::size_t index) {
    const std::string what = "polygon " + std::to_string(index);
    validate_ring(poly.exterior, what + " exterior");
    for (std::size_t h = 0; h < poly.holes.size(); ++h)
        validate_ring(poly.holes[h], what + " hole " + std::to_string(h));
}

/// Convenience for tests and the synthetic generator.
inline Ring rect_ring(double min_x, double min_y, double max_x, double max_y) {
    return Ring{{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}, {min_x, min_y}};
}

}  // namespace landuse
