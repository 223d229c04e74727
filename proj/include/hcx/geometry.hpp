#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hcx/errors.hpp"

namespace hcx {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::sqrt(dot(a, a)); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Twice the signed area of triangle (a,b,c); positive when counterclockwise.
inline double orient2d(Point2 a, Point2 b, Point2 c) {
    const long double acx = (long double)a.x - c.x;
    const long double acy = (long double)a.y - c.y;
    const long double bcx = (long double)b.x - c.x;
    const long double bcy = (long double)b.y - c.y;
    return (double)(acx * bcy - acy * bcx);
}

/// Positive when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
inline double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
    const long double adx = (long double)a.x - d.x, ady = (long double)a.y - d.y;
    const long double bdx = (long double)b.x - d.x, bdy = (long double)b.y - d.y;
    const long double cdx = (long double)c.x - d.x, cdy = (long double)c.y - d.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    return (double)(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                    ad * (bdx * cdy - bdy * cdx));
}

inline double segment_point_distance(Point2 a, Point2 b, Point2 p) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0)
        return distance(a, p);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(a + t * ab, p);
}

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double d1 = orient2d(c, d, a);
    const double d2 = orient2d(c, d, b);
    const double d3 = orient2d(a, b, c);
    const double d4 = orient2d(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [](Point2 p, Point2 q, Point2 r) {
        return orient2d(p, q, r) == 0.0 && std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

inline double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
    if (segments_intersect(a, b, c, d))
        return 0.0;
    return std::min(std::min(segment_point_distance(a, b, c), segment_point_distance(a, b, d)),
                    std::min(segment_point_distance(c, d, a), segment_point_distance(c, d, b)));
}

/// Simple closed polygon given by its vertex loop (no repeated last point).
struct Polygon {
    std::vector<Point2> pts;

    double signed_area() const {
        double a = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Point2& p = pts[i];
            const Point2& q = pts[(i + 1) % pts.size()];
            a += cross(p, q);
        }
        return 0.5 * a;
    }

    void make_ccw() {
        if (signed_area() < 0.0)
            std::reverse(pts.begin(), pts.end());
    }

    bool contains(Point2 p) const {
        bool inside = false;
        for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
            const Point2& a = pts[i];
            const Point2& b = pts[j];
            if ((a.y > p.y) != (b.y > p.y)) {
                const double xcross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if (p.x < xcross)
                    inside = !inside;
            }
        }
        return inside;
    }

    bool is_simple() const {
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // skip edges sharing a vertex
                if (j == i || (j + 1) % n == i || (i + 1) % n == j)
                    continue;
                if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
                    return false;
            }
        }
        return true;
    }

    /// Smallest interior corner angle in degrees (polygon must be simple).
    double min_corner_angle_deg() const {
        const std::size_t n = pts.size();
        double best = 360.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 prev = pts[(i + n - 1) % n];
            const Point2 cur = pts[i];
            const Point2 next = pts[(i + 1) % n];
            const Point2 u = prev - cur;
            const Point2 v = next - cur;
            const double c = dot(u, v) / (norm(u) * norm(v));
            const double ang = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
            best = std::min(best, ang);
        }
        return best;
    }
};

/// Regular n-gon inscribed in the circle of radius r around (cx, cy).
/// When 4 divides n the vertices are generated from one quadrant and mirrored,
/// so meshes built on axis-aligned configurations inherit both reflection
/// symmetries exactly (up to the last bit).
inline Polygon make_ngon(double cx, double cy, double r, int n) {
    if (n < 3 || r <= 0.0)
        throw DegenerateGeometry("make_ngon: need n >= 3 and r > 0");
    std::vector<Point2> pts(static_cast<std::size_t>(n));
    if (n % 4 == 0) {
        const int q = n / 4;
        for (int k = 0; k <= q; ++k) {
            const double a = 2.0 * M_PI * k / n;
            double dx = r * std::cos(a);
            double dy = r * std::sin(a);
            if (k == 0) dy = 0.0;
            if (k == q) dx = 0.0;
            pts[static_cast<std::size_t>(k)] = {cx + dx, cy + dy};
            pts[static_cast<std::size_t>(2 * q - k)] = {cx - dx, cy + dy};
            if (k > 0) {
                pts[static_cast<std::size_t>(2 * q + k)] = {cx - dx, cy - dy};
                pts[static_cast<std::size_t>(4 * q - k)] = {cx + dx, cy - dy};
            }
        }
    } else {
        for (int k = 0; k < n; ++k) {
            const double a = 2.0 * M_PI * k / n;
            pts[static_cast<std::size_t>(k)] = {cx + r * std::cos(a), cy + r * std::sin(a)};
        }
    }
    return Polygon{std::move(pts)};
}

inline Polygon make_rectangle(double x0, double y0, double x1, double y1) {
    if (!(x1 > x0) || !(y1 > y0))
        throw DegenerateGeometry("make_rectangle: empty extent");
    return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

} // namespace hcx
