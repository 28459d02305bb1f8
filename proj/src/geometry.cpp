#include "spts/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spts::geom {

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

Affine Affine::translation(double tx, double ty) {
    Affine a;
    a.m = {1, 0, tx, 0, 1, ty};
    return a;
}

Affine Affine::rotation_scale_about(Point c, double radians, double s) {
    const double co = std::cos(radians) * s;
    const double si = std::sin(radians) * s;
    Affine a;
    a.m = {co, -si, c.x - co * c.x + si * c.y, si, co, c.y - si * c.x - co * c.y};
    return a;
}

Point Affine::apply(Point p) const {
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

Affine Affine::then(const Affine& n) const {
    Affine r;
    r.m = {n.m[0] * m[0] + n.m[1] * m[3],
           n.m[0] * m[1] + n.m[1] * m[4],
           n.m[0] * m[2] + n.m[1] * m[5] + n.m[2],
           n.m[3] * m[0] + n.m[4] * m[3],
           n.m[3] * m[1] + n.m[4] * m[4],
           n.m[3] * m[2] + n.m[4] * m[5] + n.m[5]};
    return r;
}

Affine Affine::inverse() const {
    const double det = m[0] * m[4] - m[1] * m[3];
    if (std::abs(det) < 1e-12) throw std::invalid_argument("Affine::inverse: singular");
    const double id = 1.0 / det;
    Affine r;
    r.m = {m[4] * id,  -m[1] * id, (m[1] * m[5] - m[4] * m[2]) * id,
           -m[3] * id, m[0] * id,  (m[3] * m[2] - m[0] * m[5]) * id};
    return r;
}

Rect bounding_box(const Polygon& poly) {
    if (poly.empty()) return {};
    Rect r{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
    for (const auto& p : poly) {
        r.x0 = std::min(r.x0, p.x);
        r.y0 = std::min(r.y0, p.y);
        r.x1 = std::max(r.x1, p.x);
        r.y1 = std::max(r.y1, p.y);
    }
    return r;
}

double rect_iou(const Rect& a, const Rect& b) {
    const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
    const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

double polygon_area(const Polygon& poly) {
    double s = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(s) * 0.5;
}

bool point_in_polygon(Point p, const Polygon& poly) {
    bool in = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            in = !in;
    }
    return in;
}

double point_segment_dist(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return dist(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, a + ab * t);
}

double point_polygon_dist(Point p, const Polygon& poly) {
    if (poly.empty()) return 0.0;
    if (point_in_polygon(p, poly)) return 0.0;
    double d = dist(p, poly[0]);
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i)
        d = std::min(d, point_segment_dist(p, poly[i], poly[(i + 1) % n]));
    return d;
}

double polyline_length(const std::vector<Point>& pts) {
    double s = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) s += dist(pts[i - 1], pts[i]);
    return s;
}

Point polyline_point_at(const std::vector<Point>& pts, double fraction) {
    if (pts.empty()) throw std::invalid_argument("polyline_point_at: empty polyline");
    if (pts.size() == 1) return pts[0];
    const double total = polyline_length(pts);
    if (total <= 0.0) return pts[0];
    double target = std::clamp(fraction, 0.0, 1.0) * total;
    for (size_t i = 1; i < pts.size(); ++i) {
        const double seg = dist(pts[i - 1], pts[i]);
        if (target <= seg || i + 1 == pts.size()) {
            const double t = seg > 0.0 ? target / seg : 0.0;
            return pts[i - 1] + (pts[i] - pts[i - 1]) * std::clamp(t, 0.0, 1.0);
        }
        target -= seg;
    }
    return pts.back();
}

Point bezier_eval(const std::array<Point, 4>& c, double t) {
    const double u = 1.0 - t;
    const double b0 = u * u * u;
    const double b1 = 3.0 * u * u * t;
    const double b2 = 3.0 * u * t * t;
    const double b3 = t * t * t;
    return c[0] * b0 + c[1] * b1 + c[2] * b2 + c[3] * b3;
}

}  // namespace spts::geom
