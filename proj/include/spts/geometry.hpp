#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace spts::geom {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }

double dist(Point a, Point b);
double dot(Point a, Point b);

using Polygon = std::vector<Point>;

// 2x3 affine transform: p' = (m00 x + m01 y + m02, m10 x + m11 y + m12).
struct Affine {
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    static Affine identity() { return {}; }
    static Affine translation(double tx, double ty);
    // rotation (radians, counter-clockwise) and uniform scale about a center
    static Affine rotation_scale_about(Point center, double radians, double s);

    Point apply(Point p) const;
    Affine then(const Affine& next) const;  // composition: next(this(p))
    Affine inverse() const;
};

struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
};

Rect bounding_box(const Polygon& poly);
double rect_iou(const Rect& a, const Rect& b);

double polygon_area(const Polygon& poly);  // shoelace, absolute value
bool point_in_polygon(Point p, const Polygon& poly);

double point_segment_dist(Point p, Point a, Point b);
// 0 when the point lies inside, otherwise distance to the nearest edge.
double point_polygon_dist(Point p, const Polygon& poly);

double polyline_length(const std::vector<Point>& pts);
// Point at the given arc-length fraction (0..1) along the polyline.
Point polyline_point_at(const std::vector<Point>& pts, double fraction);

// Cubic Bezier over 4 control points.
Point bezier_eval(const std::array<Point, 4>& ctrl, double t);

}  // namespace spts::geom
