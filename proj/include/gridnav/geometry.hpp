#ifndef GRIDNAV_GEOMETRY_HPP
#define GRIDNAV_GEOMETRY_HPP

#include <cmath>
#include <numbers>

namespace gridnav {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Grid cell address. Tie-breaks across the library compare (row, col).
struct Cell {
    int col = 0;
    int row = 0;
};

inline bool operator==(const Cell& a, const Cell& b) { return a.col == b.col && a.row == b.row; }
inline bool operator!=(const Cell& a, const Cell& b) { return !(a == b); }

inline bool row_major_less(const Cell& a, const Cell& b) {
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
}

// Heading convention: integer degrees, multiple of 30 in [0, 330].
// 0 deg points along +x, counterclockwise is positive.
inline constexpr int kHeadingStep = 30;
inline constexpr int kNumHeadings = 12;

inline int wrap_heading(int deg) {
    int h = deg % 360;
    if (h < 0) h += 360;
    return h;
}

// Exact trig table for the 12 legal headings keeps replays bit-stable.
inline double cos_heading(int heading) {
    static constexpr double c30 = 0.86602540378443864676;  // sqrt(3)/2
    static constexpr double tab[kNumHeadings] = {
        1.0, c30, 0.5, 0.0, -0.5, -c30, -1.0, -c30, -0.5, 0.0, 0.5, c30};
    return tab[wrap_heading(heading) / kHeadingStep];
}

inline double sin_heading(int heading) {
    static constexpr double c30 = 0.86602540378443864676;
    static constexpr double tab[kNumHeadings] = {
        0.0, 0.5, c30, 1.0, c30, 0.5, 0.0, -0.5, -c30, -1.0, -c30, -0.5};
    return tab[wrap_heading(heading) / kHeadingStep];
}

// Normalizes an angle difference into (-180, 180].
inline double normalize_angle(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a <= -180.0) a += 360.0;
    if (a > 180.0) a -= 360.0;
    return a;
}

inline double bearing_deg(const Point& from, const Point& to) {
    return std::atan2(to.y - from.y, to.x - from.x) * 180.0 / std::numbers::pi;
}

inline double euclidean(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Distance from point p to segment [a, b].
inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    if (len2 == 0.0) return euclidean(p, a);
    double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    Point proj{a.x + t * vx, a.y + t * vy};
    return euclidean(p, proj);
}

}  // namespace gridnav

#endif
