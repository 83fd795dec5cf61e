#ifndef GRIDNAV_ENV_HPP
#define GRIDNAV_ENV_HPP

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "gridnav/error.hpp"
#include "gridnav/geometry.hpp"
#include "gridnav/grid_map.hpp"

namespace gridnav {

inline constexpr double kMoveDistance = 0.25;     // meters per MoveAhead
inline constexpr int kRotateStep = 30;            // degrees per rotation
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class MetaAction { MoveAhead, RotateLeft, RotateRight, Obs, End };

// Canonical action spellings, used verbatim in memory serialization,
// dataset turns, and episode logs.
inline const char* action_label(MetaAction a) {
    switch (a) {
        case MetaAction::MoveAhead: return "MoveAhead 0.25";
        case MetaAction::RotateLeft: return "RotateLeft 30.0";
        case MetaAction::RotateRight: return "RotateRight 30.0";
        case MetaAction::Obs: return "obs";
        case MetaAction::End: return "end";
    }
    return "?";
}

inline MetaAction parse_action_label(const std::string& s) {
    if (s == "MoveAhead 0.25") return MetaAction::MoveAhead;
    if (s == "RotateLeft 30.0") return MetaAction::RotateLeft;
    if (s == "RotateRight 30.0") return MetaAction::RotateRight;
    if (s == "obs") return MetaAction::Obs;
    if (s == "end") return MetaAction::End;
    throw ParseError("unknown action label: " + s);
}

inline bool is_motor(MetaAction a) {
    return a == MetaAction::MoveAhead || a == MetaAction::RotateLeft ||
           a == MetaAction::RotateRight;
}

struct Pose {
    double x = 0.0;
    double y = 0.0;
    int heading = 0;  // degrees, multiple of 30 in [0, 330]

    Point point() const { return Point{x, y}; }
};

inline bool operator==(const Pose& a, const Pose& b) {
    return a.x == b.x && a.y == b.y && a.heading == b.heading;
}

enum class Event {
    Collision,
    ObsRequested,
    Terminated,
    ForcedObs,
    StagRepetitive,
    StagNoProgress,
};

inline const char* event_label(Event e) {
    switch (e) {
        case Event::Collision: return "collision";
        case Event::ObsRequested: return "obs_requested";
        case Event::Terminated: return "terminated";
        case Event::ForcedObs: return "forced_obs";
        case Event::StagRepetitive: return "stag_repetitive";
        case Event::StagNoProgress: return "stag_no_progress";
    }
    return "?";
}

inline Event parse_event_label(const std::string& s) {
    if (s == "collision") return Event::Collision;
    if (s == "obs_requested") return Event::ObsRequested;
    if (s == "terminated") return Event::Terminated;
    if (s == "forced_obs") return Event::ForcedObs;
    if (s == "stag_repetitive") return Event::StagRepetitive;
    if (s == "stag_no_progress") return Event::StagNoProgress;
    throw ParseError("unknown event label: " + s);
}

struct StepResult {
    Pose pose;
    std::vector<Event> events;
};

// Checks the swept segment from `from` along `heading` at sub-cell
// granularity (resolution / 2). The start point itself is not re-checked.
inline bool sweep_free(const GridMap& map, const Point& from, int heading, double dist) {
    double dx = cos_heading(heading), dy = sin_heading(heading);
    int n = static_cast<int>(std::ceil(dist / (map.resolution * 0.5)));
    if (n < 1) n = 1;
    for (int i = 1; i <= n; ++i) {
        double t = dist * i / n;
        Point p{from.x + t * dx, from.y + t * dy};
        Cell c = map.cell_of(p);
        if (!map.in_bounds(c) || map.occupied(c)) return false;
    }
    return true;
}

// Deterministic transition. MoveAhead translates 0.25 m along the heading if
// the swept segment crosses only free cells; otherwise the pose is unchanged
// and a Collision event is emitted. Rotations adjust heading by 30 degrees.
// Obs and End leave the pose unchanged and emit their marker event.
inline StepResult step(const GridMap& map, const Pose& pose, MetaAction action) {
    StepResult r{pose, {}};
    switch (action) {
        case MetaAction::MoveAhead: {
            if (sweep_free(map, pose.point(), pose.heading, kMoveDistance)) {
                r.pose.x = pose.x + kMoveDistance * cos_heading(pose.heading);
                r.pose.y = pose.y + kMoveDistance * sin_heading(pose.heading);
            } else {
                r.events.push_back(Event::Collision);
            }
            break;
        }
        case MetaAction::RotateLeft:
            r.pose.heading = wrap_heading(pose.heading + kRotateStep);
            break;
        case MetaAction::RotateRight:
            r.pose.heading = wrap_heading(pose.heading - kRotateStep);
            break;
        case MetaAction::Obs:
            r.events.push_back(Event::ObsRequested);
            break;
        case MetaAction::End:
            r.events.push_back(Event::Terminated);
            break;
    }
    return r;
}

struct ObserveConfig {
    double fov_deg = 90.0;  // total field of view
    double range = 5.0;     // meters
};

// Egocentric view: free cells within range and +-fov/2 of the heading whose
// ray from the origin is not blocked by an occupied cell. The agent's own
// cell is always visible.
struct Observation {
    Pose origin;
    std::vector<Cell> visible_cells;    // row-major order
    std::vector<Point> visible_targets; // subset of G, map order
};

namespace detail {

inline bool ray_clear(const GridMap& map, const Point& from, const Cell& dest) {
    Point to = map.center(dest);
    double dist = euclidean(from, to);
    if (dist == 0.0) return true;
    double g = map.resolution * 0.25;
    int n = static_cast<int>(std::ceil(dist / g));
    double dx = (to.x - from.x) / dist, dy = (to.y - from.y) / dist;
    for (int i = 1; i <= n; ++i) {
        double t = dist * i / n;
        Point p{from.x + t * dx, from.y + t * dy};
        Cell c = map.cell_of(p);
        if (c == dest) return true;
        if (!map.in_bounds(c) || map.occupied(c)) return false;
    }
    return true;
}

}  // namespace detail

inline Observation observe(const GridMap& map, const Pose& pose, const ObserveConfig& cfg = {}) {
    Observation obs;
    obs.origin = pose;
    Cell own = map.cell_of(pose.point());
    if (!map.in_bounds(own)) throw OutOfBoundsError("observe: pose outside map");
    int radius = static_cast<int>(std::ceil(cfg.range / map.resolution)) + 1;
    double half_fov = cfg.fov_deg * 0.5;
    for (int r = own.row - radius; r <= own.row + radius; ++r) {
        for (int c = own.col - radius; c <= own.col + radius; ++c) {
            Cell cell{c, r};
            if (!map.in_bounds(cell) || map.occupied(cell)) continue;
            if (cell == own) {
                obs.visible_cells.push_back(cell);
                continue;
            }
            Point center = map.center(cell);
            if (euclidean(pose.point(), center) > cfg.range) continue;
            double diff = normalize_angle(bearing_deg(pose.point(), center) - pose.heading);
            if (std::abs(diff) > half_fov + 1e-9) continue;
            if (!detail::ray_clear(map, pose.point(), cell)) continue;
            obs.visible_cells.push_back(cell);
        }
    }
    for (size_t i = 0; i < map.target_cells.size(); ++i) {
        const Cell& t = map.target_cells[i];
        for (const Cell& v : obs.visible_cells) {
            if (v == t) {
                obs.visible_targets.push_back(map.center(t));
                break;
            }
        }
    }
    return obs;
}

// Four views at heading, heading+90, heading+180, heading+270: a full
// panoramic sweep with the pose left unchanged.
struct PanoramicScan {
    Pose pose;
    std::array<Observation, 4> views;
};

inline PanoramicScan panoramic(const GridMap& map, const Pose& pose, const ObserveConfig& cfg = {}) {
    PanoramicScan scan;
    scan.pose = pose;
    for (int k = 0; k < 4; ++k) {
        Pose p = pose;
        p.heading = wrap_heading(pose.heading + 90 * k);
        scan.views[k] = observe(map, p, cfg);
    }
    return scan;
}

// --- Grid geodesics --------------------------------------------------------
//
// 8-connected shortest paths; diagonal steps cost sqrt(2) x resolution and
// are forbidden when either orthogonal neighbor of the step is blocked
// (no corner cutting). Costs are canonicalized from integer step counts so
// equal paths always compare bit-identically.

namespace detail {

struct GridDistances {
    std::vector<int> straight;  // -1 = unreachable
    std::vector<int> diagonal;
    std::vector<double> cost;   // canonical; +inf when unreachable
};

inline double canonical_cost(int straight, int diagonal, double resolution) {
    const double diag_unit = resolution * std::numbers::sqrt2;
    return straight * resolution + diagonal * diag_unit;
}

// (dr, dc) in fixed order; index parity: odd entries are diagonal.
inline constexpr int kNeighbors8[8][2] = {
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}};

inline GridDistances dijkstra_grid(const GridMap& map, const std::vector<Cell>& sources) {
    size_t n = static_cast<size_t>(map.width) * map.height;
    GridDistances d;
    d.straight.assign(n, -1);
    d.diagonal.assign(n, -1);
    d.cost.assign(n, kInfinity);
    using QItem = std::pair<double, int>;  // (cost, cell index) — index breaks ties
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;
    for (const Cell& s : sources) {
        if (!map.free(s)) continue;
        int idx = map.index(s);
        if (d.cost[idx] == 0.0) continue;
        d.straight[idx] = 0;
        d.diagonal[idx] = 0;
        d.cost[idx] = 0.0;
        pq.push({0.0, idx});
    }
    while (!pq.empty()) {
        auto [cost, idx] = pq.top();
        pq.pop();
        if (cost > d.cost[idx]) continue;
        Cell cur{idx % map.width, idx / map.width};
        for (int k = 0; k < 8; ++k) {
            int dr = kNeighbors8[k][0], dc = kNeighbors8[k][1];
            Cell nxt{cur.col + dc, cur.row + dr};
            if (!map.free(nxt)) continue;
            bool diag = (dr != 0 && dc != 0);
            if (diag) {
                if (!map.free(Cell{cur.col + dc, cur.row}) ||
                    !map.free(Cell{cur.col, cur.row + dr}))
                    continue;
            }
            int ns = d.straight[idx] + (diag ? 0 : 1);
            int nd = d.diagonal[idx] + (diag ? 1 : 0);
            double nc = canonical_cost(ns, nd, map.resolution);
            int nidx = map.index(nxt);
            if (nc < d.cost[nidx]) {
                d.straight[nidx] = ns;
                d.diagonal[nidx] = nd;
                d.cost[nidx] = nc;
                pq.push({nc, nidx});
            }
        }
    }
    return d;
}

}  // namespace detail

// Geodesic distance field from a set of source cells (multi-source).
inline std::vector<double> distance_field(const GridMap& map, const std::vector<Cell>& sources) {
    return detail::dijkstra_grid(map, sources).cost;
}

// Shortest 8-connected grid path length between the cells containing p and q,
// in meters. Returns +inf when disconnected.
inline double geodesic_distance(const GridMap& map, const Point& p, const Point& q) {
    Cell cp = map.cell_of(p), cq = map.cell_of(q);
    if (!map.in_bounds(cp) || !map.in_bounds(cq))
        throw OutOfBoundsError("geodesic_distance: point outside map");
    if (cp == cq) return 0.0;
    auto d = detail::dijkstra_grid(map, {cp});
    return d.cost[map.index(cq)];
}

// Distance from a point to the nearest of several goal points, using a
// precomputed field from those goals.
inline double field_distance(const GridMap& map, const std::vector<double>& field, const Point& p) {
    Cell c = map.cell_of(p);
    if (!map.in_bounds(c)) throw OutOfBoundsError("field_distance: point outside map");
    return field[map.index(c)];
}

inline std::vector<double> target_distance_field(const GridMap& map) {
    return distance_field(map, map.target_cells);
}

// Geodesic distance from p to the nearest target. +inf when disconnected.
inline double geodesic_distance_to_targets(const GridMap& map, const Point& p) {
    return field_distance(map, target_distance_field(map), p);
}

}  // namespace gridnav

#endif
