#ifndef GRIDNAV_PLANNER_HPP
#define GRIDNAV_PLANNER_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "gridnav/env.hpp"
#include "gridnav/error.hpp"
#include "gridnav/grid_map.hpp"
#include "gridnav/time_model.hpp"

namespace gridnav {

using CellPath = std::vector<Cell>;

// --- A* ---------------------------------------------------------------------
//
// 8-connected, octile heuristic, corner cutting forbidden (both orthogonal
// neighbors of a diagonal step must be free). Costs are canonicalized from
// integer straight/diagonal step counts, so the optimal cost is bit-identical
// to an exhaustive Dijkstra on the same instance.

inline double octile_heuristic(const Cell& a, const Cell& b, double resolution) {
    int dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
    int lo = std::min(dx, dy), hi = std::max(dx, dy);
    return detail::canonical_cost(hi - lo, lo, resolution);
}

struct AstarResult {
    CellPath path;   // from start cell to goal cell inclusive
    double cost = 0.0;
    int straight = 0;
    int diagonal = 0;
};

inline AstarResult astar_cells(const GridMap& map, const Cell& from, const Cell& to) {
    if (!map.in_bounds(from) || !map.in_bounds(to))
        throw OutOfBoundsError("astar: endpoint outside map");
    if (!map.free(from) || !map.free(to))
        throw NoPathError("astar: endpoint on an occupied cell");
    if (from == to) return AstarResult{{from}, 0.0, 0, 0};

    size_t n = static_cast<size_t>(map.width) * map.height;
    std::vector<double> g(n, kInfinity);
    std::vector<int> gs(n, -1), gd(n, -1), parent(n, -1);
    using QItem = std::pair<double, int>;  // (f, cell index) — index breaks ties
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> open;

    int start = map.index(from), goal = map.index(to);
    g[start] = 0.0;
    gs[start] = 0;
    gd[start] = 0;
    open.push({octile_heuristic(from, to, map.resolution), start});
    std::vector<uint8_t> closed(n, 0);

    while (!open.empty()) {
        auto [f, idx] = open.top();
        open.pop();
        if (closed[idx]) continue;
        closed[idx] = 1;
        if (idx == goal) break;
        Cell cur{idx % map.width, idx / map.width};
        for (int k = 0; k < 8; ++k) {
            int dr = detail::kNeighbors8[k][0], dc = detail::kNeighbors8[k][1];
            Cell nxt{cur.col + dc, cur.row + dr};
            if (!map.free(nxt)) continue;
            bool diag = (dr != 0 && dc != 0);
            if (diag) {
                if (!map.free(Cell{cur.col + dc, cur.row}) ||
                    !map.free(Cell{cur.col, cur.row + dr}))
                    continue;
            }
            int ns = gs[idx] + (diag ? 0 : 1);
            int nd = gd[idx] + (diag ? 1 : 0);
            double ng = detail::canonical_cost(ns, nd, map.resolution);
            int nidx = map.index(nxt);
            if (ng < g[nidx]) {
                g[nidx] = ng;
                gs[nidx] = ns;
                gd[nidx] = nd;
                parent[nidx] = idx;
                open.push({ng + octile_heuristic(nxt, to, map.resolution), nidx});
            }
        }
    }
    if (g[goal] == kInfinity) throw NoPathError("astar: goal unreachable");

    AstarResult res;
    res.cost = g[goal];
    res.straight = gs[goal];
    res.diagonal = gd[goal];
    for (int idx = goal; idx != -1; idx = parent[idx])
        res.path.push_back(Cell{idx % map.width, idx / map.width});
    std::reverse(res.path.begin(), res.path.end());
    return res;
}

inline AstarResult astar(const GridMap& map, const Point& from, const Point& to) {
    return astar_cells(map, map.cell_of(from), map.cell_of(to));
}

// --- Action compilation -----------------------------------------------------
//
// Pure-pursuit compilation of a cell path into meta-actions. The compiler
// chases each waypoint in order: rotate by the minimal number of 30-degree
// turns until the heading lies within 15 degrees of the bearing (an exact
// 180-degree reversal turns left), then step 0.25 m at a time. A waypoint
// is consumed only when the agent stands inside its capture ring; with the
// heading within 15 degrees of the bearing a step strictly shrinks the
// distance while it exceeds 0.25 / (2 cos 15) ~ 0.13 m, so a 0.15 m ring is
// always entered and smaller rings could orbit. Intermediate waypoints widen
// the ring to half a cell on coarse grids. Moves are only emitted when their
// swept segment is collision-free on the generating map; a blocked approach
// first tries the two adjacent headings (keeping only steps that still close
// in) and then replans the remaining route from the current stance. Unreached
// waypoints are never skipped.

inline int aligned_heading(double bearing, int current_heading) {
    int best = -1, best_turns = 0;
    for (int h = 0; h < 360; h += kHeadingStep) {
        if (std::abs(normalize_angle(bearing - h)) > 15.0 + 1e-9) continue;
        int delta = static_cast<int>(std::lround(normalize_angle(h - current_heading)));
        int turns = std::abs(delta) / kHeadingStep;
        if (best == -1 || turns < best_turns) {
            best = h;
            best_turns = turns;
        }
    }
    return best;
}

inline void emit_rotations(int from_heading, int to_heading, std::vector<MetaAction>& out) {
    int delta = static_cast<int>(std::lround(normalize_angle(to_heading - from_heading)));
    if (delta == -180) delta = 180;  // reversal tie: rotate left
    MetaAction rot = delta > 0 ? MetaAction::RotateLeft : MetaAction::RotateRight;
    for (int i = 0; i < std::abs(delta) / kRotateStep; ++i) out.push_back(rot);
}

inline constexpr double kWaypointRadius = 0.15;  // capture ring, see note above
inline constexpr int kCompileMaxReplans = 16;

struct CompileResult {
    std::vector<MetaAction> actions;
    Pose end_pose;
    std::vector<double> visit_dists;  // closest approach per original waypoint
    int replans = 0;                  // reroutes after a blocked approach
};

inline CompileResult compile_along(const GridMap& map, const Pose& start,
                                   const std::vector<Point>& waypoints) {
    CompileResult res;
    res.end_pose = start;
    res.visit_dists.assign(waypoints.size(), kInfinity);
    if (waypoints.empty()) return res;
    Pose pose = start;
    for (size_t j = 0; j < waypoints.size(); ++j)
        res.visit_dists[j] = euclidean(pose.point(), waypoints[j]);

    const double ring_mid = std::max(0.5 * map.resolution, kWaypointRadius) + 1e-9;
    const double ring_final = kWaypointRadius + 1e-9;
    const size_t action_budget = 10000 + 64 * waypoints.size();
    std::vector<Point> track = waypoints;  // replans rewrite the remaining route
    size_t i = 0;

    while (i < track.size()) {
        if (res.actions.size() > action_budget)
            throw NoPathError("compile_along: action budget exceeded");
        const Point w = track[i];
        double d = euclidean(pose.point(), w);
        if (d <= (i + 1 == track.size() ? ring_final : ring_mid)) {
            ++i;
            continue;
        }
        double bearing = bearing_deg(pose.point(), w);
        int desired = aligned_heading(bearing, pose.heading);
        int chosen = -1;
        if (sweep_free(map, pose.point(), desired, kMoveDistance)) {
            chosen = desired;
        } else {
            for (int off : {kHeadingStep, -kHeadingStep}) {
                int alt = wrap_heading(desired + off);
                Point q{pose.x + kMoveDistance * cos_heading(alt),
                        pose.y + kMoveDistance * sin_heading(alt)};
                if (euclidean(q, w) < d - 1e-12 &&
                    sweep_free(map, pose.point(), alt, kMoveDistance)) {
                    chosen = alt;
                    break;
                }
            }
        }
        if (chosen == -1) {
            if (++res.replans > kCompileMaxReplans)
                throw NoPathError("compile_along: replanning budget exceeded");
            AstarResult ar = astar_cells(map, map.cell_of(pose.point()),
                                         map.cell_of(track.back()));
            Point goal = track.back();
            track.clear();
            for (size_t k = 1; k < ar.path.size(); ++k) track.push_back(map.center(ar.path[k]));
            if (track.empty() || euclidean(track.back(), goal) > 1e-12) track.push_back(goal);
            i = 0;
            continue;
        }
        if (chosen != pose.heading) {
            emit_rotations(pose.heading, chosen, res.actions);
            pose.heading = chosen;
            continue;
        }
        Point from = pose.point();
        res.actions.push_back(MetaAction::MoveAhead);
        pose.x = from.x + kMoveDistance * cos_heading(pose.heading);
        pose.y = from.y + kMoveDistance * sin_heading(pose.heading);
        for (size_t j = 0; j < waypoints.size(); ++j) {
            double sd = point_segment_distance(waypoints[j], from, pose.point());
            res.visit_dists[j] = std::min(res.visit_dists[j], sd);
        }
    }
    res.end_pose = pose;
    return res;
}

inline std::vector<MetaAction> path_to_actions(const GridMap& map, const CellPath& path,
                                               int start_heading) {
    if (path.empty()) return {};
    std::vector<Point> waypoints;
    for (size_t k = 1; k < path.size(); ++k) waypoints.push_back(map.center(path[k]));
    Pose start{map.center(path[0]).x, map.center(path[0]).y, wrap_heading(start_heading)};
    return compile_along(map, start, waypoints).actions;
}

// Theoretical minimum physical time to reach a target: the cheapest compiled
// A* route over all targets, with the start heading already aligned to the
// first leg (zero-rotation start) and a trailing End priced as Stop.
inline double optimal_time(const GridMap& map, const Point& p_init, const TimeModel& tm = {}) {
    if (!map.contains(p_init)) throw OutOfBoundsError("optimal_time: start outside map");
    double best = kInfinity;
    for (const Cell& target : map.target_cells) {
        AstarResult ar;
        try {
            ar = astar_cells(map, map.cell_of(p_init), target);
        } catch (const NoPathError&) {
            continue;
        }
        std::vector<Point> waypoints;
        for (size_t k = 1; k < ar.path.size(); ++k) waypoints.push_back(map.center(ar.path[k]));
        int heading = 0;
        if (!waypoints.empty())
            heading = aligned_heading(bearing_deg(p_init, waypoints.front()), 0);
        Pose start{p_init.x, p_init.y, heading};
        CompileResult cr = compile_along(map, start, waypoints);
        std::vector<MetaAction> actions = cr.actions;
        actions.push_back(MetaAction::End);
        best = std::min(best, t_phys(actions, tm));
    }
    if (best == kInfinity) throw NoPathError("optimal_time: no target reachable");
    return best;
}

}  // namespace gridnav

#endif
