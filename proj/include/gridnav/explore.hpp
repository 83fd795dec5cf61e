#ifndef GRIDNAV_EXPLORE_HPP
#define GRIDNAV_EXPLORE_HPP

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "gridnav/controller.hpp"
#include "gridnav/env.hpp"
#include "gridnav/episode.hpp"
#include "gridnav/error.hpp"
#include "gridnav/planner.hpp"

namespace gridnav {

inline constexpr double kScoreLambda = 0.7;
inline constexpr double kNmsRadius = 1.0;  // meters between the two selected waypoints

struct ScoredPoint {
    Point point{};
    double spaciousness = 0.0;  // in [0, 1]
    double closeness = 0.0;
    double score = 0.0;         // spaciousness + lambda * closeness
};

// Scores a candidate waypoint: spaciousness is the clearance to the obstacle
// boundary normalized by the farthest boundary point, closeness rewards
// proximity to the designated target normalized by the start-to-target
// spread. All distances are Euclidean over cell centers.
inline ScoredPoint score(const GridMap& map, const Point& p, const Point& p_init,
                         const Point& p_target, double lambda = kScoreLambda) {
    Cell cp = map.cell_of(p);
    Cell ci = map.cell_of(p_init);
    if (!map.in_bounds(cp) || !map.in_bounds(ci))
        throw OutOfBoundsError("score: point outside map");
    if (!map.free(cp) || !map.free(ci))
        throw ValidationError("score: p and p_init must lie on free cells");
    bool target_ok = false;
    for (const Cell& tc : map.target_cells)
        if (tc == map.cell_of(p_target)) target_ok = true;
    if (!target_ok) throw ValidationError("score: p_target must lie on a target cell");

    std::vector<Point> boundary = boundary_points(map);
    if (boundary.empty()) throw DegenerateGeometryError("score: empty boundary set");
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (const Point& q : boundary) {
        double d = euclidean(p, q);
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    if (dmax == 0.0) throw DegenerateGeometryError("score: boundary collapses onto p");

    double denom = 0.0;
    for (const Point& g : map.targets()) denom = std::max(denom, euclidean(p_init, g));
    if (denom == 0.0) throw DegenerateGeometryError("score: start coincides with every target");

    ScoredPoint out;
    out.point = p;
    out.spaciousness = dmin / dmax;
    out.closeness = 1.0 - euclidean(p, p_target) / denom;
    out.score = out.spaciousness + lambda * out.closeness;
    return out;
}

struct Top2 {
    ScoredPoint first;
    ScoredPoint second;
    bool nms_fallback = false;  // second best taken without the separation radius
};

// Picks the two highest-scoring free-cell centers reachable from p_init.
// The runner-up must lie more than r_nms from the winner; when no candidate
// survives that radius the global second best is returned instead.
inline Top2 top2(const GridMap& map, const Point& p_init, const Point& p_target,
                 double lambda = kScoreLambda, double r_nms = kNmsRadius) {
    Cell ci = map.cell_of(p_init);
    if (!map.in_bounds(ci)) throw OutOfBoundsError("top2: p_init outside map");
    if (!map.free(ci)) throw ValidationError("top2: p_init must lie on a free cell");
    std::vector<double> reach = distance_field(map, {ci});

    std::vector<Cell> cells;
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            Cell cell{c, r};
            if (!map.free(cell)) continue;
            if (!std::isfinite(reach[map.index(cell)])) continue;
            cells.push_back(cell);
        }
    }
    // Candidate count is checked before scoring so degenerate maps surface as
    // an insufficiency, which callers degrade on, rather than a score error.
    if (cells.size() < 2)
        throw InsufficientCandidatesError("top2: fewer than two reachable free cells");

    // Row-major order with strict improvement keeps the lowest (row, col)
    // cell on ties.
    std::vector<ScoredPoint> cand;
    cand.reserve(cells.size());
    for (const Cell& cell : cells)
        cand.push_back(score(map, map.center(cell), p_init, p_target, lambda));

    size_t best = 0;
    for (size_t i = 1; i < cand.size(); ++i)
        if (cand[i].score > cand[best].score) best = i;

    Top2 out;
    out.first = cand[best];

    size_t second = cand.size();
    for (size_t i = 0; i < cand.size(); ++i) {
        if (i == best) continue;
        if (euclidean(cand[i].point, out.first.point) <= r_nms) continue;
        if (second == cand.size() || cand[i].score > cand[second].score) second = i;
    }
    if (second == cand.size()) {
        out.nms_fallback = true;
        for (size_t i = 0; i < cand.size(); ++i) {
            if (i == best) continue;
            if (second == cand.size() || cand[i].score > cand[second].score) second = i;
        }
    }
    out.second = cand[second];
    return out;
}

namespace detail {

// Replays a compiled action list from a pose, appending step records.
inline Pose append_replayed(const GridMap& map, Pose pose, const std::vector<MetaAction>& actions,
                            int action_tokens, std::vector<StepRecord>& steps) {
    for (MetaAction a : actions) {
        StepRecord r;
        r.pose = pose;
        r.action = a;
        r.mode = Mode::Fast;
        r.reasoning_tokens = 0;
        r.action_tokens = action_tokens;
        StepResult sr = step(map, pose, a);
        r.events = sr.events;
        pose = sr.pose;
        steps.push_back(std::move(r));
    }
    return pose;
}

inline std::vector<MetaAction> compile_leg(const GridMap& map, const Pose& from, const Point& to) {
    AstarResult ar = astar(map, from.point(), to);
    std::vector<Point> waypoints;
    for (size_t k = 1; k < ar.path.size(); ++k) waypoints.push_back(map.center(ar.path[k]));
    return compile_along(map, from, waypoints).actions;
}

inline double leg_cost(const GridMap& map, const Point& from, const Point& to) {
    return astar(map, from, to).cost;
}

}  // namespace detail

// Builds the scripted exploration trajectory start -> waypoint -> waypoint
// -> target, choosing whichever waypoint order gives the shorter total
// geodesic length. Legs are planned from the agent's actual pose after the
// previous leg and replayed through the environment, so the emitted episode
// is a valid closed-loop log. Falls back to the direct route when a leg is
// disconnected.
inline Episode build_exploration_trajectory(const GridMap& map, const Point& p_init,
                                            const Point& p_target,
                                            const std::string& map_ref = "",
                                            int action_tokens = kDefaultActionTokens) {
    Episode ep;
    ep.map_ref = map_ref;
    ep.goal = p_target;
    ep.flags.push_back("exploration");

    Pose pose{p_init.x, p_init.y, 0};
    std::vector<Point> route;
    bool degenerate = false;
    try {
        Top2 sel = top2(map, p_init, p_target);
        if (map.cell_of(sel.first.point) == map.cell_of(sel.second.point)) {
            degenerate = true;
            route = {sel.first.point, p_target};
        } else {
            double a = detail::leg_cost(map, p_init, sel.first.point) +
                       detail::leg_cost(map, sel.second.point, p_target);
            double b = detail::leg_cost(map, p_init, sel.second.point) +
                       detail::leg_cost(map, sel.first.point, p_target);
            if (a <= b)
                route = {sel.first.point, sel.second.point, p_target};
            else
                route = {sel.second.point, sel.first.point, p_target};
        }
    } catch (const InsufficientCandidatesError&) {
        degenerate = true;
        route = {p_target};
    }
    if (degenerate) ep.flags.push_back("degenerate_top2");

    Pose final_pose = pose;
    try {
        Pose cur = pose;
        std::vector<StepRecord> steps;
        for (const Point& leg_goal : route) {
            std::vector<MetaAction> acts = detail::compile_leg(map, cur, leg_goal);
            cur = detail::append_replayed(map, cur, acts, action_tokens, steps);
        }
        ep.steps = std::move(steps);
        final_pose = cur;
    } catch (const NoPathError&) {
        // Waypoint leg disconnected; fall back to the direct route.
        std::vector<MetaAction> acts = detail::compile_leg(map, pose, p_target);
        ep.steps.clear();
        final_pose = detail::append_replayed(map, pose, acts, action_tokens, ep.steps);
        ep.flags.push_back("direct_fallback");
    }

    // Terminal stop, priced like any logged step.
    StepRecord end_rec;
    end_rec.pose = final_pose;
    end_rec.action = MetaAction::End;
    end_rec.mode = Mode::Fast;
    end_rec.reasoning_tokens = 0;
    end_rec.action_tokens = action_tokens;
    end_rec.events = {Event::Terminated};
    ep.steps.push_back(std::move(end_rec));

    double d = geodesic_distance_to_targets(map, final_pose.point());
    ep.outcome = d <= kSuccessRadius ? Outcome::Success : Outcome::Misidentification;
    return ep;
}

}  // namespace gridnav

#endif
