#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gridnav/gridnav.hpp"
#include "oracles.hpp"

using namespace gridnav;

namespace {
GridMap mk(const std::string& body, const std::string& res = "0.1") {
    return parse_map("resolution " + res + "\n" + body);
}

int count(const std::vector<MetaAction>& v, MetaAction a) {
    int n = 0;
    for (MetaAction x : v) n += x == a;
    return n;
}

// Compiles waypoints from a cell path the way the callers do: path centers
// after the start cell.
std::vector<Point> centers_after_start(const GridMap& m, const CellPath& path) {
    std::vector<Point> w;
    for (size_t k = 1; k < path.size(); ++k) w.push_back(m.center(path[k]));
    return w;
}
}  // namespace

TEST_CASE("astar on a single cell is free") {
    GridMap m = mk("..T\n");
    AstarResult r = astar_cells(m, Cell{0, 0}, Cell{0, 0});
    CHECK(r.cost == 0.0);
    CHECK(r.path == CellPath{Cell{0, 0}});
    CHECK(r.straight == 0);
    CHECK(r.diagonal == 0);
}

TEST_CASE("astar across an empty square runs the pure diagonal") {
    std::string row(10, '.');
    std::string body;
    for (int i = 0; i < 10; ++i) body += row + "\n";
    body[body.size() - 2] = 'T';
    GridMap m = mk(body);
    AstarResult r = astar_cells(m, Cell{0, 0}, Cell{9, 9});
    CHECK(r.straight == 0);
    CHECK(r.diagonal == 9);
    CHECK(r.cost == detail::canonical_cost(0, 9, m.resolution));
    std::vector<oracle::GridCost> ora = oracle::shortest_costs(m, Cell{0, 0});
    CHECK(r.cost == oracle::cost_value(ora[static_cast<size_t>(m.index(Cell{9, 9}))],
                                       m.resolution));
}

TEST_CASE("astar routes around a u-shaped pocket") {
    GridMap m = mk(
        ".......\n"
        ".#####.\n"
        ".#...#.\n"
        ".#.T.#.\n"
        ".#####.\n"
        ".......\n");
    // Start inside the pocket mouth? The pocket is sealed; start outside.
    CHECK_THROWS_AS(astar_cells(m, Cell{0, 0}, Cell{3, 3}), NoPathError);
    GridMap open = mk(
        ".......\n"
        ".#####.\n"
        ".#...#.\n"
        ".#.T.#.\n"
        ".##.##.\n"
        ".......\n");
    AstarResult r = astar_cells(open, Cell{0, 0}, Cell{3, 3});
    std::vector<oracle::GridCost> ora = oracle::shortest_costs(open, Cell{0, 0});
    const oracle::GridCost& oc = ora[static_cast<size_t>(open.index(Cell{3, 3}))];
    CHECK(r.straight == oc.straight);
    CHECK(r.diagonal == oc.diagonal);
    CHECK(r.cost > euclidean(open.center(Cell{0, 0}), open.center(Cell{3, 3})));
}

TEST_CASE("astar and exact relaxation agree on random instances") {
    Rng rng = make_stream(5, "instances", 0);
    for (int i = 0; i < 40; ++i) {
        GridMap m = oracle::random_map(static_cast<uint64_t>(1000 + i), 4 + rng.uniform_int(0, 20),
                                       4 + rng.uniform_int(0, 20), 0.1 + 0.3 * rng.uniform01(),
                                       0.1);
        Cell a = oracle::random_free_cell(m, rng);
        Cell b = oracle::random_free_cell(m, rng);
        std::vector<oracle::GridCost> ora = oracle::shortest_costs(m, a);
        const oracle::GridCost& oc = ora[static_cast<size_t>(m.index(b))];
        if (!oc.reached()) {
            CHECK_THROWS_AS(astar_cells(m, a, b), NoPathError);
            continue;
        }
        AstarResult r = astar_cells(m, a, b);
        CHECK(r.straight == oc.straight);
        CHECK(r.diagonal == oc.diagonal);
        CHECK(r.cost == oracle::cost_value(oc, m.resolution));
    }
}

TEST_CASE("astar rejects occupied endpoints and never cuts corners") {
    GridMap m = mk(
        ".#\n"
        "#T\n");
    CHECK_THROWS_AS(astar_cells(m, Cell{0, 0}, Cell{1, 1}), NoPathError);  // diagonal squeeze
    CHECK_THROWS_AS(astar_cells(m, Cell{1, 0}, Cell{0, 0}), NoPathError);  // occupied start
}

TEST_CASE("astar path cells are adjacent, free, and consistent with its counts") {
    GridMap m = oracle::random_map(321, 18, 18, 0.25, 0.1);
    Rng rng = make_stream(321, "pair", 0);
    for (int i = 0; i < 10; ++i) {
        Cell a = oracle::random_free_cell(m, rng);
        Cell b = oracle::random_free_cell(m, rng);
        AstarResult r;
        try {
            r = astar_cells(m, a, b);
        } catch (const NoPathError&) {
            continue;
        }
        REQUIRE(!r.path.empty());
        CHECK(r.path.front() == a);
        CHECK(r.path.back() == b);
        int s = 0, d = 0;
        for (size_t k = 1; k < r.path.size(); ++k) {
            int dc = r.path[k].col - r.path[k - 1].col;
            int dr = r.path[k].row - r.path[k - 1].row;
            CHECK(std::abs(dc) <= 1);
            CHECK(std::abs(dr) <= 1);
            CHECK((dc != 0 || dr != 0));
            CHECK(m.free(r.path[k]));
            if (dc != 0 && dr != 0) {
                ++d;
                CHECK(m.free(Cell{r.path[k - 1].col + dc, r.path[k - 1].row}));
                CHECK(m.free(Cell{r.path[k - 1].col, r.path[k - 1].row + dr}));
            } else {
                ++s;
            }
        }
        CHECK(s == r.straight);
        CHECK(d == r.diagonal);
    }
}

TEST_CASE("aligned_heading snaps bearings within fifteen degrees") {
    CHECK(aligned_heading(0.0, 0) == 0);
    CHECK(aligned_heading(14.9, 0) == 0);
    CHECK(aligned_heading(15.0, 0) == 0);    // tie: no turn beats one turn
    CHECK(aligned_heading(16.0, 0) == 30);
    CHECK(aligned_heading(-15.0, 0) == 0);
    CHECK(aligned_heading(-16.0, 0) == 330);
    CHECK(aligned_heading(180.0, 0) == 180);
    CHECK(aligned_heading(91.0, 60) == 90);
}

TEST_CASE("emit_rotations picks the short side and turns left on reversals") {
    std::vector<MetaAction> out;
    emit_rotations(0, 90, out);
    CHECK(out == std::vector<MetaAction>(3, MetaAction::RotateLeft));
    out.clear();
    emit_rotations(0, 270, out);
    CHECK(out == std::vector<MetaAction>(3, MetaAction::RotateRight));
    out.clear();
    emit_rotations(30, 210, out);
    CHECK(out == std::vector<MetaAction>(6, MetaAction::RotateLeft));
    out.clear();
    emit_rotations(120, 120, out);
    CHECK(out.empty());
}

TEST_CASE("a one-meter aligned corridor compiles to four forward steps") {
    std::string body(13, '.');
    body[12] = 'T';
    GridMap m = mk(body + "\n");
    Pose start{0.15, 0.05, 0};
    std::vector<Point> waypoints;
    for (int c = 2; c <= 11; ++c) waypoints.push_back(m.center(Cell{c, 0}));
    CompileResult r = compile_along(m, start, waypoints);
    CHECK(r.actions == std::vector<MetaAction>(4, MetaAction::MoveAhead));
    CHECK(r.end_pose.heading == 0);
    CHECK(r.end_pose.x == doctest::Approx(1.15).epsilon(1e-12));
    CHECK(r.end_pose.y == 0.05);
    for (double d : r.visit_dists) CHECK(d <= 0.5 * m.resolution + 1e-9);
    CHECK(r.replans == 0);
}

TEST_CASE("a waypoint straight behind costs six left rotations") {
    std::string body(13, '.');
    body[0] = 'T';
    GridMap m = mk(body + "\n");
    Pose start{1.15, 0.05, 0};
    std::vector<Point> waypoints;
    for (int c = 9; c >= 1; --c) waypoints.push_back(m.center(Cell{c, 0}));
    CompileResult r = compile_along(m, start, waypoints);
    REQUIRE(r.actions.size() >= 6);
    for (int i = 0; i < 6; ++i) CHECK(r.actions[static_cast<size_t>(i)] == MetaAction::RotateLeft);
    CHECK(count(r.actions, MetaAction::MoveAhead) == 4);
    CHECK(r.end_pose.heading == 180);
}

TEST_CASE("compiled routes contain motor actions only") {
    GridMap m = oracle::random_map(7, 20, 20, 0.2, 0.5);
    Rng rng = make_stream(7, "route", 0);
    for (int i = 0; i < 5; ++i) {
        Cell a = oracle::random_free_cell(m, rng);
        Cell b = oracle::random_free_cell(m, rng);
        AstarResult ar;
        try {
            ar = astar_cells(m, a, b);
        } catch (const NoPathError&) {
            continue;
        }
        Point ap = m.center(a);
        CompileResult r = compile_along(m, Pose{ap.x, ap.y, 0}, centers_after_start(m, ar.path));
        for (MetaAction act : r.actions) CHECK(is_motor(act));
    }
}

TEST_CASE("closed-loop replay of compiled routes is collision-free and on target") {
    int compiled = 0;
    for (uint64_t seed = 60; seed < 72; ++seed) {
        MapGenSpec spec;
        spec.seed = seed;
        spec.min_geodesic = 4.0;
        GridMap m;
        try {
            m = generate_map(spec);
        } catch (const GenerationExhaustedError&) {
            continue;
        }
        Point start = m.center(m.start_cells.front());
        Point goal = m.targets().front();
        AstarResult ar = astar(m, start, goal);
        CompileResult r =
            compile_along(m, Pose{start.x, start.y, 0}, centers_after_start(m, ar.path));
        ++compiled;

        Pose pose{start.x, start.y, 0};
        for (MetaAction a : r.actions) {
            StepResult sr = step(m, pose, a);
            for (Event e : sr.events) CHECK(e != Event::Collision);
            pose = sr.pose;
        }
        CHECK(pose == r.end_pose);
        CHECK(euclidean(pose.point(), goal) <= kWaypointRadius + 1e-9);
        // 0.5 m cells: the capture ring lies inside the half-cell visit bound
        for (double d : r.visit_dists) CHECK(d <= 0.5 * m.resolution + 1e-9);
    }
    CHECK(compiled >= 8);
}

TEST_CASE("optimal_time walks the straight line and stops") {
    std::string body(8, '.');
    body[5] = 'T';
    GridMap m = mk(body + "\n");
    // Start two strides short of the target center, already aligned.
    CHECK(optimal_time(m, Point{0.05, 0.05}) == doctest::Approx(2.1).epsilon(1e-12));
    // Start on the target cell: only the stop action remains.
    CHECK(optimal_time(m, Point{0.55, 0.05}) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("optimal_time picks the nearer of two targets") {
    GridMap m = mk("T.........T\n", "0.5");
    double t = optimal_time(m, Point{1.25, 0.25});  // two cells from the left target
    GridMap left = m, right = m;
    left.target_cells = {Cell{0, 0}};
    right.target_cells = {Cell{10, 0}};
    CHECK(t == optimal_time(left, Point{1.25, 0.25}));
    CHECK(optimal_time(left, Point{1.25, 0.25}) < optimal_time(right, Point{1.25, 0.25}));
}

TEST_CASE("removing a target never speeds up the optimum") {
    for (uint64_t seed = 80; seed < 86; ++seed) {
        MapGenSpec spec;
        spec.seed = seed;
        spec.n_targets = 3;
        spec.min_geodesic = 2.0;
        GridMap m;
        try {
            m = generate_map(spec);
        } catch (const GenerationExhaustedError&) {
            continue;
        }
        Point start = m.center(m.start_cells.front());
        double all = optimal_time(m, start);
        for (size_t k = 0; k < m.target_cells.size(); ++k) {
            GridMap sub = m;
            sub.target_cells.erase(sub.target_cells.begin() + static_cast<long>(k));
            double t;
            try {
                t = optimal_time(sub, start);
            } catch (const NoPathError&) {
                continue;
            }
            CHECK(all <= t + 1e-12);
        }
    }
}

TEST_CASE("optimal_time reports unreachable targets") {
    GridMap m = mk(
        "..#T\n"
        "..#.\n");
    CHECK_THROWS_AS(optimal_time(m, Point{0.05, 0.05}), NoPathError);
}
