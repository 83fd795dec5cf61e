#include <doctest.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridnav/gridnav.hpp"
#include "oracles.hpp"

using namespace gridnav;

namespace {
GridMap corridor(int n) {
    std::string body = "T" + std::string(static_cast<size_t>(n - 1), '.') + "\n";
    return parse_map("resolution 0.5\n" + body);
}

std::vector<Point> stationary_trace(const Point& p, int n) {
    return std::vector<Point>(static_cast<size_t>(n), p);
}

bool has_event(const StepRecord& s, Event e) {
    for (Event x : s.events)
        if (x == e) return true;
    return false;
}

bool has_flag(const Episode& ep, const std::string& f) {
    for (const std::string& s : ep.flags)
        if (s == f) return true;
    return false;
}

// Hand-builds a replayable episode by driving the environment with a script.
Episode scripted_episode(const GridMap& m, Pose pose, const std::vector<MetaAction>& script) {
    Episode ep;
    ep.map_ref = "scripted";
    ep.goal = m.targets().front();
    for (MetaAction a : script) {
        StepRecord r;
        r.pose = pose;
        r.action = a;
        r.mode = Mode::Fast;
        StepResult sr = step(m, pose, a);
        r.events = sr.events;
        pose = sr.pose;
        ep.steps.push_back(std::move(r));
    }
    ep.outcome = ep.ended() ? Outcome::Misidentification : Outcome::Timeout;
    return ep;
}
}  // namespace

TEST_CASE("staying put trips the revisit detector exactly at the window edge") {
    StagnationConfig cfg;
    std::vector<Point> trace = stationary_trace(Point{3.0, 3.0}, 21);
    auto hit = detect_repetitive(trace, 20, cfg);
    REQUIRE(hit.has_value());
    CHECK(hit->t == 20);
    CHECK(hit->kind == StagnationKind::Repetitive);
    CHECK(hit->witness == 0);
    CHECK_FALSE(detect_repetitive(trace, 19, cfg).has_value());
}

TEST_CASE("a straight walk never looks repetitive") {
    StagnationConfig cfg;
    std::vector<Point> trace;
    for (int i = 0; i < 60; ++i) trace.push_back(Point{0.25 * i, 1.0});
    for (int t = 0; t < 60; ++t) CHECK_FALSE(detect_repetitive(trace, t, cfg).has_value());
}

TEST_CASE("the revisit radius is inclusive") {
    StagnationConfig cfg;
    cfg.t_stag = 1;
    std::vector<Point> at = {Point{0.0, 0.0}, Point{cfg.delta_stag, 0.0}};
    CHECK(detect_repetitive(at, 1, cfg).has_value());
    std::vector<Point> beyond = {Point{0.0, 0.0}, Point{cfg.delta_stag + 1e-7, 0.0}};
    CHECK_FALSE(detect_repetitive(beyond, 1, cfg).has_value());
}

TEST_CASE("revisit detection matches a quadratic scan on random walks") {
    for (uint64_t seed = 500; seed < 540; ++seed) {
        Rng rng = make_stream(seed, "walk", 0);
        std::vector<Point> trace;
        Point p{5.0, 5.0};
        for (int i = 0; i < 45; ++i) {
            trace.push_back(p);
            int dir = rng.uniform_int(0, 4);
            if (dir == 0) p.x += 0.25;
            if (dir == 1) p.x -= 0.25;
            if (dir == 2) p.y += 0.25;
            if (dir == 3) p.y -= 0.25;
        }
        StagnationConfig cfg;
        cfg.t_stag = 1 + static_cast<int>(seed % 9);
        cfg.delta_stag = (seed % 3 == 0) ? 0.3 : (seed % 3 == 1 ? 0.5 : 0.9);
        for (int t = 0; t < static_cast<int>(trace.size()); ++t) {
            auto lib = detect_repetitive(trace, t, cfg);
            auto ora = oracle::repetitive(trace, t, cfg.delta_stag, cfg.t_stag);
            CHECK(lib.has_value() == ora.has_value());
            if (lib && ora) CHECK(lib->witness == *ora);
        }
    }
}

TEST_CASE("detector step indices are validated") {
    StagnationConfig cfg;
    std::vector<Point> trace = stationary_trace(Point{1.0, 1.0}, 5);
    CHECK_THROWS_AS(detect_repetitive(trace, -1, cfg), ValidationError);
    CHECK_THROWS_AS(detect_repetitive(trace, 5, cfg), ValidationError);
    GridMap m = corridor(10);
    std::vector<double> field = target_distance_field(m);
    Rng rng = make_stream(1, "np", 0);
    CHECK_THROWS_AS(detect_no_progress(trace, -1, m, field, cfg, rng), ValidationError);
    CHECK_THROWS_AS(detect_no_progress(trace, 5, m, field, cfg, rng), ValidationError);
}

TEST_CASE("monotone approach never counts as lack of progress") {
    GridMap m = corridor(40);
    std::vector<double> field = target_distance_field(m);
    std::vector<Point> trace;
    for (int c = 39; c >= 0; --c) trace.push_back(m.center(Cell{c, 0}));
    StagnationConfig cfg;
    Rng rng = make_stream(2, "np", 0);
    for (int t = 0; t < static_cast<int>(trace.size()); ++t)
        CHECK_FALSE(detect_no_progress(trace, t, m, field, cfg, rng).has_value());
}

TEST_CASE("walking away fires the no-progress check") {
    GridMap m = corridor(40);
    std::vector<double> field = target_distance_field(m);
    std::vector<Point> trace;
    for (int c = 2; c < 35; ++c) trace.push_back(m.center(Cell{c, 0}));
    StagnationConfig cfg;
    Rng rng = make_stream(3, "np", 0);
    int dt = 0;
    auto hit = detect_no_progress(trace, 30, m, field, cfg, rng, &dt);
    REQUIRE(hit.has_value());
    CHECK(hit->kind == StagnationKind::NoProgress);
    CHECK(hit->t == 30);
    CHECK(hit->witness == dt);
    CHECK(dt >= cfg.dt_low);
    CHECK(dt <= 30);
}

TEST_CASE("early steps skip the draw entirely") {
    GridMap m = corridor(40);
    std::vector<double> field = target_distance_field(m);
    std::vector<Point> trace = stationary_trace(m.center(Cell{20, 0}), 30);
    StagnationConfig cfg;
    Rng rng = make_stream(4, "np", 0);
    Rng untouched = rng;
    CHECK_FALSE(detect_no_progress(trace, cfg.dt_low - 1, m, field, cfg, rng).has_value());
    CHECK(rng.next_u64() == untouched.next_u64());  // the stream was not consumed
}

TEST_CASE("the sampled window clamps to the current step") {
    GridMap m = corridor(40);
    std::vector<double> field = target_distance_field(m);
    std::vector<Point> trace = stationary_trace(m.center(Cell{20, 0}), 30);
    StagnationConfig cfg;  // window [20, 35]
    for (uint64_t s = 0; s < 20; ++s) {
        Rng rng = make_stream(s, "np", 0);
        int dt = -1;
        detect_no_progress(trace, 20, m, field, cfg, rng, &dt);
        CHECK(dt == 20);  // any draw above t collapses onto it
    }
}

TEST_CASE("the no-progress check is a pure function of the stream") {
    GridMap m = corridor(40);
    std::vector<double> field = target_distance_field(m);
    Rng walk = make_stream(7, "walk", 0);
    std::vector<Point> trace;
    int c = 20;
    for (int i = 0; i < 60; ++i) {
        trace.push_back(m.center(Cell{c, 0}));
        c += walk.uniform_int(0, 1) == 0 ? 1 : -1;
        c = std::max(1, std::min(38, c));
    }
    StagnationConfig cfg;
    Rng a = make_stream(8, "np", 0);
    Rng b = make_stream(8, "np", 0);
    Rng c_ora = make_stream(8, "np", 0);
    for (int t = 0; t < static_cast<int>(trace.size()); ++t) {
        int dt_a = -1, dt_b = -1;
        auto ra = detect_no_progress(trace, t, m, field, cfg, a, &dt_a);
        auto rb = detect_no_progress(trace, t, m, field, cfg, b, &dt_b);
        CHECK(ra.has_value() == rb.has_value());
        CHECK(dt_a == dt_b);
        oracle::NoProgressCheck ora =
            oracle::no_progress(trace, t, m, field, cfg.dt_low, cfg.dt_high, c_ora);
        CHECK(ora.drawn == (t >= cfg.dt_low));
        if (ora.drawn) CHECK(ora.dt == dt_a);
        CHECK(ora.fired == ra.has_value());
        // A recorded draw can be replayed without the stream.
        if (ora.drawn) CHECK(no_progress_fires(trace, t, m, field, ora.dt) == ora.fired);
    }
}

TEST_CASE("replaying a window outside the valid range never fires") {
    GridMap m = corridor(10);
    std::vector<double> field = target_distance_field(m);
    std::vector<Point> trace = stationary_trace(m.center(Cell{5, 0}), 10);
    CHECK_FALSE(no_progress_fires(trace, 5, m, field, 0));
    CHECK_FALSE(no_progress_fires(trace, 5, m, field, 6));
    CHECK(no_progress_fires(trace, 5, m, field, 5) == false);  // equal distances
}

TEST_CASE("stagnation config bounds are validated") {
    StagnationConfig cfg;
    cfg.dt_low = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.dt_high = cfg.dt_low - 1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.t_stag = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.delta_stag = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("an oscillating policy draws detector observations") {
    MapGenSpec spec;
    spec.seed = 403;
    spec.min_geodesic = 6.0;
    GridMap m = generate_map(spec);
    EpisodeSetup setup;
    setup.map_ref = "stuck";
    setup.start = Pose{m.center(m.start_cells.front()).x, m.center(m.start_cells.front()).y, 0};
    setup.goal = m.targets().front();
    setup.seed = 17;
    StuckPolicy policy;
    StubReasoner reasoner;
    Episode ep = rollout_with_stagnation(m, setup, policy, reasoner, {}, {});

    CHECK(ep.outcome == Outcome::Timeout);
    CHECK(ep.steps.size() == 200);
    int detector_obs = 0;
    for (size_t i = 0; i < ep.steps.size(); ++i) {
        const StepRecord& s = ep.steps[i];
        bool marked = has_event(s, Event::StagRepetitive) || has_event(s, Event::StagNoProgress);
        if (marked) {
            ++detector_obs;
            CHECK(s.action == MetaAction::Obs);
            // One fast step must elapse after an observation before the
            // detectors re-arm.
            REQUIRE(i > 0);
            CHECK(ep.steps[i - 1].action != MetaAction::Obs);
        }
        if (has_event(s, Event::StagNoProgress)) CHECK(s.dt_sample.has_value());
        if (s.dt_sample) {
            CHECK(static_cast<int>(i) >= 20);
            CHECK(*s.dt_sample >= 20);
            CHECK(*s.dt_sample <= std::min<int>(35, static_cast<int>(i)));
        }
    }
    CHECK(detector_obs > 0);

    // Same inputs, same log.
    StuckPolicy policy2;
    StubReasoner reasoner2;
    Episode again = rollout_with_stagnation(m, setup, policy2, reasoner2, {}, {});
    CHECK(episode_to_json(again).dump() == episode_to_json(ep).dump());
}

TEST_CASE("a clean straight run never wakes the detectors") {
    GridMap m = corridor(30);
    EpisodeSetup setup;
    setup.map_ref = "clean";
    setup.start = Pose{m.center(Cell{29, 0}).x, m.center(Cell{29, 0}).y, 180};
    setup.goal = m.targets().front();
    OraclePolicy policy;
    StubReasoner reasoner;
    Episode ep = rollout_with_stagnation(m, setup, policy, reasoner, {}, {});
    CHECK(ep.outcome == Outcome::Success);
    for (const StepRecord& s : ep.steps) {
        CHECK_FALSE(has_event(s, Event::StagRepetitive));
        CHECK_FALSE(has_event(s, Event::StagNoProgress));
    }

    OraclePolicy plain_policy;
    StubReasoner plain_reasoner;
    Episode plain = run_episode(m, setup, plain_policy, plain_reasoner, {});
    CHECK(ep.actions() == plain.actions());
    CHECK(plain.outcome == Outcome::Success);
}

TEST_CASE("outcomes are recomputable from the log") {
    GridMap m = corridor(20);
    Pose near{m.center(Cell{1, 0}).x, m.center(Cell{1, 0}).y, 0};
    Episode ok = scripted_episode(m, near, {MetaAction::End});
    CHECK(classify_failure(ok, m) == Outcome::Success);
    Pose far{m.center(Cell{15, 0}).x, m.center(Cell{15, 0}).y, 0};
    Episode misid = scripted_episode(m, far, {MetaAction::End});
    CHECK(classify_failure(misid, m) == Outcome::Misidentification);
    Episode open = scripted_episode(m, far, {MetaAction::RotateLeft});
    CHECK(classify_failure(open, m) == Outcome::Timeout);
}

TEST_CASE("a wrong stop is intervened at the stop itself") {
    GridMap m = corridor(20);
    Pose far{m.center(Cell{15, 0}).x, m.center(Cell{15, 0}).y, 0};
    Episode misid = scripted_episode(
        m, far, {MetaAction::MoveAhead, MetaAction::MoveAhead, MetaAction::End});
    InterventionPoint ip = find_intervention(misid, m);
    CHECK(ip.t_star == 2);
    CHECK_FALSE(ip.fallback);
    CHECK_THROWS_AS(find_intervention(Episode{}, m), ValidationError);
}

TEST_CASE("timeouts are intervened at the stagnation point nearest the target") {
    GridMap m = corridor(30);
    // Thirty steps idling far out, then fifteen idling closer in. Only the
    // far block is long enough for within-block revisits, so every stagnation
    // point ties at the far distance and the earliest one wins.
    Episode ep;
    ep.map_ref = "hand";
    ep.goal = m.targets().front();
    for (int i = 0; i < 45; ++i) {
        StepRecord r;
        r.pose = i < 30 ? Pose{m.center(Cell{16, 0}).x, 0.25, 0}
                        : Pose{m.center(Cell{4, 0}).x, 0.25, 0};
        r.action = MetaAction::RotateLeft;
        ep.steps.push_back(r);
    }
    InterventionPoint ip = find_intervention(ep, m);
    CHECK(ip.t_star == 20);
    CHECK_FALSE(ip.fallback);
}

TEST_CASE("recorded no-progress draws steer the intervention point") {
    GridMap m = parse_map(
        "resolution 0.5\n"
        "T....................\n"
        ".....................\n"
        ".....................\n");
    // Approach on row 0, retreat on row 2: no two poses ever come within the
    // revisit radius, so the single recorded draw is the only stagnation
    // evidence.
    Episode ep;
    ep.map_ref = "hand";
    ep.goal = m.targets().front();
    for (int c = 20; c >= 2; --c) {
        StepRecord r;
        r.pose = Pose{m.center(Cell{c, 0}).x, m.center(Cell{c, 0}).y, 180};
        r.action = MetaAction::MoveAhead;
        ep.steps.push_back(r);
    }
    for (int c = 2; c <= 20; ++c) {
        StepRecord r;
        r.pose = Pose{m.center(Cell{c, 2}).x, m.center(Cell{c, 2}).y, 0};
        r.action = MetaAction::MoveAhead;
        ep.steps.push_back(r);
    }
    REQUIRE(ep.steps.size() == 38);
    std::vector<Point> trace;
    for (const StepRecord& s : ep.steps) trace.push_back(s.pose.point());
    for (int t = 0; t < 38; ++t)
        REQUIRE_FALSE(detect_repetitive(trace, t, StagnationConfig{}).has_value());

    ep.steps[30].dt_sample = 20;  // retreat pose vs approach pose: regression
    InterventionPoint ip = find_intervention(ep, m);
    CHECK(ip.t_star == 30);
    CHECK_FALSE(ip.fallback);

    // A recorded window larger than the step index is ignored.
    ep.steps[30].dt_sample = std::nullopt;
    ep.steps[10].dt_sample = 15;
    InterventionPoint fb = find_intervention(ep, m);
    CHECK(fb.fallback);
    CHECK(fb.t_star == 18);  // deepest point of the approach leg
}

TEST_CASE("a timeout without stagnation falls back to the closest pose") {
    GridMap m = corridor(30);
    Episode ep;
    ep.map_ref = "hand";
    ep.goal = m.targets().front();
    for (int c = 25; c >= 10; --c) {
        StepRecord r;
        r.pose = Pose{m.center(Cell{c, 0}).x, 0.25, 180};
        r.action = MetaAction::MoveAhead;
        ep.steps.push_back(r);
    }
    InterventionPoint ip = find_intervention(ep, m);
    CHECK(ip.fallback);
    CHECK(ip.t_star == static_cast<int>(ep.steps.size()) - 1);  // strictly closing in
}

TEST_CASE("successful episodes are kept verbatim") {
    MapGenSpec spec;
    spec.seed = 404;
    spec.min_geodesic = 5.0;
    GridMap m = generate_map(spec);
    EpisodeSetup setup;
    setup.map_ref = "keep";
    setup.start = Pose{m.center(m.start_cells.front()).x, m.center(m.start_cells.front()).y, 0};
    setup.goal = m.targets().front();
    OraclePolicy policy;
    StubReasoner reasoner;
    Episode ep = run_episode(m, setup, policy, reasoner, {});
    REQUIRE(ep.outcome == Outcome::Success);

    Episode out;
    RepairOutcome rc = repair(ep, m, reasoner, &out);
    CHECK(rc.variant == RepairVariant::KeptAsIs);
    CHECK(episode_to_json(out).dump() == episode_to_json(ep).dump());
}

TEST_CASE("a wrong stop is repaired into a success") {
    GridMap m = corridor(20);
    Pose start{m.center(Cell{10, 0}).x, m.center(Cell{10, 0}).y, 0};
    std::vector<MetaAction> script(5, MetaAction::MoveAhead);
    script.push_back(MetaAction::End);
    Episode ep = scripted_episode(m, start, script);
    REQUIRE(classify_failure(ep, m) == Outcome::Misidentification);

    StubReasoner reasoner;
    Episode out;
    RepairOutcome rc = repair(ep, m, reasoner, &out);
    REQUIRE(rc.variant == RepairVariant::Repaired);
    CHECK(rc.t_star == 5);
    CHECK_FALSE(rc.fallback_t_star);

    for (int i = 0; i < rc.t_star; ++i)
        CHECK(step_to_json(out.steps[static_cast<size_t>(i)]).dump() ==
              step_to_json(ep.steps[static_cast<size_t>(i)]).dump());
    const StepRecord& obs = out.steps[static_cast<size_t>(rc.t_star)];
    CHECK(obs.action == MetaAction::Obs);
    CHECK(obs.pose.x == ep.steps[5].pose.x);
    CHECK(obs.pose.y == ep.steps[5].pose.y);
    CHECK(obs.reasoning_tokens == 0);
    REQUIRE(obs.events.size() == 1);
    CHECK(obs.events[0] == Event::ObsRequested);

    CHECK(out.outcome == Outcome::Success);
    CHECK(out.ended());
    CHECK(has_flag(out, "repaired"));
    CHECK(static_cast<int>(out.steps.size()) <= kRepairMaxSteps);
    CHECK(geodesic_distance_to_targets(m, out.final_pose().point()) <= kSuccessRadius);
    CHECK(rc.spliced_length ==
          static_cast<int>(out.steps.size()) - rc.t_star - 1);
    CHECK(classify_failure(out, m) == Outcome::Success);
}

TEST_CASE("repairs that would overrun the length budget are dropped") {
    GridMap m = corridor(20);
    Pose start{m.center(Cell{4, 0}).x, m.center(Cell{4, 0}).y, 0};
    std::vector<MetaAction> script(395, MetaAction::RotateLeft);
    script.push_back(MetaAction::End);
    Episode ep = scripted_episode(m, start, script);
    REQUIRE(classify_failure(ep, m) == Outcome::Misidentification);

    StubReasoner reasoner;
    Episode out;
    RepairOutcome rc = repair(ep, m, reasoner, &out);
    CHECK(rc.variant == RepairVariant::Dropped);
    CHECK(rc.drop_reason == "length");
}

TEST_CASE("interventions sealed away from every target are dropped") {
    GridMap m = parse_map(
        "resolution 0.5\n"
        ".#T\n");
    Episode ep;
    ep.map_ref = "island";
    ep.goal = m.targets().front();
    StepRecord r;
    r.pose = Pose{m.center(Cell{0, 0}).x, m.center(Cell{0, 0}).y, 0};
    r.action = MetaAction::End;
    ep.steps.push_back(r);
    ep.outcome = Outcome::Misidentification;

    StubReasoner reasoner;
    RepairOutcome rc = repair(ep, m, reasoner, nullptr);
    CHECK(rc.variant == RepairVariant::Dropped);
    CHECK(rc.drop_reason == "disconnected");

    RepairOutcome empty = repair(Episode{}, m, reasoner, nullptr);
    CHECK(empty.variant == RepairVariant::Dropped);
    CHECK(empty.drop_reason == "splice-failure");
}

TEST_CASE("a collect-and-repair round keeps successes and repairs failures") {
    MapGenSpec spec;
    spec.min_geodesic = 5.0;
    spec.seed = 401;
    GridMap m1 = generate_map(spec);
    spec.seed = 402;
    GridMap m2 = generate_map(spec);

    std::vector<RolloutJob> jobs;
    auto add = [&](const GridMap& m, const std::string& kind, uint64_t seed) {
        RolloutJob job;
        job.map = &m;
        job.setup.map_ref = kind;
        job.setup.start =
            Pose{m.center(m.start_cells.front()).x, m.center(m.start_cells.front()).y, 0};
        job.setup.goal = m.targets().front();
        job.setup.seed = seed;
        jobs.push_back(job);
    };
    add(m1, "oracle", 1);
    add(m1, "stuck", 2);
    add(m2, "oracle", 3);
    add(m2, "stuck", 4);

    PolicyFactory make_policy = [](const EpisodeSetup& s) -> std::unique_ptr<Policy> {
        if (s.map_ref == "stuck") return std::make_unique<StuckPolicy>();
        return std::make_unique<OraclePolicy>();
    };
    ReasonerFactory make_reasoner = [](const EpisodeSetup&) -> std::unique_ptr<Reasoner> {
        return std::make_unique<StubReasoner>();
    };

    RoundReport report;
    std::vector<Episode> out = irft_round(jobs, make_policy, make_reasoner, {}, {}, &report);
    CHECK(report.total == 4);
    CHECK(report.kept == 2);
    CHECK(report.repaired == 2);
    CHECK(report.dropped_length + report.dropped_splice + report.dropped_disconnected == 0);
    CHECK(report.emitted() == static_cast<int>(out.size()));
    int repaired_flags = 0;
    for (const Episode& ep : out)
        if (has_flag(ep, "repaired")) ++repaired_flags;
    CHECK(repaired_flags == 2);

    RoundReport again_report;
    std::vector<Episode> again = irft_round(jobs, make_policy, make_reasoner, {}, {}, &again_report);
    REQUIRE(again.size() == out.size());
    for (size_t i = 0; i < out.size(); ++i)
        CHECK(episode_to_json(again[i]).dump() == episode_to_json(out[i]).dump());
    CHECK(again_report.kept == report.kept);
    CHECK(again_report.repaired == report.repaired);
}
