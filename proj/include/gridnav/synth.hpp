#ifndef GRIDNAV_SYNTH_HPP
#define GRIDNAV_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridnav/controller.hpp"
#include "gridnav/env.hpp"
#include "gridnav/episode.hpp"
#include "gridnav/error.hpp"

namespace gridnav {

inline constexpr int kRepairMaxSteps = 400;  // repaired trajectories longer than this are dropped

struct StagnationConfig {
    int t_stag = 20;          // steps; revisit window for the repetitive detector
    double delta_stag = 0.5;  // meters; revisit radius
    int dt_low = 20;          // no-progress lookback window, inclusive bounds
    int dt_high = 35;
    uint64_t seed = 0;

    void validate() const {
        if (dt_low < 1) throw ValidationError("dt_low must be >= 1");
        if (dt_high < dt_low) throw ValidationError("dt_high must be >= dt_low");
        if (t_stag < 1) throw ValidationError("t_stag must be >= 1");
        if (delta_stag < 0.0) throw ValidationError("delta_stag must be >= 0");
    }
};

enum class StagnationKind { Repetitive, NoProgress };

struct StagnationEvent {
    int t = 0;
    StagnationKind kind = StagnationKind::Repetitive;
    // Repetitive: the smallest matching step k. NoProgress: the sampled dt.
    int witness = 0;
};

// Fires when the position at step t lies within delta_stag of a position
// from at least t_stag steps earlier. Witness is the smallest such step.
inline std::optional<StagnationEvent> detect_repetitive(const std::vector<Point>& trace, int t,
                                                        const StagnationConfig& cfg) {
    if (t < 0 || t >= static_cast<int>(trace.size()))
        throw ValidationError("detect_repetitive: step index outside trace");
    for (int k = 0; k <= t - cfg.t_stag; ++k) {
        if (euclidean(trace[t], trace[k]) <= cfg.delta_stag)
            return StagnationEvent{t, StagnationKind::Repetitive, k};
    }
    return std::nullopt;
}

// Fires when the geodesic target distance at step t exceeds the distance
// dt steps earlier, with dt drawn uniformly from [dt_low, dt_high] (clamped
// to t) out of the provided stream. The draw happens on every call; the
// sampled dt is reported through dt_out even when nothing fires.
inline std::optional<StagnationEvent> detect_no_progress(const std::vector<Point>& trace, int t,
                                                         const GridMap& map,
                                                         const std::vector<double>& target_field,
                                                         const StagnationConfig& cfg, Rng& rng,
                                                         int* dt_out = nullptr) {
    if (t < 0 || t >= static_cast<int>(trace.size()))
        throw ValidationError("detect_no_progress: step index outside trace");
    if (t < cfg.dt_low) return std::nullopt;
    int dt = rng.uniform_int(cfg.dt_low, cfg.dt_high);
    if (dt > t) dt = t;
    if (dt_out) *dt_out = dt;
    double now = field_distance(map, target_field, trace[t]);
    double then = field_distance(map, target_field, trace[static_cast<size_t>(t - dt)]);
    if (now > then) return StagnationEvent{t, StagnationKind::NoProgress, dt};
    return std::nullopt;
}

inline std::optional<StagnationEvent> detect_no_progress(const std::vector<Point>& trace, int t,
                                                         const GridMap& map,
                                                         const StagnationConfig& cfg, Rng& rng,
                                                         int* dt_out = nullptr) {
    std::vector<double> field = target_distance_field(map);
    return detect_no_progress(trace, t, map, field, cfg, rng, dt_out);
}

// Deterministic re-evaluation of a recorded no-progress check: same formula,
// recorded dt instead of a fresh draw.
inline bool no_progress_fires(const std::vector<Point>& trace, int t, const GridMap& map,
                              const std::vector<double>& target_field, int dt) {
    if (dt < 1 || dt > t) return false;
    double now = field_distance(map, target_field, trace[static_cast<size_t>(t)]);
    double then = field_distance(map, target_field, trace[static_cast<size_t>(t - dt)]);
    return now > then;
}

// Runs one episode with both stagnation detectors armed at fast decision
// points. A firing overrides the next decision with Obs; one fast step must
// elapse after any Obs before the detectors re-arm.
inline Episode rollout_with_stagnation(const GridMap& map, const EpisodeSetup& setup,
                                       Policy& policy, Reasoner& reasoner, const RunConfig& run_cfg,
                                       const StagnationConfig& stag_cfg) {
    stag_cfg.validate();
    std::vector<double> field = target_distance_field(map);
    // Detector draws come from a per-episode stream so post-hoc re-scans and
    // reruns see the same dt sequence.
    uint64_t base =
        stag_cfg.seed == 0 ? setup.seed : derive_seed(stag_cfg.seed, "episode", setup.seed);
    Rng rng = make_stream(base, "stagnation", 0);

    detail::FastCheckFn check = [&](const std::vector<StepRecord>& steps, const Pose& pose,
                                    bool cooldown) {
        detail::FastCheck chk;
        if (cooldown) return chk;
        std::vector<Point> trace;
        trace.reserve(steps.size() + 1);
        for (const StepRecord& s : steps) trace.push_back(s.pose.point());
        trace.push_back(pose.point());
        int t = static_cast<int>(trace.size()) - 1;
        std::optional<StagnationEvent> rep = detect_repetitive(trace, t, stag_cfg);
        int dt = 0;
        std::optional<StagnationEvent> nop =
            detect_no_progress(trace, t, map, field, stag_cfg, rng, &dt);
        if (t >= stag_cfg.dt_low) chk.dt_sample = dt;
        if (rep) chk.events.push_back(Event::StagRepetitive);
        if (nop) chk.events.push_back(Event::StagNoProgress);
        chk.force_obs = rep.has_value() || nop.has_value();
        return chk;
    };
    return detail::run_episode_impl(map, setup, policy, reasoner, run_cfg, check);
}

// Recomputes the outcome of a finished episode from its log.
inline Outcome classify_failure(const Episode& ep, const GridMap& map,
                                double delta_success = kSuccessRadius) {
    if (!ep.ended()) return Outcome::Timeout;
    double d = geodesic_distance_to_targets(map, ep.final_pose().point());
    return d <= delta_success ? Outcome::Success : Outcome::Misidentification;
}

struct InterventionPoint {
    int t_star = 0;
    bool fallback = false;  // true when a timeout trace had no stagnation points
};

// Chooses the step whose action the repair pass will replace with Obs.
// Misidentification: the End step itself. Timeout: the stagnation point
// closest to the target, re-detected from the recorded poses and dt samples;
// with none, the globally closest step (flagged).
inline InterventionPoint find_intervention(const Episode& ep, const GridMap& map,
                                           const StagnationConfig& cfg = {}) {
    if (ep.steps.empty()) throw ValidationError("find_intervention: empty episode");
    std::vector<double> field = target_distance_field(map);
    if (ep.ended()) return InterventionPoint{static_cast<int>(ep.steps.size()) - 1, false};

    std::vector<Point> trace;
    trace.reserve(ep.steps.size());
    for (const StepRecord& s : ep.steps) trace.push_back(s.pose.point());

    int best = -1;
    double best_d = 0.0;
    for (int t = 0; t < static_cast<int>(trace.size()); ++t) {
        bool stagnant = detect_repetitive(trace, t, cfg).has_value();
        if (!stagnant && ep.steps[static_cast<size_t>(t)].dt_sample)
            stagnant = no_progress_fires(trace, t, map, field,
                                         *ep.steps[static_cast<size_t>(t)].dt_sample);
        if (!stagnant) continue;
        double d = field_distance(map, field, trace[static_cast<size_t>(t)]);
        if (best < 0 || d < best_d) {
            best = t;
            best_d = d;
        }
    }
    if (best >= 0) return InterventionPoint{best, false};

    for (int t = 0; t < static_cast<int>(trace.size()); ++t) {
        double d = field_distance(map, field, trace[static_cast<size_t>(t)]);
        if (best < 0 || d < best_d) {
            best = t;
            best_d = d;
        }
    }
    return InterventionPoint{best, true};
}

enum class RepairVariant { KeptAsIs, Repaired, Dropped };

struct RepairOutcome {
    RepairVariant variant = RepairVariant::Dropped;
    int t_star = -1;
    int spliced_length = 0;
    std::string drop_reason;  // "length", "splice-failure", "disconnected"
    bool fallback_t_star = false;
};

namespace detail {

// Rebuilds the landmark memory a live agent would hold after executing the
// given prefix, so the repair-time reasoner sees the same context.
inline MemoryGraph memory_from_prefix(const std::vector<StepRecord>& steps, int max_landmarks) {
    MemoryGraph mem;
    mem.max_landmarks = max_landmarks;
    std::vector<MetaAction> since;
    for (size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].action == MetaAction::Obs) {
            Landmark lm;
            lm.id = static_cast<int>(mem.landmarks.size());
            lm.pose = steps[i].pose;
            lm.step_index = static_cast<int>(i);
            append_landmark(mem, lm, since);
            since.clear();
        } else if (is_motor(steps[i].action)) {
            since.push_back(steps[i].action);
        }
    }
    return mem;
}

}  // namespace detail

// Truncates a failed episode at the intervention point, substitutes the
// erroneous action with Obs, and splices a compiled shortest path to the
// nearest target plus End. The prefix before the intervention is preserved
// byte for byte; the splice is replayed through the environment before the
// repaired episode is accepted.
inline RepairOutcome repair(const Episode& ep, const GridMap& map, Reasoner& reasoner,
                            Episode* out, const StagnationConfig& cfg = {},
                            const RunConfig& run_cfg = {}) {
    RepairOutcome rc;
    if (ep.steps.empty()) {
        rc.drop_reason = "splice-failure";
        return rc;
    }
    if (classify_failure(ep, map, run_cfg.success_radius) == Outcome::Success) {
        rc.variant = RepairVariant::KeptAsIs;
        if (out) *out = ep;
        return rc;
    }

    InterventionPoint ip = find_intervention(ep, map, cfg);
    rc.t_star = ip.t_star;
    rc.fallback_t_star = ip.fallback;

    Episode rep;
    rep.schema = ep.schema;
    rep.map_ref = ep.map_ref;
    rep.seed = ep.seed;
    rep.goal = ep.goal;
    rep.steps.assign(ep.steps.begin(), ep.steps.begin() + ip.t_star);

    const StepRecord& orig = ep.steps[static_cast<size_t>(ip.t_star)];
    Pose pose = orig.pose;
    int action_tokens = orig.action_tokens;

    StepRecord obs_rec;
    obs_rec.pose = pose;
    obs_rec.action = MetaAction::Obs;
    obs_rec.mode = orig.mode;
    obs_rec.reasoning_tokens = 0;
    obs_rec.action_tokens = action_tokens;
    obs_rec.events = {Event::ObsRequested};
    rep.steps.push_back(obs_rec);

    // Corrective leg to the geodesically nearest target.
    std::vector<double> from_here = distance_field(map, {map.cell_of(pose.point())});
    Point goal_pt{};
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& tc : map.target_cells) {
        double d = from_here[map.index(tc)];
        if (d < best) {
            best = d;
            goal_pt = map.center(tc);
        }
    }
    if (!std::isfinite(best)) {
        rc.drop_reason = "disconnected";
        return rc;
    }

    std::vector<MetaAction> corrective;
    try {
        AstarResult ar = astar(map, pose.point(), goal_pt);
        std::vector<Point> waypoints;
        for (size_t k = 1; k < ar.path.size(); ++k) waypoints.push_back(map.center(ar.path[k]));
        corrective = compile_along(map, pose, waypoints).actions;
    } catch (const NoPathError&) {
        rc.drop_reason = "disconnected";
        return rc;
    }
    corrective.push_back(MetaAction::End);

    MemoryGraph mem = detail::memory_from_prefix(rep.steps, run_cfg.max_landmarks);
    PanoramicScan scan = panoramic(map, pose, run_cfg.observe);
    ReasonerInput rin{map, pose, ep.goal, mem, scan, [&] { return corrective.front(); }};
    ReasonerOutput rout = reasoner.reason(rin);

    for (size_t i = 0; i < corrective.size(); ++i) {
        StepRecord r;
        r.pose = pose;
        r.action = corrective[i];
        r.mode = i == 0 ? Mode::Slow : Mode::Fast;
        r.reasoning_tokens = i == 0 ? rout.reasoning_tokens : 0;
        r.action_tokens = action_tokens;
        StepResult sr = step(map, pose, corrective[i]);
        r.events = sr.events;
        for (Event e : sr.events) {
            if (e == Event::Collision) {
                rc.drop_reason = "splice-failure";
                return rc;
            }
        }
        pose = sr.pose;
        rep.steps.push_back(std::move(r));
    }
    rc.spliced_length = static_cast<int>(corrective.size());

    if (static_cast<int>(rep.steps.size()) > kRepairMaxSteps) {
        rc.drop_reason = "length";
        return rc;
    }
    double final_d = geodesic_distance_to_targets(map, pose.point());
    if (final_d > run_cfg.success_radius) {
        rc.drop_reason = "splice-failure";
        return rc;
    }

    rep.outcome = Outcome::Success;
    rep.flags.push_back("repaired");
    if (ip.fallback) rep.flags.push_back("t_star_fallback");
    rc.variant = RepairVariant::Repaired;
    if (out) *out = std::move(rep);
    return rc;
}

using PolicyFactory = std::function<std::unique_ptr<Policy>(const EpisodeSetup&)>;
using ReasonerFactory = std::function<std::unique_ptr<Reasoner>(const EpisodeSetup&)>;

struct RolloutJob {
    const GridMap* map = nullptr;
    EpisodeSetup setup;
};

struct RoundReport {
    int total = 0;
    int kept = 0;
    int repaired = 0;
    int dropped_length = 0;
    int dropped_splice = 0;
    int dropped_disconnected = 0;

    int emitted() const { return kept + repaired; }
};

// One collect-and-repair round: roll out every job with detectors armed,
// keep successes verbatim, repair failures, drop what cannot be repaired.
inline std::vector<Episode> irft_round(const std::vector<RolloutJob>& jobs,
                                       const PolicyFactory& make_policy,
                                       const ReasonerFactory& make_reasoner,
                                       const RunConfig& run_cfg, const StagnationConfig& stag_cfg,
                                       RoundReport* report = nullptr) {
    RoundReport rr;
    std::vector<Episode> out;
    for (const RolloutJob& job : jobs) {
        rr.total += 1;
        std::unique_ptr<Policy> policy = make_policy(job.setup);
        std::unique_ptr<Reasoner> reasoner = make_reasoner(job.setup);
        Episode ep =
            rollout_with_stagnation(*job.map, job.setup, *policy, *reasoner, run_cfg, stag_cfg);
        if (classify_failure(ep, *job.map, run_cfg.success_radius) == Outcome::Success) {
            rr.kept += 1;
            out.push_back(std::move(ep));
            continue;
        }
        Episode fixed;
        RepairOutcome rc = repair(ep, *job.map, *reasoner, &fixed, stag_cfg, run_cfg);
        switch (rc.variant) {
            case RepairVariant::KeptAsIs:
            case RepairVariant::Repaired:
                rr.repaired += 1;
                out.push_back(std::move(fixed));
                break;
            case RepairVariant::Dropped:
                if (rc.drop_reason == "length") rr.dropped_length += 1;
                else if (rc.drop_reason == "disconnected") rr.dropped_disconnected += 1;
                else rr.dropped_splice += 1;
                break;
        }
    }
    if (report) *report = rr;
    return out;
}

}  // namespace gridnav

#endif
