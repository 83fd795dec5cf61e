#ifndef GRIDNAV_CONTROLLER_HPP
#define GRIDNAV_CONTROLLER_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridnav/env.hpp"
#include "gridnav/util.hpp"
#include "gridnav/episode.hpp"
#include "gridnav/error.hpp"
#include "gridnav/memory.hpp"
#include "gridnav/planner.hpp"
#include "gridnav/rng.hpp"

namespace gridnav {

inline constexpr int kSoftObsInterval = 30;
inline constexpr int kHardObsInterval = 35;
inline constexpr int kDefaultMaxSteps = 200;
inline constexpr double kSuccessRadius = 1.0;     // meters, geodesic
inline constexpr int kDefaultActionTokens = 4;    // tokens per emitted action
inline constexpr int kDefaultReasoningTokens = 150;

struct AgentContext {
    Mode mode = Mode::Slow;  // Slow exactly at episode start or right after an Obs
    int fast_steps_since_obs = 0;
    MemoryGraph memory;
    Point goal;
    std::vector<MetaAction> actions_since_landmark;
    int step = 0;
};

// Soft trigger surfaced to the policy at 30 consecutive post-Obs actions;
// the controller enforces a hard Obs override at 35.
inline bool should_force_obs(const AgentContext& ctx) {
    return ctx.fast_steps_since_obs >= kSoftObsInterval;
}

struct PolicyInput {
    const GridMap& map;
    Pose pose;
    Point goal;
    const AgentContext& ctx;
    bool force_obs_hint = false;
};

// Fast-system policy: one meta-action per step. Implementations may keep
// per-episode state; a fresh instance is constructed for every episode.
class Policy {
public:
    virtual ~Policy() = default;
    virtual MetaAction decide(const PolicyInput& in) = 0;
};

struct ReasonerInput {
    const GridMap& map;
    Pose pose;
    Point goal;
    const MemoryGraph& memory;
    const PanoramicScan& scan;
    // Lazily queries the fast policy for its next action; reasoners that plan
    // on their own never advance the policy's state.
    std::function<MetaAction()> propose;
};

struct ReasonerOutput {
    std::string reasoning_text;
    int reasoning_tokens = 0;
    MetaAction action = MetaAction::End;  // first post-reasoning action, never Obs
};

// Slow-system reasoner, invoked once per panoramic scan.
class Reasoner {
public:
    virtual ~Reasoner() = default;
    virtual ReasonerOutput reason(const ReasonerInput& in) = 0;
};

// --- Builtin policies -------------------------------------------------------

// Replays a compiled A* route to the goal, then stops. Plans once, from the
// pose of its first decision.
class OraclePolicy : public Policy {
public:
    MetaAction decide(const PolicyInput& in) override {
        if (!planned_) {
            planned_ = true;
            AstarResult ar = astar(in.map, in.pose.point(), in.goal);
            std::vector<Point> waypoints;
            for (size_t k = 1; k < ar.path.size(); ++k)
                waypoints.push_back(in.map.center(ar.path[k]));
            plan_ = compile_along(in.map, in.pose, waypoints).actions;
        }
        if (cursor_ < plan_.size()) return plan_[cursor_++];
        return MetaAction::End;
    }

private:
    bool planned_ = false;
    std::vector<MetaAction> plan_;
    size_t cursor_ = 0;
};

// Rotates toward the Euclidean bearing of the goal and walks straight at it,
// with epsilon-random actions; stops once the straight-line distance falls
// inside the success radius. Deliberately map-blind.
class GreedyPolicy : public Policy {
public:
    GreedyPolicy(double noise, Rng rng, double end_radius = kSuccessRadius)
        : noise_(noise), rng_(rng), end_radius_(end_radius) {}

    MetaAction decide(const PolicyInput& in) override {
        if (noise_ > 0.0 && rng_.uniform01() < noise_) {
            static constexpr MetaAction pool[3] = {MetaAction::MoveAhead, MetaAction::RotateLeft,
                                                   MetaAction::RotateRight};
            return pool[rng_.uniform_int(0, 2)];
        }
        if (euclidean(in.pose.point(), in.goal) <= end_radius_) return MetaAction::End;
        double gap = normalize_angle(bearing_deg(in.pose.point(), in.goal) - in.pose.heading);
        if (std::abs(gap) <= 15.0 + 1e-9) return MetaAction::MoveAhead;
        return gap > 0.0 ? MetaAction::RotateLeft : MetaAction::RotateRight;
    }

private:
    double noise_;
    Rng rng_;
    double end_radius_;
};

// Cycles a fixed oscillation pattern; exists to exercise stagnation
// detection. The default pattern shuttles between two poses 0.25 m apart.
class StuckPolicy : public Policy {
public:
    explicit StuckPolicy(std::vector<MetaAction> pattern = default_pattern())
        : pattern_(std::move(pattern)) {}

    static std::vector<MetaAction> default_pattern() {
        std::vector<MetaAction> p;
        p.push_back(MetaAction::MoveAhead);
        for (int i = 0; i < 6; ++i) p.push_back(MetaAction::RotateLeft);
        p.push_back(MetaAction::MoveAhead);
        for (int i = 0; i < 6; ++i) p.push_back(MetaAction::RotateLeft);
        return p;
    }

    MetaAction decide(const PolicyInput&) override {
        MetaAction a = pattern_[cursor_];
        cursor_ = (cursor_ + 1) % pattern_.size();
        return a;
    }

private:
    std::vector<MetaAction> pattern_;
    size_t cursor_ = 0;
};

// --- Builtin reasoners ------------------------------------------------------

// Deterministic placeholder reasoning: template text interpolating the goal,
// landmark count, and goal bearing, with a declared token count. The first
// post-reasoning action is delegated to the fast policy.
class StubReasoner : public Reasoner {
public:
    explicit StubReasoner(int declared_tokens = kDefaultReasoningTokens)
        : tokens_(declared_tokens) {}

    ReasonerOutput reason(const ReasonerInput& in) override {
        ReasonerOutput out;
        out.reasoning_tokens = tokens_;
        int bearing = static_cast<int>(std::lround(bearing_deg(in.pose.point(), in.goal)));
        out.reasoning_text =
            "I have stored " + std::to_string(in.memory.landmarks.size()) +
            " landmarks. The target lies near (" + format_double(in.goal.x) + ", " +
            format_double(in.goal.y) + "), bearing " + std::to_string(bearing) +
            " degrees from my heading origin. I will keep moving toward it and raise obs "
            "when the fast system runs long.";
        out.action = in.propose();
        if (out.action == MetaAction::Obs) out.action = MetaAction::RotateLeft;
        return out;
    }

private:
    int tokens_;
};

// Replans an A* route to the goal at every invocation and emits its first
// action; the remaining legs are recomputed at the next scan.
class ReplanReasoner : public Reasoner {
public:
    explicit ReplanReasoner(int declared_tokens = kDefaultReasoningTokens)
        : tokens_(declared_tokens) {}

    ReasonerOutput reason(const ReasonerInput& in) override {
        ReasonerOutput out;
        out.reasoning_tokens = tokens_;
        out.reasoning_text = "Replanning a fresh route to the target from the latest scan.";
        try {
            AstarResult ar = astar(in.map, in.pose.point(), in.goal);
            std::vector<Point> waypoints;
            for (size_t k = 1; k < ar.path.size(); ++k)
                waypoints.push_back(in.map.center(ar.path[k]));
            CompileResult cr = compile_along(in.map, in.pose, waypoints);
            out.action = cr.actions.empty() ? MetaAction::End : cr.actions.front();
        } catch (const NoPathError&) {
            out.action = MetaAction::RotateLeft;
        }
        return out;
    }

private:
    int tokens_;
};

// --- Episode runner ---------------------------------------------------------

enum class Schedule { Adaptive, DenseEveryStep };

struct RunConfig {
    int max_steps = kDefaultMaxSteps;
    int hard_obs_interval = kHardObsInterval;
    int action_tokens = kDefaultActionTokens;
    int max_landmarks = kDefaultMaxLandmarks;
    double success_radius = kSuccessRadius;
    Schedule schedule = Schedule::Adaptive;
    ObserveConfig observe;
};

struct EpisodeSetup {
    std::string map_ref;
    Pose start;
    Point goal;
    uint64_t seed = 0;
};

namespace detail {

// Stagnation hook: called at fast decision points; returns the events to
// attach when it demands an Obs override, plus the sampled window if any.
struct FastCheck {
    bool force_obs = false;
    std::vector<Event> events;
    std::optional<int> dt_sample;
};
using FastCheckFn =
    std::function<FastCheck(const std::vector<StepRecord>&, const Pose&, bool cooldown)>;

inline Episode run_episode_impl(const GridMap& map, const EpisodeSetup& setup, Policy& policy,
                                Reasoner& reasoner, const RunConfig& cfg,
                                const FastCheckFn& fast_check) {
    Episode ep;
    ep.map_ref = setup.map_ref;
    ep.seed = setup.seed;
    ep.goal = setup.goal;

    std::vector<double> goal_field = target_distance_field(map);

    AgentContext ctx;
    ctx.goal = setup.goal;
    ctx.memory.max_landmarks = cfg.max_landmarks;

    Pose pose = setup.start;
    enum class ObsCause { None, Initial, Policy, Forced, Detector };
    // The dense schedule reasons on a fresh scan at every step, so the obs
    // transition token never appears in its logs.
    ObsCause obs_cause =
        cfg.schedule == Schedule::DenseEveryStep ? ObsCause::None : ObsCause::Initial;
    std::vector<Event> obs_markers;
    std::optional<int> pending_dt;
    std::optional<ReasonerOutput> slow_pending;
    bool detector_cooldown = false;
    bool ended = false;

    auto log_step = [&](MetaAction action, Mode mode, int rtokens,
                        std::vector<Event> events) -> StepRecord& {
        StepRecord rec;
        rec.pose = pose;
        rec.action = action;
        rec.mode = mode;
        rec.reasoning_tokens = rtokens;
        rec.action_tokens = cfg.action_tokens;
        rec.events = std::move(events);
        rec.dt_sample = pending_dt;
        pending_dt.reset();
        ep.steps.push_back(std::move(rec));
        return ep.steps.back();
    };

    auto validate_action = [](MetaAction a) {
        switch (a) {
            case MetaAction::MoveAhead:
            case MetaAction::RotateLeft:
            case MetaAction::RotateRight:
            case MetaAction::Obs:
            case MetaAction::End:
                return;
        }
        throw PolicyFaultError("policy emitted a malformed action value");
    };

    while (static_cast<int>(ep.steps.size()) < cfg.max_steps) {
        if (obs_cause != ObsCause::None) {
            // Log the Obs action, scan, store a landmark, and consult the
            // slow system for the next action.
            std::vector<Event> events;
            events.push_back(Event::ObsRequested);
            for (Event e : obs_markers) events.push_back(e);
            obs_markers.clear();
            log_step(MetaAction::Obs, ctx.mode, 0, std::move(events));
            ctx.mode = Mode::Slow;
            ctx.fast_steps_since_obs = 0;
            detector_cooldown = true;

            PanoramicScan scan = panoramic(map, pose, cfg.observe);
            Landmark lm;
            lm.id = static_cast<int>(ctx.memory.landmarks.size());
            lm.pose = pose;
            lm.step_index = static_cast<int>(ep.steps.size()) - 1;
            append_landmark(ctx.memory, lm, ctx.actions_since_landmark);
            ctx.actions_since_landmark.clear();

            ReasonerInput rin{map, pose, setup.goal, ctx.memory, scan,
                              [&] {
                                  return policy.decide(PolicyInput{map, pose, setup.goal, ctx,
                                                                  should_force_obs(ctx)});
                              }};
            ReasonerOutput rout = reasoner.reason(rin);
            validate_action(rout.action);
            if (rout.action == MetaAction::Obs)
                throw PolicyFaultError("reasoner returned obs as its first action");
            slow_pending = std::move(rout);
            obs_cause = ObsCause::None;
            continue;
        }

        MetaAction action;
        Mode mode;
        int rtokens = 0;

        if (slow_pending) {
            action = slow_pending->action;
            mode = Mode::Slow;
            rtokens = slow_pending->reasoning_tokens;
            slow_pending.reset();
        } else if (cfg.schedule == Schedule::DenseEveryStep) {
            PanoramicScan scan = panoramic(map, pose, cfg.observe);
            ReasonerInput rin{map, pose, setup.goal, ctx.memory, scan,
                              [&] {
                                  return policy.decide(PolicyInput{map, pose, setup.goal, ctx,
                                                                  should_force_obs(ctx)});
                              }};
            ReasonerOutput rout = reasoner.reason(rin);
            validate_action(rout.action);
            if (rout.action == MetaAction::Obs)
                throw PolicyFaultError("reasoner returned obs as its first action");
            action = rout.action;
            mode = Mode::Slow;
            rtokens = rout.reasoning_tokens;
        } else {
            if (ctx.fast_steps_since_obs >= cfg.hard_obs_interval) {
                obs_cause = ObsCause::Forced;
                obs_markers = {Event::ForcedObs};
                continue;
            }
            if (fast_check) {
                FastCheck chk = fast_check(ep.steps, pose, detector_cooldown);
                detector_cooldown = false;
                pending_dt = chk.dt_sample;
                if (chk.force_obs) {
                    obs_cause = ObsCause::Detector;
                    obs_markers = chk.events;
                    continue;
                }
            } else {
                detector_cooldown = false;
            }
            action = policy.decide(PolicyInput{map, pose, setup.goal, ctx,
                                               should_force_obs(ctx)});
            validate_action(action);
            mode = Mode::Fast;
            if (action == MetaAction::Obs) {
                obs_cause = ObsCause::Policy;
                obs_markers.clear();
                continue;
            }
        }

        StepResult sr = step(map, pose, action);
        log_step(action, mode, rtokens, sr.events);
        ctx.mode = Mode::Fast;
        if (is_motor(action)) {
            ctx.fast_steps_since_obs += 1;
            ctx.actions_since_landmark.push_back(action);
        }
        pose = sr.pose;
        ctx.step = static_cast<int>(ep.steps.size());
        if (action == MetaAction::End) {
            double d = field_distance(map, goal_field, pose.point());
            ep.outcome = d <= cfg.success_radius ? Outcome::Success : Outcome::Misidentification;
            ended = true;
            break;
        }
    }
    if (!ended) ep.outcome = Outcome::Timeout;
    return ep;
}

}  // namespace detail

// Runs one episode: begins with a panoramic scan and first landmark (the
// slow system), then alternates fast policy steps with scan-triggered slow
// phases. A policy Obs decision or the hard 35-step cap re-enters the slow
// system. Stagnation-triggered re-entry lives in the synthesis layer.
inline Episode run_episode(const GridMap& map, const EpisodeSetup& setup, Policy& policy,
                           Reasoner& reasoner, const RunConfig& cfg = {}) {
    return detail::run_episode_impl(map, setup, policy, reasoner, cfg, nullptr);
}

}  // namespace gridnav

#endif
