#ifndef GRIDNAV_EPISODE_HPP
#define GRIDNAV_EPISODE_HPP

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridnav/env.hpp"
#include "gridnav/error.hpp"

namespace gridnav {

using json = nlohmann::json;

enum class Mode { Slow, Fast };

inline const char* mode_label(Mode m) { return m == Mode::Slow ? "slow" : "fast"; }

enum class Outcome { Success, Misidentification, Timeout };

inline const char* outcome_label(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::Misidentification: return "misidentification";
        case Outcome::Timeout: return "timeout";
    }
    return "?";
}

inline Outcome parse_outcome_label(const std::string& s) {
    if (s == "success") return Outcome::Success;
    if (s == "misidentification") return Outcome::Misidentification;
    if (s == "timeout") return Outcome::Timeout;
    throw ParseError("unknown outcome: " + s);
}

// One logged step: the pose at decision time, the action taken, which system
// produced it, and token counts for inference-time accounting.
struct StepRecord {
    Pose pose;
    MetaAction action = MetaAction::End;
    Mode mode = Mode::Fast;
    int reasoning_tokens = 0;  // -1 marks a log without token counts
    int action_tokens = 0;
    std::vector<Event> events;
    std::optional<int> dt_sample;  // no-progress check window, when one was drawn
};

inline constexpr const char* kEpisodeSchema = "episode.v1";

// Time-indexed rollout log; doubles as the trajectory type for synthetic
// (planner-built) action sequences.
struct Episode {
    std::string schema = kEpisodeSchema;
    std::string map_ref;
    uint64_t seed = 0;
    Point goal;
    Outcome outcome = Outcome::Timeout;
    std::vector<StepRecord> steps;
    std::vector<std::string> flags;

    Pose start_pose() const { return steps.empty() ? Pose{} : steps.front().pose; }
    Pose final_pose() const { return steps.empty() ? Pose{} : steps.back().pose; }
    bool ended() const { return !steps.empty() && steps.back().action == MetaAction::End; }

    std::vector<MetaAction> actions() const {
        std::vector<MetaAction> out;
        out.reserve(steps.size());
        for (const StepRecord& s : steps) out.push_back(s.action);
        return out;
    }
};

using Trajectory = Episode;

inline json step_to_json(const StepRecord& s) {
    json j{{"x", s.pose.x},
           {"y", s.pose.y},
           {"heading", s.pose.heading},
           {"action", action_label(s.action)},
           {"mode", mode_label(s.mode)},
           {"reasoning_tokens", s.reasoning_tokens},
           {"action_tokens", s.action_tokens}};
    if (!s.events.empty()) {
        json ev = json::array();
        for (Event e : s.events) ev.push_back(event_label(e));
        j["events"] = ev;
    }
    if (s.dt_sample) j["dt"] = *s.dt_sample;
    return j;
}

inline StepRecord step_from_json(const json& j) {
    StepRecord s;
    s.pose.x = j.at("x").get<double>();
    s.pose.y = j.at("y").get<double>();
    s.pose.heading = j.at("heading").get<int>();
    s.action = parse_action_label(j.at("action").get<std::string>());
    s.mode = j.at("mode").get<std::string>() == "slow" ? Mode::Slow : Mode::Fast;
    s.reasoning_tokens = j.value("reasoning_tokens", -1);
    s.action_tokens = j.value("action_tokens", -1);
    if (j.contains("events"))
        for (const auto& e : j.at("events")) s.events.push_back(parse_event_label(e.get<std::string>()));
    if (j.contains("dt")) s.dt_sample = j.at("dt").get<int>();
    return s;
}

inline json episode_to_json(const Episode& ep) {
    json steps = json::array();
    for (const StepRecord& s : ep.steps) steps.push_back(step_to_json(s));
    json j{{"schema", ep.schema},
           {"map", ep.map_ref},
           {"seed", ep.seed},
           {"goal", json{{"x", ep.goal.x}, {"y", ep.goal.y}}},
           {"outcome", outcome_label(ep.outcome)},
           {"steps", steps}};
    if (!ep.flags.empty()) j["flags"] = ep.flags;
    return j;
}

inline Episode episode_from_json(const json& j) {
    Episode ep;
    ep.schema = j.at("schema").get<std::string>();
    ep.map_ref = j.at("map").get<std::string>();
    ep.seed = j.at("seed").get<uint64_t>();
    ep.goal = Point{j.at("goal").at("x").get<double>(), j.at("goal").at("y").get<double>()};
    ep.outcome = parse_outcome_label(j.at("outcome").get<std::string>());
    for (const auto& s : j.at("steps")) ep.steps.push_back(step_from_json(s));
    if (j.contains("flags"))
        for (const auto& f : j.at("flags")) ep.flags.push_back(f.get<std::string>());
    return ep;
}

}  // namespace gridnav

#endif
