#ifndef GRIDNAV_DATASET_HPP
#define GRIDNAV_DATASET_HPP

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridnav/controller.hpp"
#include "gridnav/env.hpp"
#include "gridnav/episode.hpp"
#include "gridnav/error.hpp"
#include "gridnav/memory.hpp"
#include "gridnav/util.hpp"

namespace gridnav {

inline constexpr const char* kStage1Schema = "stage1.v1";
inline constexpr const char* kStage2Schema = "stage2.v1";

inline constexpr const char* kStage1SystemInstruction =
    "You are a wheeled robot searching an indoor scene for a target object. Each turn shows "
    "your current view. Reply with exactly one action: MoveAhead 0.25, RotateLeft 30.0, "
    "RotateRight 30.0, or end once the target is within one meter.";

inline constexpr const char* kStage2SystemInstruction =
    "You are a wheeled robot searching an indoor scene for a target object. Each turn shows "
    "your current view; some turns also replay your landmark memory and a written deliberation "
    "before the action. Reply with exactly one action: MoveAhead 0.25, RotateLeft 30.0, "
    "RotateRight 30.0, obs to pause and deliberate, or end once the target is within one meter.";

struct Turn {
    Pose view;  // observation reference: the pose the view was rendered from
    MetaAction action = MetaAction::End;
};

struct ConversationRecord {
    std::string schema = kStage1Schema;
    std::string system_instruction = kStage1SystemInstruction;
    std::string map_ref;
    uint64_t seed = 0;
    Point goal{};
    std::vector<Turn> turns;
};

struct SegmentRecord {
    std::string schema = kStage2Schema;
    std::string system_instruction = kStage2SystemInstruction;
    std::string map_ref;
    uint64_t seed = 0;
    Point goal{};
    int segment_index = 0;
    int start_turn = 0;  // global index of the first original turn
    std::string memory_text;
    std::string reasoning_text;
    int reasoning_tokens = 0;
    std::vector<Turn> turns;  // original turns plus a trailing obs on non-terminal segments
};

// Closed-loop integrity guard: replaying the logged actions must reproduce
// the logged poses exactly.
inline void verify_replay(const GridMap& map, const Episode& ep) {
    if (ep.steps.empty()) return;
    Pose pose = ep.steps.front().pose;
    for (size_t i = 0; i < ep.steps.size(); ++i) {
        if (!(ep.steps[i].pose == pose))
            throw ReplayMismatchError("replay diverges at step " + std::to_string(i));
        pose = step(map, pose, ep.steps[i].action).pose;
    }
}

inline void validate_conversation(const ConversationRecord& rec) {
    if (rec.schema != kStage1Schema)
        throw ValidationError("conversation: unexpected schema " + rec.schema);
    if (rec.turns.empty()) throw ValidationError("conversation: no turns");
    MetaAction last = rec.turns.back().action;
    if (last != MetaAction::End && last != MetaAction::Obs)
        throw ValidationError("conversation: final action must be end or obs");
}

inline void validate_segment(const SegmentRecord& rec) {
    if (rec.schema != kStage2Schema)
        throw ValidationError("segment: unexpected schema " + rec.schema);
    if (rec.turns.empty()) throw ValidationError("segment: no turns");
    if (rec.segment_index < 0 || rec.start_turn < 0)
        throw ValidationError("segment: negative indices");
    MetaAction last = rec.turns.back().action;
    if (last != MetaAction::End && last != MetaAction::Obs)
        throw ValidationError("segment: final action must be end or obs");
}

// Formats a replayable trajectory as one multi-turn conversation: one
// (view, action) turn per logged step.
inline ConversationRecord format_stage1(const GridMap& map, const Episode& ep,
                                        const std::string& system_instruction =
                                            kStage1SystemInstruction) {
    verify_replay(map, ep);
    ConversationRecord rec;
    rec.system_instruction = system_instruction;
    rec.map_ref = ep.map_ref;
    rec.seed = ep.seed;
    rec.goal = ep.goal;
    for (const StepRecord& s : ep.steps) rec.turns.push_back(Turn{s.pose, s.action});
    validate_conversation(rec);
    return rec;
}

// Slices a motor-only trajectory into fixed-length segments, prepending the
// accumulated landmark memory and a reasoning passage to each and appending
// the transition token obs to every non-terminal segment. One landmark is
// accrued per segment, at its first pose.
inline std::vector<SegmentRecord> segment_stage2(const GridMap& map, const Episode& ep,
                                                 Reasoner& reasoner, int seg_len = 16,
                                                 const std::string& system_instruction =
                                                     kStage2SystemInstruction) {
    if (seg_len < 1) throw ValidationError("segment_stage2: seg_len must be >= 1");
    if (ep.steps.empty()) throw ValidationError("segment_stage2: empty trajectory");
    for (const StepRecord& s : ep.steps)
        if (s.action == MetaAction::Obs)
            throw ValidationError("segment_stage2: input trajectory must not contain obs");
    if (ep.steps.back().action != MetaAction::End)
        throw ValidationError("segment_stage2: trajectory must terminate with end");
    verify_replay(map, ep);

    int total = static_cast<int>(ep.steps.size());
    std::vector<SegmentRecord> out;
    MemoryGraph mem;
    std::vector<MetaAction> since_last;

    for (int start = 0, index = 0; start < total; start += seg_len, ++index) {
        int stop = std::min(start + seg_len, total);
        bool terminal = stop == total;

        Landmark lm;
        lm.id = static_cast<int>(mem.landmarks.size());
        lm.pose = ep.steps[static_cast<size_t>(start)].pose;
        lm.step_index = start;
        append_landmark(mem, lm, since_last);
        since_last.clear();

        PanoramicScan scan = panoramic(map, lm.pose);
        ReasonerInput rin{map, lm.pose, ep.goal, mem, scan,
                          [&] { return ep.steps[static_cast<size_t>(start)].action; }};
        ReasonerOutput rout = reasoner.reason(rin);

        SegmentRecord rec;
        rec.system_instruction = system_instruction;
        rec.map_ref = ep.map_ref;
        rec.seed = ep.seed;
        rec.goal = ep.goal;
        rec.segment_index = index;
        rec.start_turn = start;
        rec.memory_text = serialize(mem);
        rec.reasoning_text = rout.reasoning_text;
        rec.reasoning_tokens = rout.reasoning_tokens;
        for (int i = start; i < stop; ++i) {
            rec.turns.push_back(Turn{ep.steps[static_cast<size_t>(i)].pose,
                                     ep.steps[static_cast<size_t>(i)].action});
            if (is_motor(ep.steps[static_cast<size_t>(i)].action))
                since_last.push_back(ep.steps[static_cast<size_t>(i)].action);
        }
        if (!terminal)
            rec.turns.push_back(Turn{ep.steps[static_cast<size_t>(stop)].pose, MetaAction::Obs});
        validate_segment(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json turn_to_json(const Turn& t) {
    return nlohmann::json{{"x", t.view.x},
                          {"y", t.view.y},
                          {"heading", t.view.heading},
                          {"action", action_label(t.action)}};
}

inline Turn turn_from_json(const nlohmann::json& j) {
    Turn t;
    t.view.x = j.at("x").get<double>();
    t.view.y = j.at("y").get<double>();
    t.view.heading = j.at("heading").get<int>();
    t.action = parse_action_label(j.at("action").get<std::string>());
    return t;
}

inline nlohmann::json conversation_to_json(const ConversationRecord& rec) {
    nlohmann::json turns = nlohmann::json::array();
    for (const Turn& t : rec.turns) turns.push_back(turn_to_json(t));
    return nlohmann::json{{"schema", rec.schema},
                          {"system_instruction", rec.system_instruction},
                          {"map", rec.map_ref},
                          {"seed", rec.seed},
                          {"goal", {{"x", rec.goal.x}, {"y", rec.goal.y}}},
                          {"turns", turns}};
}

inline ConversationRecord conversation_from_json(const nlohmann::json& j) {
    ConversationRecord rec;
    rec.schema = j.at("schema").get<std::string>();
    rec.system_instruction = j.at("system_instruction").get<std::string>();
    rec.map_ref = j.at("map").get<std::string>();
    rec.seed = j.at("seed").get<uint64_t>();
    rec.goal.x = j.at("goal").at("x").get<double>();
    rec.goal.y = j.at("goal").at("y").get<double>();
    for (const auto& t : j.at("turns")) rec.turns.push_back(turn_from_json(t));
    return rec;
}

inline nlohmann::json segment_to_json(const SegmentRecord& rec) {
    nlohmann::json turns = nlohmann::json::array();
    for (const Turn& t : rec.turns) turns.push_back(turn_to_json(t));
    return nlohmann::json{{"schema", rec.schema},
                          {"system_instruction", rec.system_instruction},
                          {"map", rec.map_ref},
                          {"seed", rec.seed},
                          {"goal", {{"x", rec.goal.x}, {"y", rec.goal.y}}},
                          {"segment_index", rec.segment_index},
                          {"start_turn", rec.start_turn},
                          {"memory", rec.memory_text},
                          {"reasoning", rec.reasoning_text},
                          {"reasoning_tokens", rec.reasoning_tokens},
                          {"turns", turns}};
}

inline SegmentRecord segment_from_json(const nlohmann::json& j) {
    SegmentRecord rec;
    rec.schema = j.at("schema").get<std::string>();
    rec.system_instruction = j.at("system_instruction").get<std::string>();
    rec.map_ref = j.at("map").get<std::string>();
    rec.seed = j.at("seed").get<uint64_t>();
    rec.goal.x = j.at("goal").at("x").get<double>();
    rec.goal.y = j.at("goal").at("y").get<double>();
    rec.segment_index = j.at("segment_index").get<int>();
    rec.start_turn = j.at("start_turn").get<int>();
    rec.memory_text = j.at("memory").get<std::string>();
    rec.reasoning_text = j.at("reasoning").get<std::string>();
    rec.reasoning_tokens = j.at("reasoning_tokens").get<int>();
    for (const auto& t : j.at("turns")) rec.turns.push_back(turn_from_json(t));
    return rec;
}

// --- JSONL files ------------------------------------------------------------

namespace detail {

inline std::vector<std::pair<nlohmann::json, long>> read_jsonl_lines(
    const std::string& path, const std::string& expected_schema) {
    std::string text = read_file(path);
    std::vector<std::pair<nlohmann::json, long>> out;
    long line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line =
            nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        line_no += 1;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw SchemaError("malformed record", line_no);
        }
        if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string())
            throw SchemaError("record missing schema field", line_no);
        if (j.at("schema").get<std::string>() != expected_schema)
            throw SchemaError("unknown schema version: " + j.at("schema").dump(), line_no);
        out.emplace_back(std::move(j), line_no);
    }
    return out;
}

template <typename T, typename ToJson>
inline void write_jsonl(const std::string& path, const std::vector<T>& records, ToJson to_json) {
    std::string text;
    for (const T& r : records) {
        text += to_json(r).dump();
        text += '\n';
    }
    atomic_write_file(path, text);
}

}  // namespace detail

inline void write_stage1_jsonl(const std::string& path,
                               const std::vector<ConversationRecord>& records) {
    for (const ConversationRecord& r : records) validate_conversation(r);
    detail::write_jsonl(path, records, conversation_to_json);
}

inline std::vector<ConversationRecord> read_stage1_jsonl(const std::string& path) {
    std::vector<ConversationRecord> out;
    for (const auto& [j, line_no] : detail::read_jsonl_lines(path, kStage1Schema)) {
        try {
            out.push_back(conversation_from_json(j));
            validate_conversation(out.back());
        } catch (const nlohmann::json::exception&) {
            throw SchemaError("conversation record missing fields", line_no);
        } catch (const ValidationError& e) {
            throw SchemaError(e.what(), line_no);
        }
    }
    return out;
}

inline void write_stage2_jsonl(const std::string& path, const std::vector<SegmentRecord>& records) {
    for (const SegmentRecord& r : records) validate_segment(r);
    detail::write_jsonl(path, records, segment_to_json);
}

inline std::vector<SegmentRecord> read_stage2_jsonl(const std::string& path) {
    std::vector<SegmentRecord> out;
    for (const auto& [j, line_no] : detail::read_jsonl_lines(path, kStage2Schema)) {
        try {
            out.push_back(segment_from_json(j));
            validate_segment(out.back());
        } catch (const nlohmann::json::exception&) {
            throw SchemaError("segment record missing fields", line_no);
        } catch (const ValidationError& e) {
            throw SchemaError(e.what(), line_no);
        }
    }
    return out;
}

inline void write_episode_jsonl(const std::string& path, const std::vector<Episode>& episodes) {
    detail::write_jsonl(path, episodes, episode_to_json);
}

inline std::vector<Episode> read_episode_jsonl(const std::string& path) {
    std::vector<Episode> out;
    for (const auto& [j, line_no] : detail::read_jsonl_lines(path, kEpisodeSchema)) {
        try {
            out.push_back(episode_from_json(j));
        } catch (const nlohmann::json::exception&) {
            throw SchemaError("episode record missing fields", line_no);
        } catch (const SchemaError&) {
            throw;
        } catch (const Error& e) {
            throw SchemaError(e.what(), line_no);
        }
    }
    return out;
}

}  // namespace gridnav

#endif
