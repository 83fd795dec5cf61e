#ifndef GRIDNAV_MEMORY_HPP
#define GRIDNAV_MEMORY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "gridnav/env.hpp"
#include "gridnav/error.hpp"

namespace gridnav {

inline constexpr int kDefaultMaxLandmarks = 10;

struct Landmark {
    int id = 0;            // creation ordinal
    Pose pose;
    int step_index = -1;   // episode step at which the scan was taken
};

struct ActionEdge {
    std::vector<MetaAction> actions;  // motor actions only
};

// Topological memory: landmarks joined by the motor actions executed between
// them. Pruning keeps an evenly spaced subset including the first and the
// most recent landmark, concatenating the action lists of merged edges.
struct MemoryGraph {
    std::vector<Landmark> landmarks;
    std::vector<ActionEdge> edges;  // edges.size() == max(0, landmarks.size() - 1)
    int max_landmarks = kDefaultMaxLandmarks;
};

inline void prune(MemoryGraph& m) {
    int n = static_cast<int>(m.landmarks.size());
    int cap = m.max_landmarks;
    if (n <= cap || cap < 2) return;
    std::vector<int> keep;
    for (int i = 0; i < cap; ++i) {
        int idx = static_cast<int>(std::llround(static_cast<double>(i) * (n - 1) / (cap - 1)));
        if (keep.empty() || keep.back() != idx) keep.push_back(idx);
    }
    std::vector<Landmark> landmarks;
    std::vector<ActionEdge> edges;
    for (size_t k = 0; k < keep.size(); ++k) {
        landmarks.push_back(m.landmarks[keep[k]]);
        if (k + 1 < keep.size()) {
            ActionEdge merged;
            for (int e = keep[k]; e < keep[k + 1]; ++e)
                merged.actions.insert(merged.actions.end(), m.edges[e].actions.begin(),
                                      m.edges[e].actions.end());
            edges.push_back(std::move(merged));
        }
    }
    m.landmarks = std::move(landmarks);
    m.edges = std::move(edges);
}

// Appends a landmark; `since_previous` holds the motor actions executed since
// the previous landmark and is ignored for the first one.
inline void append_landmark(MemoryGraph& m, const Landmark& lm,
                            const std::vector<MetaAction>& since_previous) {
    for (MetaAction a : since_previous)
        if (!is_motor(a))
            throw ValidationError("memory edge may only contain motor actions");
    if (!m.landmarks.empty()) m.edges.push_back(ActionEdge{since_previous});
    m.landmarks.push_back(lm);
    prune(m);
}

inline int total_edge_actions(const MemoryGraph& m) {
    int n = 0;
    for (const ActionEdge& e : m.edges) n += static_cast<int>(e.actions.size());
    return n;
}

// Flat text rendering consumed as the model-facing memory block. The
// <image> placeholders stand in for the four panoramic views per landmark
// and the current egocentric view; their poses travel in the structured log.
inline std::string serialize(const MemoryGraph& m) {
    std::string out;
    for (size_t k = 0; k < m.landmarks.size(); ++k) {
        out += "At landmark" + std::to_string(k + 1) +
               ", you see <image><image><image><image>; ";
        if (k < m.edges.size()) {
            out += "Executed ";
            const auto& actions = m.edges[k].actions;
            for (size_t i = 0; i < actions.size(); ++i) {
                if (i) out += ", ";
                out += action_label(actions[i]);
            }
            out += " from landmark " + std::to_string(k + 1) + " to landmark " +
                   std::to_string(k + 2) + "; ";
        }
    }
    out += "Your current view is <image>.";
    return out;
}

}  // namespace gridnav

#endif
