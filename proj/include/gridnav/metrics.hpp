#ifndef GRIDNAV_METRICS_HPP
#define GRIDNAV_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gridnav/env.hpp"
#include "gridnav/episode.hpp"
#include "gridnav/error.hpp"
#include "gridnav/planner.hpp"
#include "gridnav/time_model.hpp"
#include "gridnav/util.hpp"

namespace gridnav {

inline const std::vector<double> kDefaultTauGrid = {0.0075, 0.015, 0.03, 0.06, 0.12, 0.24, 0.48};

using MapResolver = std::function<const GridMap&(const std::string& map_ref)>;

// Total generated tokens of one episode: reasoning plus per-action tokens.
inline long long total_tokens(const Episode& ep) {
    long long sum = 0;
    for (const StepRecord& s : ep.steps) {
        if (s.reasoning_tokens < 0 || s.action_tokens < 0)
            throw MissingTokenCountsError("episode log lacks token counts");
        sum += s.reasoning_tokens;
        sum += s.action_tokens;
    }
    return sum;
}

// Inference time: tau seconds per generated token.
inline double t_inf(const Episode& ep, const TimeModel& tm = {}) {
    return tm.tau * static_cast<double>(total_tokens(ep));
}

// Translation distance covered by the logged actions; rotations, obs, and
// end cover zero meters.
inline double actual_path_length(const Episode& ep) {
    int moves = 0;
    for (const StepRecord& s : ep.steps)
        if (s.action == MetaAction::MoveAhead) moves += 1;
    return kMoveDistance * moves;
}

// Slow decisions (reasoner-chosen actions) over total logged steps, pooled.
inline double reasoning_ratio(const std::vector<Episode>& episodes) {
    long long slow = 0, total = 0;
    for (const Episode& ep : episodes) {
        for (const StepRecord& s : ep.steps) {
            total += 1;
            if (s.mode == Mode::Slow && s.action != MetaAction::Obs) slow += 1;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(slow) / static_cast<double>(total);
}

namespace detail {

// Order-independent mean: summands are sorted before Kahan accumulation so
// episode permutations cannot perturb the result.
inline double stable_mean(std::vector<double> vals) {
    if (vals.empty()) return 0.0;
    std::sort(vals.begin(), vals.end());
    double sum = 0.0, carry = 0.0;
    for (double v : vals) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(vals.size());
}

}  // namespace detail

struct EpisodeEval {
    std::string map_ref;
    uint64_t seed = 0;
    Outcome outcome = Outcome::Timeout;
    bool success = false;
    bool solvable = true;     // optimal time and path length exist
    double t_phys_s = 0.0;
    double t_inf_s = 0.0;
    double t_optimal_s = 0.0;
    long long tokens = 0;
    double l_opt = 0.0;       // geodesic shortest path to the nearest target, meters
    double l_actual = 0.0;
    double spl_i = 0.0;
    double sot_i = 0.0;
    int steps = 0;
    int slow_steps = 0;       // slow decisions, obs excluded
};

struct TauPoint {
    double tau = 0.0;
    double sot = 0.0;
    double sr = 0.0;
};

struct MetricsReport {
    int n_episodes = 0;
    int excluded = 0;  // unsolvable episodes left out of SPL/SOT
    double sr = 0.0;
    double spl = 0.0;
    double sot = 0.0;
    double reasoning_ratio = 0.0;
    std::vector<EpisodeEval> rows;
    std::vector<TauPoint> tau_sweep;
};

// Scores one episode against its map. Success is membership within the
// success radius of the nearest target, as recorded by the runner.
inline EpisodeEval evaluate_episode(const Episode& ep, const GridMap& map,
                                    const TimeModel& tm = {}) {
    EpisodeEval ev;
    ev.map_ref = ep.map_ref;
    ev.seed = ep.seed;
    ev.outcome = ep.outcome;
    ev.success = ep.outcome == Outcome::Success;
    ev.steps = static_cast<int>(ep.steps.size());
    for (const StepRecord& s : ep.steps)
        if (s.mode == Mode::Slow && s.action != MetaAction::Obs) ev.slow_steps += 1;
    ev.t_phys_s = t_phys(ep.actions(), tm);
    ev.tokens = total_tokens(ep);
    ev.t_inf_s = t_inf(ep, tm);
    ev.l_actual = actual_path_length(ep);

    Point start = ep.start_pose().point();
    double lo = geodesic_distance_to_targets(map, start);
    if (!std::isfinite(lo)) {
        ev.solvable = false;
        return ev;
    }
    ev.l_opt = lo;
    try {
        ev.t_optimal_s = optimal_time(map, start, tm);
    } catch (const NoPathError&) {
        ev.solvable = false;
        return ev;
    }

    if (ev.success) {
        // A zero-length optimum (start already at the target) counts as a
        // perfect path.
        double denom = std::max(ev.l_opt, ev.l_actual);
        ev.spl_i = denom == 0.0 ? 1.0 : ev.l_opt / denom;
        ev.sot_i = ev.t_optimal_s / (ev.t_phys_s + ev.t_inf_s);
    }
    return ev;
}

// Aggregates SR, SPL, SOT, and the reasoning ratio over an episode set,
// optionally recomputing SOT across a tau grid from the logged token counts.
inline MetricsReport evaluate(const std::vector<Episode>& episodes, const MapResolver& resolve,
                              const TimeModel& tm = {},
                              const std::vector<double>& taus = {}) {
    MetricsReport rep;
    rep.n_episodes = static_cast<int>(episodes.size());
    std::vector<double> sr_terms, spl_terms, sot_terms;
    for (const Episode& ep : episodes) {
        EpisodeEval ev = evaluate_episode(ep, resolve(ep.map_ref), tm);
        if (!ev.solvable) {
            rep.excluded += 1;
            rep.rows.push_back(std::move(ev));
            continue;
        }
        sr_terms.push_back(ev.success ? 1.0 : 0.0);
        spl_terms.push_back(ev.spl_i);
        sot_terms.push_back(ev.sot_i);
        rep.rows.push_back(std::move(ev));
    }
    rep.sr = detail::stable_mean(sr_terms);
    rep.spl = detail::stable_mean(spl_terms);
    rep.sot = detail::stable_mean(sot_terms);
    rep.reasoning_ratio = reasoning_ratio(episodes);

    for (double tau : taus) {
        if (tau <= 0.0) throw ValidationError("tau values must be positive");
        std::vector<double> terms;
        for (const EpisodeEval& ev : rep.rows) {
            if (!ev.solvable) continue;
            double v = 0.0;
            if (ev.success)
                v = ev.t_optimal_s / (ev.t_phys_s + tau * static_cast<double>(ev.tokens));
            terms.push_back(v);
        }
        rep.tau_sweep.push_back(TauPoint{tau, detail::stable_mean(terms), rep.sr});
    }
    return rep;
}

// Recomputes SOT over a tau grid without re-simulation.
inline std::vector<TauPoint> tau_sweep(const std::vector<Episode>& episodes,
                                       const MapResolver& resolve,
                                       const std::vector<double>& taus = kDefaultTauGrid,
                                       const TimeModel& tm = {}) {
    if (taus.empty()) throw ValidationError("tau grid must be nonempty");
    return evaluate(episodes, resolve, tm, taus).tau_sweep;
}

// --- CSV writers ------------------------------------------------------------

inline void write_metrics_csv(const std::string& path, const MetricsReport& rep) {
    std::string text = "metric,value\n";
    text += "n_episodes," + std::to_string(rep.n_episodes) + "\n";
    text += "excluded," + std::to_string(rep.excluded) + "\n";
    text += "sr," + format_double(rep.sr) + "\n";
    text += "spl," + format_double(rep.spl) + "\n";
    text += "sot," + format_double(rep.sot) + "\n";
    text += "reasoning_ratio," + format_double(rep.reasoning_ratio) + "\n";
    atomic_write_file(path, text);
}

inline void write_tau_csv(const std::string& path, const std::vector<TauPoint>& sweep) {
    std::string text = "tau,sot,sr\n";
    for (const TauPoint& p : sweep) {
        text += format_double(p.tau) + "," + format_double(p.sot) + "," + format_double(p.sr);
        text += "\n";
    }
    atomic_write_file(path, text);
}

}  // namespace gridnav

#endif
