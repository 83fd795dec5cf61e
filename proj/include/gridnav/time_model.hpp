#ifndef GRIDNAV_TIME_MODEL_HPP
#define GRIDNAV_TIME_MODEL_HPP

#include <vector>

#include "gridnav/env.hpp"

namespace gridnav {

// Physical action costs in seconds plus the per-token inference latency tau.
struct TimeModel {
    double move_s = 1.0;
    double rotate_s = 0.6;
    double obs_s = 4.0;
    double stop_s = 0.1;
    double tau = 0.015;  // seconds per generated token
};

inline double action_cost(MetaAction a, const TimeModel& tm) {
    switch (a) {
        case MetaAction::MoveAhead: return tm.move_s;
        case MetaAction::RotateLeft:
        case MetaAction::RotateRight: return tm.rotate_s;
        case MetaAction::Obs: return tm.obs_s;
        case MetaAction::End: return tm.stop_s;  // End is priced as Stop
    }
    return 0.0;
}

// Compensated (Kahan) summation: the order-sensitive rounding of a naive
// accumulator would drift off the exact table values.
inline double t_phys(const std::vector<MetaAction>& actions, const TimeModel& tm = {}) {
    double sum = 0.0, comp = 0.0;
    for (MetaAction a : actions) {
        double y = action_cost(a, tm) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace gridnav

#endif
