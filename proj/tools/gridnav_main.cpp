// Command-line front end: map generation, rollouts, dataset synthesis,
// repair rounds, metric evaluation, and tau sweeps. Every command is
// deterministic under fixed --seed and flags.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <gridnav/gridnav.hpp>

namespace fs = std::filesystem;
using namespace gridnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

// --- shared plumbing --------------------------------------------------------

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    int workers = std::min(jobs, n);
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct LoadedMaps {
    std::vector<GridMap> maps;
    std::vector<std::string> refs;
};

LoadedMaps load_maps(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const std::string& p : paths) {
        if (std::filesystem::is_directory(p)) {
            std::vector<std::string> found;
            for (const auto& e : std::filesystem::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".txt")
                    found.push_back(e.path().string());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }
    if (files.empty()) throw ValidationError("no map files found");
    LoadedMaps out;
    for (const std::string& f : files) {
        out.maps.push_back(load_map(f));
        out.refs.push_back(f);
    }
    return out;
}

// Start pose: the map's start marker when present, otherwise a seeded draw
// from the free cells that can reach a target.
Pose pick_start(const GridMap& map, uint64_t episode_seed) {
    if (!map.start_cells.empty()) {
        Point c = map.center(map.start_cells.front());
        return Pose{c.x, c.y, 0};
    }
    std::vector<double> field = target_distance_field(map);
    std::vector<Cell> eligible;
    for (int r = 0; r < map.height; ++r)
        for (int c = 0; c < map.width; ++c)
            if (map.free(Cell{c, r}) && std::isfinite(field[map.index(Cell{c, r})]))
                eligible.push_back(Cell{c, r});
    if (eligible.empty()) throw ValidationError("map has no start candidates");
    Rng rng = make_stream(episode_seed, "start", 0);
    Point c = map.center(eligible[rng.uniform_int(0, static_cast<int>(eligible.size()) - 1)]);
    return Pose{c.x, c.y, 0};
}

struct PolicyChoice {
    std::string policy = "greedy";
    std::string reasoner = "stub";
    double noise = 0.1;
    int reason_tokens = kDefaultReasoningTokens;
};

std::unique_ptr<Policy> make_policy(const PolicyChoice& pc, const EpisodeSetup& setup) {
    if (pc.policy == "oracle") return std::make_unique<OraclePolicy>();
    if (pc.policy == "stuck") return std::make_unique<StuckPolicy>();
    return std::make_unique<GreedyPolicy>(pc.noise, make_stream(setup.seed, "policy", 0));
}

std::unique_ptr<Reasoner> make_reasoner(const PolicyChoice& pc, const EpisodeSetup&) {
    if (pc.reasoner == "replan") return std::make_unique<ReplanReasoner>(pc.reason_tokens);
    return std::make_unique<StubReasoner>(pc.reason_tokens);
}

MapResolver make_resolver(std::map<std::string, GridMap>& cache, const std::string& map_root) {
    return [&cache, map_root](const std::string& ref) -> const GridMap& {
        auto it = cache.find(ref);
        if (it != cache.end()) return it->second;
        std::string path = map_root.empty() ? ref : map_root + "/" + ref;
        auto [pos, inserted] = cache.emplace(ref, load_map(path));
        return pos->second;
    };
}

void echo_config(const std::string& out_dir, const nlohmann::json& cfg) {
    atomic_write_file(out_dir + "/config.json", cfg.dump(2) + "\n");
}

// --- map-gen ----------------------------------------------------------------

struct MapGenArgs {
    std::string out;
    int count = 1;
    uint64_t seed = 1;
    MapGenSpec spec;
};

int cmd_map_gen(const MapGenArgs& a) {
    try {
        a.spec.validate();
        if (a.count < 1) throw ValidationError("count must be >= 1");
    } catch (const Error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    try {
        for (int i = 0; i < a.count; ++i) {
            MapGenSpec spec = a.spec;
            spec.seed = derive_seed(a.seed, "map", i);
            GridMap map = generate_map(spec);
            char name[32];
            std::snprintf(name, sizeof name, "map_%03d.txt", i);
            atomic_write_file(a.out + "/" + name, serialize_map(map));
        }
        nlohmann::json cfg{{"command", "map-gen"},
                           {"count", a.count},
                           {"seed", a.seed},
                           {"width", a.spec.width},
                           {"height", a.spec.height},
                           {"density", a.spec.density},
                           {"targets", a.spec.n_targets},
                           {"min_geodesic", a.spec.min_geodesic},
                           {"resolution", a.spec.resolution}};
        echo_config(a.out, cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "map-gen failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

// --- rollout ----------------------------------------------------------------

struct RolloutArgs {
    std::vector<std::string> maps;
    std::string out;
    int episodes = 0;  // 0: one per map
    uint64_t seed = 1;
    int jobs = 1;
    PolicyChoice pc;
    std::string schedule = "adaptive";
    bool no_detectors = false;
    RunConfig run;
    StagnationConfig stag;
    TimeModel tm;
};

Episode run_one(const GridMap& map, const std::string& ref, int index, const RolloutArgs& a) {
    EpisodeSetup setup;
    setup.map_ref = ref;
    setup.seed = derive_seed(a.seed, "episode", index);
    setup.start = pick_start(map, setup.seed);
    setup.goal = map.targets().front();
    std::unique_ptr<Policy> policy = make_policy(a.pc, setup);
    std::unique_ptr<Reasoner> reasoner = make_reasoner(a.pc, setup);
    RunConfig rc = a.run;
    rc.schedule = a.schedule == "dense" ? Schedule::DenseEveryStep : Schedule::Adaptive;
    if (a.no_detectors || rc.schedule == Schedule::DenseEveryStep)
        return run_episode(map, setup, *policy, *reasoner, rc);
    return rollout_with_stagnation(map, setup, *policy, *reasoner, rc, a.stag);
}

int cmd_rollout(const RolloutArgs& a) {
    if (a.episodes < 0 || a.jobs < 1) {
        std::fprintf(stderr, "config error: episodes and jobs must be positive\n");
        return kExitConfig;
    }
    try {
        LoadedMaps lm = load_maps(a.maps);
        int n = a.episodes > 0 ? a.episodes : static_cast<int>(lm.maps.size());
        std::vector<Episode> episodes(static_cast<size_t>(n));
        parallel_for(n, a.jobs, [&](int i) {
            size_t mi = static_cast<size_t>(i) % lm.maps.size();
            episodes[static_cast<size_t>(i)] = run_one(lm.maps[mi], lm.refs[mi], i, a);
        });
        write_episode_jsonl(a.out + "/episodes.jsonl", episodes);

        std::map<std::string, GridMap> cache;
        for (size_t i = 0; i < lm.maps.size(); ++i) cache.emplace(lm.refs[i], lm.maps[i]);
        MetricsReport rep = evaluate(episodes, make_resolver(cache, ""), a.tm);
        write_metrics_csv(a.out + "/metrics.csv", rep);

        nlohmann::json cfg{{"command", "rollout"},
                           {"maps", a.maps},
                           {"episodes", n},
                           {"seed", a.seed},
                           {"jobs", a.jobs},
                           {"policy", a.pc.policy},
                           {"reasoner", a.pc.reasoner},
                           {"noise", a.pc.noise},
                           {"reason_tokens", a.pc.reason_tokens},
                           {"schedule", a.schedule},
                           {"detectors", !a.no_detectors},
                           {"max_steps", a.run.max_steps},
                           {"action_tokens", a.run.action_tokens},
                           {"max_landmarks", a.run.max_landmarks},
                           {"tau", a.tm.tau}};
        echo_config(a.out, cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "rollout failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
    std::vector<std::string> maps;
    std::string out;
    uint64_t seed = 1;
    int jobs = 1;
    int seg_len = 16;
    int episodes = 0;
    PolicyChoice pc;
    RunConfig run;
    StagnationConfig stag;
};

// Shortest-path trajectory to the designated goal: compiled plan replayed
// open loop, no observation stops.
Episode shortest_trajectory(const GridMap& map, const std::string& ref, uint64_t seed,
                            int action_tokens) {
    EpisodeSetup setup;
    setup.seed = seed;
    setup.start = pick_start(map, seed);
    setup.goal = map.targets().front();
    Episode ep;
    ep.map_ref = ref;
    ep.seed = seed;
    ep.goal = setup.goal;
    AstarResult ar = astar(map, setup.start.point(), setup.goal);
    std::vector<Point> waypoints;
    for (size_t k = 1; k < ar.path.size(); ++k) waypoints.push_back(map.center(ar.path[k]));
    std::vector<MetaAction> acts = compile_along(map, setup.start, waypoints).actions;
    Pose end_pose = detail::append_replayed(map, setup.start, acts, action_tokens, ep.steps);
    StepRecord end_rec;
    end_rec.pose = end_pose;
    end_rec.action = MetaAction::End;
    end_rec.mode = Mode::Fast;
    end_rec.reasoning_tokens = 0;
    end_rec.action_tokens = action_tokens;
    end_rec.events = {Event::Terminated};
    ep.steps.push_back(end_rec);
    double d = geodesic_distance_to_targets(map, end_pose.point());
    ep.outcome = d <= kSuccessRadius ? Outcome::Success : Outcome::Misidentification;
    return ep;
}

int cmd_synth_stage1(const SynthArgs& a) {
    try {
        LoadedMaps lm = load_maps(a.maps);
        int n = static_cast<int>(lm.maps.size());
        std::vector<ConversationRecord> records(static_cast<size_t>(n));
        parallel_for(n, a.jobs, [&](int i) {
            size_t mi = static_cast<size_t>(i);
            Episode ep = shortest_trajectory(lm.maps[mi], lm.refs[mi],
                                             derive_seed(a.seed, "episode", i),
                                             a.run.action_tokens);
            records[mi] = format_stage1(lm.maps[mi], ep);
        });
        write_stage1_jsonl(a.out + "/stage1.jsonl", records);
        atomic_write_file(a.out + "/stage1_system.txt", std::string(kStage1SystemInstruction) + "\n");
        echo_config(a.out, nlohmann::json{{"command", "synth stage1"},
                                          {"maps", a.maps},
                                          {"seed", a.seed},
                                          {"jobs", a.jobs}});
    } catch (const Error& e) {
        std::fprintf(stderr, "synth stage1 failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

int cmd_synth_stage2(const SynthArgs& a) {
    if (a.seg_len < 1) {
        std::fprintf(stderr, "config error: seg-len must be >= 1\n");
        return kExitConfig;
    }
    try {
        LoadedMaps lm = load_maps(a.maps);
        int n = static_cast<int>(lm.maps.size());
        std::vector<std::vector<SegmentRecord>> per_map(static_cast<size_t>(n));
        parallel_for(n, a.jobs, [&](int i) {
            size_t mi = static_cast<size_t>(i);
            uint64_t es = derive_seed(a.seed, "episode", i);
            Pose start = pick_start(lm.maps[mi], es);
            Point goal = lm.maps[mi].targets().front();
            Episode traj = build_exploration_trajectory(lm.maps[mi], start.point(), goal,
                                                        lm.refs[mi], a.run.action_tokens);
            traj.seed = es;
            StubReasoner reasoner(a.pc.reason_tokens);
            per_map[mi] = segment_stage2(lm.maps[mi], traj, reasoner, a.seg_len);
        });
        std::vector<SegmentRecord> records;
        for (auto& v : per_map)
            for (auto& r : v) records.push_back(std::move(r));
        write_stage2_jsonl(a.out + "/stage2.jsonl", records);
        atomic_write_file(a.out + "/stage2_system.txt", std::string(kStage2SystemInstruction) + "\n");
        echo_config(a.out, nlohmann::json{{"command", "synth stage2"},
                                          {"maps", a.maps},
                                          {"seed", a.seed},
                                          {"jobs", a.jobs},
                                          {"seg_len", a.seg_len},
                                          {"reason_tokens", a.pc.reason_tokens}});
    } catch (const Error& e) {
        std::fprintf(stderr, "synth stage2 failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

void write_round_csv(const std::string& path, const RoundReport& rr) {
    std::string text = "metric,value\n";
    text += "total," + std::to_string(rr.total) + "\n";
    text += "kept," + std::to_string(rr.kept) + "\n";
    text += "repaired," + std::to_string(rr.repaired) + "\n";
    text += "dropped_length," + std::to_string(rr.dropped_length) + "\n";
    text += "dropped_splice," + std::to_string(rr.dropped_splice) + "\n";
    text += "dropped_disconnected," + std::to_string(rr.dropped_disconnected) + "\n";
    text += "emitted," + std::to_string(rr.emitted()) + "\n";
    atomic_write_file(path, text);
}

int cmd_synth_irft(const SynthArgs& a) {
    if (a.jobs < 1) {
        std::fprintf(stderr, "config error: jobs must be >= 1\n");
        return kExitConfig;
    }
    try {
        LoadedMaps lm = load_maps(a.maps);
        int n = a.episodes > 0 ? a.episodes : static_cast<int>(lm.maps.size());

        struct Slot {
            Episode ep;
            bool emit = false;
            RepairVariant variant = RepairVariant::Dropped;
            std::string drop_reason;
        };
        std::vector<Slot> slots(static_cast<size_t>(n));
        // Mirrors the serial collect-and-repair round, one slot per rollout,
        // so --jobs cannot reorder or change the output.
        parallel_for(n, a.jobs, [&](int i) {
            size_t mi = static_cast<size_t>(i) % lm.maps.size();
            const GridMap& map = lm.maps[mi];
            EpisodeSetup setup;
            setup.map_ref = lm.refs[mi];
            setup.seed = derive_seed(a.seed, "episode", i);
            setup.start = pick_start(map, setup.seed);
            setup.goal = map.targets().front();
            std::unique_ptr<Policy> policy = make_policy(a.pc, setup);
            std::unique_ptr<Reasoner> reasoner = make_reasoner(a.pc, setup);
            Episode ep = rollout_with_stagnation(map, setup, *policy, *reasoner, a.run, a.stag);
            Slot& s = slots[static_cast<size_t>(i)];
            if (classify_failure(ep, map, a.run.success_radius) == Outcome::Success) {
                s.ep = std::move(ep);
                s.emit = true;
                s.variant = RepairVariant::KeptAsIs;
                return;
            }
            Episode fixed;
            RepairOutcome rc = repair(ep, map, *reasoner, &fixed, a.stag, a.run);
            s.variant = rc.variant;
            s.drop_reason = rc.drop_reason;
            if (rc.variant != RepairVariant::Dropped) {
                s.ep = std::move(fixed);
                s.emit = true;
            }
        });

        RoundReport rr;
        std::vector<Episode> out;
        for (Slot& s : slots) {
            rr.total += 1;
            if (s.variant == RepairVariant::KeptAsIs && s.emit) {
                rr.kept += 1;
                out.push_back(std::move(s.ep));
            } else if (s.emit) {
                rr.repaired += 1;
                out.push_back(std::move(s.ep));
            } else if (s.drop_reason == "length") {
                rr.dropped_length += 1;
            } else if (s.drop_reason == "disconnected") {
                rr.dropped_disconnected += 1;
            } else {
                rr.dropped_splice += 1;
            }
        }
        write_episode_jsonl(a.out + "/irft.jsonl", out);
        write_round_csv(a.out + "/report.csv", rr);
        echo_config(a.out, nlohmann::json{{"command", "synth irft"},
                                          {"maps", a.maps},
                                          {"episodes", n},
                                          {"seed", a.seed},
                                          {"jobs", a.jobs},
                                          {"policy", a.pc.policy},
                                          {"reasoner", a.pc.reasoner},
                                          {"noise", a.pc.noise}});
    } catch (const Error& e) {
        std::fprintf(stderr, "synth irft failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

// --- eval / sweep-tau -------------------------------------------------------

struct EvalArgs {
    std::string log;
    std::string out;
    std::string map_root;
    TimeModel tm;
    std::vector<double> grid;
};

int cmd_eval(const EvalArgs& a) {
    if (a.tm.tau <= 0.0 || a.tm.move_s <= 0.0 || a.tm.rotate_s <= 0.0 || a.tm.obs_s <= 0.0 ||
        a.tm.stop_s <= 0.0) {
        std::fprintf(stderr, "config error: time model values must be positive\n");
        return kExitConfig;
    }
    try {
        std::vector<Episode> episodes = read_episode_jsonl(a.log);
        std::map<std::string, GridMap> cache;
        MetricsReport rep = evaluate(episodes, make_resolver(cache, a.map_root), a.tm);
        write_metrics_csv(a.out + "/metrics.csv", rep);
        echo_config(a.out, nlohmann::json{{"command", "eval"},
                                          {"log", a.log},
                                          {"map_root", a.map_root},
                                          {"tau", a.tm.tau},
                                          {"move_s", a.tm.move_s},
                                          {"rotate_s", a.tm.rotate_s},
                                          {"obs_s", a.tm.obs_s},
                                          {"stop_s", a.tm.stop_s}});
    } catch (const Error& e) {
        std::fprintf(stderr, "eval failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

int cmd_sweep_tau(const EvalArgs& a) {
    if (a.grid.empty()) {
        std::fprintf(stderr, "config error: tau grid must be nonempty\n");
        return kExitConfig;
    }
    for (double t : a.grid) {
        if (t <= 0.0) {
            std::fprintf(stderr, "config error: tau values must be positive\n");
            return kExitConfig;
        }
    }
    try {
        std::vector<Episode> episodes = read_episode_jsonl(a.log);
        std::map<std::string, GridMap> cache;
        std::vector<TauPoint> sweep =
            tau_sweep(episodes, make_resolver(cache, a.map_root), a.grid, a.tm);
        write_tau_csv(a.out + "/sweep.csv", sweep);
        echo_config(a.out, nlohmann::json{{"command", "sweep-tau"},
                                          {"log", a.log},
                                          {"map_root", a.map_root},
                                          {"grid", a.grid}});
    } catch (const Error& e) {
        std::fprintf(stderr, "sweep-tau failed: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid navigation toolkit: simulation, data synthesis, evaluation"};
    app.require_subcommand(1);

    // map-gen
    MapGenArgs mg;
    CLI::App* c_mapgen = app.add_subcommand("map-gen", "generate random connected maps");
    c_mapgen->add_option("--out", mg.out, "output directory")->required();
    c_mapgen->add_option("--count", mg.count, "number of maps");
    c_mapgen->add_option("--seed", mg.seed, "root seed");
    c_mapgen->add_option("--width", mg.spec.width, "map width in cells");
    c_mapgen->add_option("--height", mg.spec.height, "map height in cells");
    c_mapgen->add_option("--density", mg.spec.density, "obstacle density in [0, 0.5]");
    c_mapgen->add_option("--targets", mg.spec.n_targets, "targets per map");
    c_mapgen->add_option("--min-geodesic", mg.spec.min_geodesic, "min start-target distance (m)");
    c_mapgen->add_option("--resolution", mg.spec.resolution, "meters per cell");

    // rollout
    RolloutArgs ro;
    CLI::App* c_rollout = app.add_subcommand("rollout", "run navigation episodes");
    c_rollout->add_option("--maps", ro.maps, "map files")->required()->expected(-1);
    c_rollout->add_option("--out", ro.out, "output directory")->required();
    c_rollout->add_option("--episodes", ro.episodes, "episode count (default: one per map)");
    c_rollout->add_option("--seed", ro.seed, "root seed");
    c_rollout->add_option("--jobs", ro.jobs, "parallel workers");
    c_rollout->add_option("--policy", ro.pc.policy, "fast policy")
        ->check(CLI::IsMember({"oracle", "greedy", "stuck"}));
    c_rollout->add_option("--reasoner", ro.pc.reasoner, "slow reasoner")
        ->check(CLI::IsMember({"stub", "replan"}));
    c_rollout->add_option("--noise", ro.pc.noise, "greedy exploration noise");
    c_rollout->add_option("--reason-tokens", ro.pc.reason_tokens, "declared tokens per reasoning");
    c_rollout->add_option("--schedule", ro.schedule, "reasoning schedule")
        ->check(CLI::IsMember({"adaptive", "dense"}));
    c_rollout->add_flag("--no-detectors", ro.no_detectors, "disable stagnation detectors");
    c_rollout->add_option("--max-steps", ro.run.max_steps, "step cap per episode");
    c_rollout->add_option("--action-tokens", ro.run.action_tokens, "tokens per emitted action");
    c_rollout->add_option("--max-landmarks", ro.run.max_landmarks, "memory landmark cap");
    c_rollout->add_option("--tau", ro.tm.tau, "seconds per token for the report");

    // synth
    SynthArgs sy;
    CLI::App* c_synth = app.add_subcommand("synth", "synthesize training datasets");
    c_synth->require_subcommand(1);
    CLI::App* c_s1 = c_synth->add_subcommand("stage1", "shortest-path conversations");
    CLI::App* c_s2 = c_synth->add_subcommand("stage2", "segmented exploration trajectories");
    CLI::App* c_ir = c_synth->add_subcommand("irft", "collect-and-repair episodes");
    for (CLI::App* c : {c_s1, c_s2, c_ir}) {
        c->add_option("--maps", sy.maps, "map files")->required()->expected(-1);
        c->add_option("--out", sy.out, "output directory")->required();
        c->add_option("--seed", sy.seed, "root seed");
        c->add_option("--jobs", sy.jobs, "parallel workers");
    }
    c_s2->add_option("--seg-len", sy.seg_len, "turns per segment");
    c_s2->add_option("--reason-tokens", sy.pc.reason_tokens, "declared tokens per reasoning");
    c_ir->add_option("--episodes", sy.episodes, "rollout count (default: one per map)");
    c_ir->add_option("--policy", sy.pc.policy, "fast policy")
        ->check(CLI::IsMember({"oracle", "greedy", "stuck"}));
    c_ir->add_option("--reasoner", sy.pc.reasoner, "slow reasoner")
        ->check(CLI::IsMember({"stub", "replan"}));
    c_ir->add_option("--noise", sy.pc.noise, "greedy exploration noise");
    c_ir->add_option("--reason-tokens", sy.pc.reason_tokens, "declared tokens per reasoning");

    // eval / sweep-tau
    EvalArgs ev;
    CLI::App* c_eval = app.add_subcommand("eval", "score an episode log");
    c_eval->add_option("--log", ev.log, "episode JSONL")->required();
    c_eval->add_option("--out", ev.out, "output directory")->required();
    c_eval->add_option("--map-root", ev.map_root, "prefix for map references");
    c_eval->add_option("--tau", ev.tm.tau, "seconds per token");
    c_eval->add_option("--move-s", ev.tm.move_s, "seconds per MoveAhead");
    c_eval->add_option("--rotate-s", ev.tm.rotate_s, "seconds per rotation");
    c_eval->add_option("--obs-s", ev.tm.obs_s, "seconds per obs");
    c_eval->add_option("--stop-s", ev.tm.stop_s, "seconds per end");

    EvalArgs sw;
    sw.grid = kDefaultTauGrid;
    CLI::App* c_sweep = app.add_subcommand("sweep-tau", "SOT across a tau grid");
    c_sweep->add_option("--log", sw.log, "episode JSONL")->required();
    c_sweep->add_option("--out", sw.out, "output directory")->required();
    c_sweep->add_option("--map-root", sw.map_root, "prefix for map references");
    c_sweep->add_option("--grid", sw.grid, "tau values")->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (c_mapgen->parsed()) return cmd_map_gen(mg);
    if (c_rollout->parsed()) return cmd_rollout(ro);
    if (c_synth->parsed()) {
        if (c_s1->parsed()) return cmd_synth_stage1(sy);
        if (c_s2->parsed()) return cmd_synth_stage2(sy);
        return cmd_synth_irft(sy);
    }
    if (c_eval->parsed()) return cmd_eval(ev);
    return cmd_sweep_tau(sw);
}
