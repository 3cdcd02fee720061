#include "trajirl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "trajirl/log.hpp"
#include "trajirl/rng.hpp"

namespace trajirl {
namespace data {

namespace {

constexpr double kGrid = 1048576.0;  // 2^20

double quantize(double v) { return std::round(v * kGrid) / kGrid; }

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::filesystem::path& path, long line) {
    double out = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw DataError(path.string() + ":" + std::to_string(line) +
                        ": malformed number '" + field + "'");
    }
    return out;
}

long parse_long(const std::string& field, const std::filesystem::path& path, long line) {
    long out = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw DataError(path.string() + ":" + std::to_string(line) +
                        ": malformed integer '" + field + "'");
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

}  // namespace

RawTrajectoryFile load_trajectories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    RawTrajectoryFile raw;
    raw.name = path.stem().string();

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file, header expected");
    line_no = 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "frame_id,agent_id,x,y") {
        throw DataError(path.string() + ":1: bad header '" + line +
                        "', expected 'frame_id,agent_id,x,y'");
    }

    std::map<std::pair<long, long>, long> seen;  // (frame, agent) -> line number
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 4) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        TrajectoryRecord rec;
        rec.frame_id = parse_long(fields[0], path, line_no);
        rec.agent_id = parse_long(fields[1], path, line_no);
        rec.x = parse_double(fields[2], path, line_no);
        rec.y = parse_double(fields[3], path, line_no);
        auto key = std::make_pair(rec.frame_id, rec.agent_id);
        auto [it, inserted] = seen.emplace(key, line_no);
        if (!inserted) {
            throw DataError(path.string() + ": duplicate (frame " + std::to_string(rec.frame_id) +
                            ", agent " + std::to_string(rec.agent_id) + ") at lines " +
                            std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        raw.records.push_back(rec);
    }

    std::stable_sort(raw.records.begin(), raw.records.end(),
                     [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
                         return std::tie(a.agent_id, a.frame_id) < std::tie(b.agent_id, b.frame_id);
                     });
    return raw;
}

void write_trajectories(const std::filesystem::path& path, const RawTrajectoryFile& raw) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "frame_id,agent_id,x,y\n";
    for (const auto& r : raw.records) {
        out << r.frame_id << ',' << r.agent_id << ',' << format_double(r.x) << ','
            << format_double(r.y) << '\n';
    }
}

std::vector<Scene> build_scenes(const RawTrajectoryFile& raw, int total_len, int stride) {
    if (stride < 1) throw std::invalid_argument("build_scenes: stride must be >= 1");

    // per-agent contiguous runs, frames must be strictly increasing
    struct AgentTrack {
        long agent_id;
        long first_frame;
        std::vector<Vec2> pos;  // consecutive frames only; gaps split implicitly below
    };
    std::vector<AgentTrack> tracks;
    size_t i = 0;
    const auto& rs = raw.records;
    while (i < rs.size()) {
        size_t j = i;
        while (j + 1 < rs.size() && rs[j + 1].agent_id == rs[i].agent_id) {
            if (rs[j + 1].frame_id <= rs[j].frame_id) {
                throw DataError(raw.name + ": agent " + std::to_string(rs[i].agent_id) +
                                ": non-monotone frames " + std::to_string(rs[j].frame_id) +
                                " -> " + std::to_string(rs[j + 1].frame_id));
            }
            ++j;
        }
        // split the agent's records into gap-free runs
        size_t run_start = i;
        for (size_t k = i; k <= j; ++k) {
            bool last = (k == j);
            bool gap = !last && rs[k + 1].frame_id != rs[k].frame_id + 1;
            if (last || gap) {
                AgentTrack tr;
                tr.agent_id = rs[i].agent_id;
                tr.first_frame = rs[run_start].frame_id;
                for (size_t q = run_start; q <= k; ++q) tr.pos.push_back({rs[q].x, rs[q].y});
                tracks.push_back(std::move(tr));
                run_start = k + 1;
            }
        }
        i = j + 1;
    }

    // windows keyed by start frame
    std::map<long, std::vector<TrajectorySegment>> windows;
    for (const auto& tr : tracks) {
        const long n = static_cast<long>(tr.pos.size());
        if (n < total_len) {
            logf(LogLevel::Debug, "segment: agent %ld run at frame %ld too short (%ld < %d)",
                 tr.agent_id, tr.first_frame, n, total_len);
            continue;
        }
        for (long s = 0; s + total_len <= n; s += stride) {
            TrajectorySegment seg;
            seg.agent_id = tr.agent_id;
            seg.start_frame = tr.first_frame + s;
            seg.positions.assign(tr.pos.begin() + s, tr.pos.begin() + s + total_len);
            windows[seg.start_frame].push_back(std::move(seg));
        }
    }

    std::vector<Scene> scenes;
    scenes.reserve(windows.size());
    for (auto& [start, segs] : windows) {
        std::sort(segs.begin(), segs.end(),
                  [](const TrajectorySegment& a, const TrajectorySegment& b) {
                      return a.agent_id < b.agent_id;
                  });
        Scene sc;
        sc.start_frame = start;
        sc.id = raw.name + ":" + std::to_string(start);
        sc.agents = std::move(segs);
        scenes.push_back(std::move(sc));
    }
    return scenes;
}

std::vector<SceneSample> scene_samples(const std::vector<Scene>& scenes) {
    std::vector<SceneSample> out;
    for (const auto& sc : scenes) {
        for (size_t r = 0; r < sc.agents.size(); ++r) {
            SceneSample s;
            s.reference = sc.agents[r];
            for (size_t n = 0; n < sc.agents.size(); ++n) {
                if (n != r) s.neighbors.push_back(sc.agents[n]);
            }
            s.id = sc.id.substr(0, sc.id.rfind(':')) + ":" +
                   std::to_string(s.reference.agent_id) + ":" +
                   std::to_string(sc.start_frame);
            out.push_back(std::move(s));
        }
    }
    std::sort(out.begin(), out.end(), [](const SceneSample& a, const SceneSample& b) {
        return std::tie(a.reference.agent_id, a.reference.start_frame, a.id) <
               std::tie(b.reference.agent_id, b.reference.start_frame, b.id);
    });
    return out;
}

std::vector<SceneSample> segment(const RawTrajectoryFile& raw, int total_len, int stride) {
    return scene_samples(build_scenes(raw, total_len, stride));
}

std::vector<Vec2> offsets(const TrajectorySegment& seg) {
    std::vector<Vec2> out(seg.positions.size());
    for (size_t t = 1; t < seg.positions.size(); ++t) {
        out[t] = seg.positions[t] - seg.positions[t - 1];
    }
    return out;  // out[0] stays (0,0)
}

std::pair<std::vector<std::string>, std::string> leave_one_out(
    const std::vector<std::string>& videos, int test_index) {
    if (videos.size() < 2) throw std::invalid_argument("leave_one_out: need at least 2 videos");
    if (test_index < 0 || test_index >= static_cast<int>(videos.size())) {
        throw std::invalid_argument("leave_one_out: index " + std::to_string(test_index) +
                                    " out of range for " + std::to_string(videos.size()) +
                                    " videos");
    }
    std::vector<std::string> train;
    for (int k = 0; k < static_cast<int>(videos.size()); ++k) {
        if (k != test_index) train.push_back(videos[k]);
    }
    return {train, videos[test_index]};
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "linear") return Scenario::Linear;
    if (s == "corridor") return Scenario::Corridor;
    if (s == "crossing") return Scenario::Crossing;
    throw std::invalid_argument("unknown scenario '" + s + "' (linear|corridor|crossing)");
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Linear: return "linear";
        case Scenario::Corridor: return "corridor";
        case Scenario::Crossing: return "crossing";
    }
    return "?";
}

void SynthConfig::validate() const {
    if (n_scenes < 1) throw std::invalid_argument("synth: n_scenes must be >= 1");
    if (agents_per_scene < 1) throw std::invalid_argument("synth: agents_per_scene must be >= 1");
    if (speed_min <= 0.0 || speed_max < speed_min) {
        throw std::invalid_argument("synth: speed range invalid");
    }
    if (noise_sigma < 0.0) throw std::invalid_argument("synth: noise_sigma must be >= 0");
    if (frames_per_scene < 2) throw std::invalid_argument("synth: frames_per_scene must be >= 2");
}

namespace {

struct SimAgent {
    Vec2 pos;
    Vec2 vel;      // nominal per-frame velocity
    double lane_y; // corridor/crossing: preferred transverse coordinate
    bool lateral_is_y;
};

// Rule-based avoidance: deflect to the agent's left while a closing
// neighbor is inside the interaction radius, spring back to the lane
// afterwards. Constants chosen so two head-on agents keep > 0.2 m apart.
void avoidance_step(std::vector<SimAgent>& agents, double radius) {
    const double deflect = 0.18;  // m/frame lateral push
    const double spring = 0.25;   // lane return rate
    std::vector<Vec2> next(agents.size());
    for (size_t a = 0; a < agents.size(); ++a) {
        const SimAgent& me = agents[a];
        double push = 0.0;
        for (size_t b = 0; b < agents.size(); ++b) {
            if (b == a) continue;
            Vec2 rel = agents[b].pos - me.pos;
            double dist = rel.norm();
            if (dist >= radius || dist == 0.0) continue;
            Vec2 rel_vel = agents[b].vel - me.vel;
            double closing = rel.x * rel_vel.x + rel.y * rel_vel.y;
            if (closing >= 0.0) continue;  // not approaching
            push += deflect * (1.0 - dist / radius);
        }
        // left of heading
        Vec2 left{-me.vel.y, me.vel.x};
        double ln = left.norm();
        if (ln > 0.0) left = left * (1.0 / ln);
        Vec2 p = me.pos + me.vel + left * push;
        // relax lateral coordinate toward the lane when unpushed
        if (push == 0.0) {
            if (me.lateral_is_y) p.y += spring * (me.lane_y - p.y);
            else p.x += spring * (me.lane_y - p.x);
        }
        next[a] = p;
    }
    for (size_t a = 0; a < agents.size(); ++a) {
        agents[a].vel = next[a] - agents[a].pos;  // actual velocity for the next closing test
        // keep nominal forward speed along the primary axis
        if (agents[a].lateral_is_y) agents[a].vel.x = (agents[a].vel.x >= 0 ? 1 : -1) *
                                                      std::max(std::fabs(agents[a].vel.x), 1e-9);
        agents[a].pos = next[a];
    }
}

}  // namespace

RawTrajectoryFile synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    RawTrajectoryFile raw;
    raw.name = scenario_name(cfg.scenario);

    const long frame_gap = 10;  // keeps windows from straddling scenes
    for (int s = 0; s < cfg.n_scenes; ++s) {
        const long base_frame = static_cast<long>(s) * (cfg.frames_per_scene + frame_gap);
        const long base_agent = static_cast<long>(s) * 1000;

        std::vector<SimAgent> agents;
        for (int a = 0; a < cfg.agents_per_scene; ++a) {
            SimAgent ag;
            const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
            switch (cfg.scenario) {
                case Scenario::Linear: {
                    double heading = rng.uniform(0.0, 6.283185307179586);
                    ag.pos = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
                    ag.vel = {speed * std::cos(heading), speed * std::sin(heading)};
                    ag.lane_y = ag.pos.y;
                    ag.lateral_is_y = true;
                    break;
                }
                case Scenario::Corridor: {
                    // alternate directions; opposing agents share the lane so
                    // head-on encounters happen near the middle of the window
                    bool eastbound = (a % 2 == 0);
                    double lane = rng.uniform(-0.4, 0.4);
                    double along = rng.uniform(2.0, 3.5);
                    ag.vel = {eastbound ? speed : -speed, 0.0};
                    ag.pos = {eastbound ? -along : along, lane};
                    ag.lane_y = lane;
                    ag.lateral_is_y = true;
                    break;
                }
                case Scenario::Crossing: {
                    bool horizontal = (a % 2 == 0);
                    double lane = rng.uniform(-0.4, 0.4);
                    double along = rng.uniform(2.0, 3.5);
                    if (horizontal) {
                        ag.vel = {speed, 0.0};
                        ag.pos = {-along, lane};
                        ag.lane_y = lane;
                        ag.lateral_is_y = true;
                    } else {
                        ag.vel = {0.0, speed};
                        ag.pos = {lane, -along};
                        ag.lane_y = lane;
                        ag.lateral_is_y = false;
                    }
                    break;
                }
            }
            agents.push_back(ag);
        }

        for (int f = 0; f < cfg.frames_per_scene; ++f) {
            for (int a = 0; a < cfg.agents_per_scene; ++a) {
                double nx = agents[a].pos.x;
                double ny = agents[a].pos.y;
                if (cfg.noise_sigma > 0.0) {
                    nx += cfg.noise_sigma * rng.normal();
                    ny += cfg.noise_sigma * rng.normal();
                }
                TrajectoryRecord rec;
                rec.frame_id = base_frame + f;
                rec.agent_id = base_agent + a;
                rec.x = quantize(nx);
                rec.y = quantize(ny);
                raw.records.push_back(rec);
            }
            if (f + 1 < cfg.frames_per_scene) {
                if (cfg.scenario == Scenario::Linear) {
                    for (auto& ag : agents) ag.pos = ag.pos + ag.vel;
                } else {
                    avoidance_step(agents, cfg.interaction_radius);
                }
            }
        }
    }

    std::stable_sort(raw.records.begin(), raw.records.end(),
                     [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
                         return std::tie(a.agent_id, a.frame_id) < std::tie(b.agent_id, b.frame_id);
                     });
    return raw;
}

std::vector<RawTrajectoryFile> load_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("dataset directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .csv files in " + dir.string());
    std::vector<RawTrajectoryFile> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_trajectories(f));
    return out;
}

std::vector<Scene> scenes_of_dataset(const std::vector<RawTrajectoryFile>& videos,
                                     int total_len, int stride) {
    std::vector<Scene> all;
    for (const auto& v : videos) {
        auto scenes = build_scenes(v, total_len, stride);
        all.insert(all.end(), std::make_move_iterator(scenes.begin()),
                   std::make_move_iterator(scenes.end()));
    }
    return all;
}

}  // namespace data
}  // namespace trajirl
