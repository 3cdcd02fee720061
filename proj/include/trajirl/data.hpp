#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "trajirl/common.hpp"

namespace trajirl {
namespace data {

struct TrajectoryRecord {
    long frame_id = 0;
    long agent_id = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Parsed trajectory file, sorted by (agent_id, frame_id).
struct RawTrajectoryFile {
    std::string name;
    std::vector<TrajectoryRecord> records;
};

/// One agent's window of consecutive frames. Training windows hold
/// total_len frames; prediction inputs may hold only observed_len.
struct TrajectorySegment {
    long agent_id = 0;
    long start_frame = 0;
    std::vector<Vec2> positions;
};

/// All agents fully covering one window; the unit Algorithm-style training
/// iterates over (every member acts as reference once).
struct Scene {
    std::string id;  // "<video>:<start_frame>"
    long start_frame = 0;
    std::vector<TrajectorySegment> agents;
};

/// One reference agent plus its co-occurring neighbors on the same frames.
struct SceneSample {
    std::string id;  // "<video>:<agent>:<start_frame>"
    TrajectorySegment reference;
    std::vector<TrajectorySegment> neighbors;
};

/// Strict CSV reader for `frame_id,agent_id,x,y`. Reports malformed lines,
/// duplicate (frame, agent) pairs (both line numbers) and non-monotone
/// frames per agent as DataError.
RawTrajectoryFile load_trajectories(const std::filesystem::path& path);

/// Round-trip writer for the same format (shortest-round-trip doubles).
void write_trajectories(const std::filesystem::path& path, const RawTrajectoryFile& raw);

/// Stride-`stride` sliding windows of `total_len` consecutive frames. An
/// agent joins a scene only with a full window; every member is enumerated
/// as reference once.
std::vector<Scene> build_scenes(const RawTrajectoryFile& raw, int total_len = 20,
                                int stride = 1);

std::vector<SceneSample> scene_samples(const std::vector<Scene>& scenes);

/// build_scenes + scene_samples, ordered by (agent_id, start_frame).
std::vector<SceneSample> segment(const RawTrajectoryFile& raw, int total_len = 20,
                                 int stride = 1);

/// Frame-to-frame displacements. offsets[0] is (0,0): x_0 does not exist
/// and the losses never consume it.
std::vector<Vec2> offsets(const TrajectorySegment& seg);

std::pair<std::vector<std::string>, std::string> leave_one_out(
    const std::vector<std::string>& videos, int test_index);

enum class Scenario { Linear, Corridor, Crossing };

Scenario scenario_from_string(const std::string& s);
const char* scenario_name(Scenario s);

struct SynthConfig {
    Scenario scenario = Scenario::Linear;
    int n_scenes = 10;
    int agents_per_scene = 3;
    double speed_min = 0.2;  // meters per frame
    double speed_max = 0.5;
    double interaction_radius = 2.0;
    double noise_sigma = 0.0;
    uint64_t seed = 1;
    int frames_per_scene = 20;

    void validate() const;
};

/// Deterministic multi-agent scenario generator. Scenes occupy disjoint
/// frame ranges so windows never straddle two scenes; positions are
/// quantized to 2^-20 m so offsets of noiseless linear motion are exactly
/// constant and files round-trip bit-exactly.
RawTrajectoryFile synth_generate(const SynthConfig& cfg);

/// All files in a directory (sorted by name), one video per file.
std::vector<RawTrajectoryFile> load_dataset(const std::filesystem::path& dir);

std::vector<Scene> scenes_of_dataset(const std::vector<RawTrajectoryFile>& videos,
                                     int total_len = 20, int stride = 1);

}  // namespace data
}  // namespace trajirl
