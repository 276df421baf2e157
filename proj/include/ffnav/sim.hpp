#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ffnav/local_planner.hpp"
#include "ffnav/repeat_tracker.hpp"
#include "ffnav/teach_map.hpp"
#include "ffnav/world.hpp"

namespace ffnav
{

struct TeachWaypoint
{
  Pose2 pose;
  double speed{1.0};
};

struct RobotLimits
{
  double v_max{2.0};
  double omega_max{2.0};
};

// Interval of simulated time during which every repeat frame is emptied,
// modeling a full sensing blackout.
struct Blackout
{
  double start_s{0.0};
  double end_s{0.0};
};

// Everything needed to reproduce one teach-and-repeat experiment on top of
// a world file.
struct Scenario
{
  std::string world_file;
  std::vector<TeachWaypoint> teach_path;
  double control_rate_hz{10.0};
  double duration_limit_s{120.0};
  std::uint64_t rng_seed{1};
  double repeat_speed{0.6};
  double pursuit_lookahead{0.5};
  double goal_tolerance{0.2};
  double robot_radius{0.3};
  int scan_beam_count{720};
  double scan_max_range{10.0};
  RobotLimits limits;
  std::optional<NoiseConfig> noise;  // overrides the world default when set
  std::optional<Blackout> blackout;
  TeachConfig teach;
  TrackerConfig tracker;
  PlannerConfig planner;
  MatchConfig match;
};

void validate_scenario(const Scenario & scenario);
Scenario load_scenario(const std::string & path);
void save_scenario(const Scenario & scenario, const std::string & path);

// Interprets `relative` against the directory containing `anchor_file`
// (absolute paths pass through). Used to resolve a scenario's world file.
std::string path_relative_to(const std::string & anchor_file, const std::string & relative);

// One control tick of a run. Planner fields hold -1 on ticks where the
// planner did not run (teach phase, lost, finished).
struct TickRecord
{
  std::int64_t tick{0};
  double time{0.0};
  Pose2 pose;
  VelocityCommand command;
  TrackStatus status{TrackStatus::kTracking};
  int tracked_index{0};
  int inliers_tracked{0};
  int inliers_next{0};
  double flow_tracked{0.0};
  double flow_next{0.0};
  bool has_flow_next{false};
  MovementDistribution dist;
  MovementEvent event{MovementEvent::kStraight};
  GoalPoint goal;
  int feasible_count{-1};
  int chosen_path_id{-1};
  // Distance to the nearest obstacle boundary minus the robot radius;
  // +inf in an obstacle-free world.
  double clearance{std::numeric_limits<double>::infinity()};
};

struct RunLog
{
  std::string phase;  // "teach" or "repeat"
  std::vector<TickRecord> records;
};

RunLog load_run_log(const std::string & path);
void save_run_log(const RunLog & log, const std::string & path);

// Repeat-quality summary. mean_tick_ms is wall-clock and therefore only
// filled by run_repeat, never by evaluate; all other fields are
// deterministic functions of the logs.
struct Metrics
{
  double end_point_distance{0.0};
  bool path_completed{false};
  double min_clearance{std::numeric_limits<double>::infinity()};
  bool collision{false};
  double mean_tick_ms{0.0};
};

struct TeachResult
{
  KeyframeMap map;
  RunLog log;
};

// Drives the teach path with a pure-pursuit controller at the scenario
// control rate, feeding every frame to a TeachMapBuilder.
TeachResult run_teach(const World & world, const Scenario & scenario);

struct RepeatResult
{
  RunLog log;
  TrackStatus final_status{TrackStatus::kTracking};
  bool completed{false};
  double min_clearance{std::numeric_limits<double>::infinity()};
  bool collision{false};
  double mean_tick_ms{0.0};
};

// Replays the route: per tick observe -> track -> movement probabilities ->
// goal -> scan -> grid -> filter -> command. While lost the robot holds a
// stop command; commands are the library's first commands rescaled to the
// scenario repeat speed (curvature preserved).
RepeatResult run_repeat(
  const World & world, const Scenario & scenario, const KeyframeMap & map,
  const CandidateLibrary & library);

// Computes Metrics from a repeat log and the teach log it replays.
Metrics evaluate(const RunLog & repeat_log, const RunLog & teach_log);

// Tracker-telemetry CSV: tick, tracked index, both flows, both inlier
// counts, event, and the movement probabilities.
void write_trace_csv(const RunLog & log, const std::string & path);

const char * to_string(TrackStatus status);
const char * to_string(MovementEvent event);

}  // namespace ffnav
