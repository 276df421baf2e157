#include "ffnav/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ffnav/errors.hpp"
#include "ffnav/rng.hpp"
#include "json_util.hpp"

namespace ffnav
{

namespace
{

constexpr std::uint64_t kTeachSalt = 0x7465616368ull;
constexpr std::uint64_t kRepeatSalt = 0x726570656174ull;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

NoiseConfig effective_noise(
  const World & world, const Scenario & scenario, std::uint64_t phase_salt)
{
  NoiseConfig noise = scenario.noise ? *scenario.noise : world.default_noise;
  noise.rng_seed = mix_seed(scenario.rng_seed, phase_salt);
  return noise;
}

double tick_clearance(
  const World & world, const Scenario & scenario, const Pose2 & pose, double time)
{
  if (world.obstacles.empty()) {
    return kInf;
  }
  return world.obstacles.distance_to_boundary(pose.x, pose.y, time) - scenario.robot_radius;
}

// Pure-pursuit waypoint follower used for the teach drive. Progress along
// the waypoint polyline is monotone, so the controller cannot double back
// on self-approaching paths.
class PurePursuit
{
public:
  PurePursuit(const std::vector<TeachWaypoint> & waypoints, double lookahead, double goal_tol,
              const RobotLimits & limits)
  : waypoints_(waypoints), lookahead_(lookahead), goal_tol_(goal_tol), limits_(limits)
  {
    cumulative_.resize(waypoints_.size(), 0.0);
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
      const auto & a = waypoints_[i - 1].pose;
      const auto & b = waypoints_[i].pose;
      cumulative_[i] = cumulative_[i - 1] + std::hypot(b.x - a.x, b.y - a.y);
    }
  }

  struct Decision
  {
    VelocityCommand command;
    bool done{false};
  };

  Decision step(const Pose2 & pose)
  {
    advance_progress(pose);
    const Pose2 target = point_at(progress_ + lookahead_);
    const Pose2 & goal = waypoints_.back().pose;
    const double dist_to_goal = std::hypot(goal.x - pose.x, goal.y - pose.y);
    if (dist_to_goal <= goal_tol_ && total_length() - progress_ <= lookahead_) {
      return Decision{VelocityCommand{0.0, 0.0}, true};
    }

    const double dx = target.x - pose.x;
    const double dy = target.y - pose.y;
    const double dist = std::hypot(dx, dy);
    const double speed = std::min(segment_speed(), limits_.v_max);
    double omega = 0.0;
    if (dist > 1e-9) {
      const double alpha = normalize_angle(std::atan2(dy, dx) - pose.heading);
      omega = std::clamp(
        2.0 * speed * std::sin(alpha) / dist, -limits_.omega_max, limits_.omega_max);
    }
    return Decision{VelocityCommand{speed, omega}, false};
  }

private:
  double total_length() const { return cumulative_.back(); }

  void advance_progress(const Pose2 & pose)
  {
    double best_s = progress_;
    double best_dist = kInf;
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
      const auto & a = waypoints_[i - 1].pose;
      const auto & b = waypoints_[i].pose;
      const double vx = b.x - a.x;
      const double vy = b.y - a.y;
      const double len2 = vx * vx + vy * vy;
      double t = 0.0;
      if (len2 > 0.0) {
        t = std::clamp(((pose.x - a.x) * vx + (pose.y - a.y) * vy) / len2, 0.0, 1.0);
      }
      const double s = cumulative_[i - 1] + t * std::sqrt(len2);
      if (s + 1e-9 < progress_) {
        continue;  // never move backwards along the route
      }
      const double d = std::hypot(a.x + t * vx - pose.x, a.y + t * vy - pose.y);
      if (d < best_dist) {
        best_dist = d;
        best_s = s;
      }
    }
    progress_ = best_s;
  }

  Pose2 point_at(double s) const
  {
    s = std::clamp(s, 0.0, total_length());
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
      if (s <= cumulative_[i] || i == waypoints_.size() - 1) {
        const auto & a = waypoints_[i - 1].pose;
        const auto & b = waypoints_[i].pose;
        const double span = cumulative_[i] - cumulative_[i - 1];
        const double t = span > 0.0 ? (s - cumulative_[i - 1]) / span : 1.0;
        return Pose2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), 0.0};
      }
    }
    return waypoints_.back().pose;
  }

  double segment_speed() const
  {
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
      if (progress_ <= cumulative_[i]) {
        return waypoints_[i - 1].speed;
      }
    }
    return waypoints_.back().speed;
  }

  const std::vector<TeachWaypoint> & waypoints_;
  double lookahead_;
  double goal_tol_;
  RobotLimits limits_;
  std::vector<double> cumulative_;
  double progress_{0.0};
};

}  // namespace

const char * to_string(TrackStatus status)
{
  switch (status) {
    case TrackStatus::kLost:
      return "lost";
    case TrackStatus::kFinished:
      return "finished";
    case TrackStatus::kTracking:
    default:
      return "tracking";
  }
}

const char * to_string(MovementEvent event)
{
  switch (event) {
    case MovementEvent::kLeft:
      return "left";
    case MovementEvent::kRight:
      return "right";
    case MovementEvent::kStraight:
    default:
      return "straight";
  }
}

namespace
{

TrackStatus status_from_string(const std::string & s)
{
  if (s == "tracking") {
    return TrackStatus::kTracking;
  }
  if (s == "lost") {
    return TrackStatus::kLost;
  }
  if (s == "finished") {
    return TrackStatus::kFinished;
  }
  throw SchemaError("unknown track status: " + s);
}

MovementEvent event_from_string(const std::string & s)
{
  if (s == "straight") {
    return MovementEvent::kStraight;
  }
  if (s == "left") {
    return MovementEvent::kLeft;
  }
  if (s == "right") {
    return MovementEvent::kRight;
  }
  throw SchemaError("unknown movement event: " + s);
}

// Reads whitespace-separated tokens from one log record. Doubles go through
// strtod so that "inf" (teach-phase clearance in an obstacle-free world)
// round-trips; stream extraction would reject it.
class RecordReader
{
public:
  explicit RecordReader(const std::string & line) : stream_(line) {}

  std::string token()
  {
    std::string t;
    if (!(stream_ >> t)) {
      throw SchemaError("truncated run log record");
    }
    return t;
  }

  double number()
  {
    const std::string t = token();
    char * end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') {
      throw SchemaError("bad numeric field in run log: " + t);
    }
    return v;
  }

  std::int64_t integer()
  {
    const std::string t = token();
    char * end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0') {
      throw SchemaError("bad integer field in run log: " + t);
    }
    return v;
  }

  bool exhausted()
  {
    std::string t;
    return !(stream_ >> t);
  }

private:
  std::istringstream stream_;
};

}  // namespace

void validate_scenario(const Scenario & scenario)
{
  if (scenario.teach_path.size() < 2) {
    throw ConfigError("scenario needs at least two teach waypoints");
  }
  for (const auto & wp : scenario.teach_path) {
    if (wp.speed <= 0.0) {
      throw ConfigError("teach waypoint speeds must be positive");
    }
  }
  if (
    scenario.control_rate_hz <= 0.0 || scenario.duration_limit_s <= 0.0 ||
    scenario.repeat_speed <= 0.0 || scenario.pursuit_lookahead <= 0.0 ||
    scenario.goal_tolerance <= 0.0 || scenario.robot_radius < 0.0 ||
    scenario.scan_beam_count <= 0 || scenario.scan_max_range <= 0.0 ||
    scenario.limits.v_max <= 0.0 || scenario.limits.omega_max <= 0.0) {
    throw ConfigError("scenario parameters out of range");
  }
  if (scenario.blackout && scenario.blackout->end_s < scenario.blackout->start_s) {
    throw ConfigError("scenario blackout interval is reversed");
  }
}

namespace
{

constexpr const char * kScenarioFormat = "ffnav-scenario";
constexpr int kScenarioVersion = 1;

NoiseConfig noise_from_json(const jsonio::json & j)
{
  using jsonio::field;
  NoiseConfig n;
  n.pixel_sigma = field<double>(j, "pixel_sigma");
  n.descriptor_sigma = field<double>(j, "descriptor_sigma");
  n.dropout_prob = field<double>(j, "dropout_prob");
  n.outlier_prob = field<double>(j, "outlier_prob");
  n.max_detection_range = jsonio::field_or<double>(
    j, "max_detection_range", std::numeric_limits<double>::infinity());
  n.rng_seed = field<std::uint64_t>(j, "rng_seed");
  return n;
}

jsonio::json noise_to_json(const NoiseConfig & n)
{
  jsonio::json j{
    {"pixel_sigma", n.pixel_sigma},
    {"descriptor_sigma", n.descriptor_sigma},
    {"dropout_prob", n.dropout_prob},
    {"outlier_prob", n.outlier_prob},
    {"rng_seed", n.rng_seed}};
  // An unlimited detection range has no JSON literal; omit the key instead.
  if (std::isfinite(n.max_detection_range)) {
    j["max_detection_range"] = n.max_detection_range;
  }
  return j;
}

}  // namespace

Scenario load_scenario(const std::string & path)
{
  using jsonio::field;
  using jsonio::field_or;
  const auto j = jsonio::load_json_file(path);
  jsonio::check_format(j, kScenarioFormat, kScenarioVersion);

  Scenario sc;
  sc.world_file = field<std::string>(j, "world");
  sc.rng_seed = field<std::uint64_t>(j, "seed");
  for (const auto & jw : jsonio::require(j, "teach_path")) {
    TeachWaypoint wp;
    wp.pose = Pose2{
      field<double>(jw, "x"), field<double>(jw, "y"), field_or<double>(jw, "heading", 0.0)};
    wp.speed = field_or<double>(jw, "speed", 1.0);
    sc.teach_path.push_back(wp);
  }
  sc.control_rate_hz = field_or<double>(j, "control_rate_hz", sc.control_rate_hz);
  sc.duration_limit_s = field_or<double>(j, "duration_limit_s", sc.duration_limit_s);
  sc.repeat_speed = field_or<double>(j, "repeat_speed", sc.repeat_speed);
  sc.pursuit_lookahead = field_or<double>(j, "pursuit_lookahead", sc.pursuit_lookahead);
  sc.goal_tolerance = field_or<double>(j, "goal_tolerance", sc.goal_tolerance);
  sc.robot_radius = field_or<double>(j, "robot_radius", sc.robot_radius);
  sc.scan_beam_count = field_or<int>(j, "scan_beam_count", sc.scan_beam_count);
  sc.scan_max_range = field_or<double>(j, "scan_max_range", sc.scan_max_range);
  if (j.contains("limits")) {
    const auto & jl = j.at("limits");
    sc.limits.v_max = field_or<double>(jl, "v_max", sc.limits.v_max);
    sc.limits.omega_max = field_or<double>(jl, "omega_max", sc.limits.omega_max);
  }
  if (j.contains("noise")) {
    sc.noise = noise_from_json(j.at("noise"));
  }
  if (j.contains("blackout")) {
    const auto & jb = j.at("blackout");
    sc.blackout = Blackout{field<double>(jb, "start_s"), field<double>(jb, "end_s")};
  }
  if (j.contains("teach_config")) {
    const auto & jt = j.at("teach_config");
    sc.teach.keyframe_flow_threshold =
      field_or<double>(jt, "keyframe_flow_threshold", sc.teach.keyframe_flow_threshold);
    sc.teach.keyframe_inlier_ratio =
      field_or<double>(jt, "keyframe_inlier_ratio", sc.teach.keyframe_inlier_ratio);
    sc.teach.min_edge_matches = field_or<int>(jt, "min_edge_matches", sc.teach.min_edge_matches);
    sc.teach.max_keyframe_features =
      field_or<int>(jt, "max_keyframe_features", sc.teach.max_keyframe_features);
    sc.teach.rematch_linked_keyframes =
      field_or<bool>(jt, "rematch_linked_keyframes", sc.teach.rematch_linked_keyframes);
  }
  if (j.contains("tracker_config")) {
    const auto & jt = j.at("tracker_config");
    sc.tracker.lost_inlier_threshold =
      field_or<int>(jt, "lost_inlier_threshold", sc.tracker.lost_inlier_threshold);
    sc.tracker.loop_half_window =
      field_or<int>(jt, "loop_half_window", sc.tracker.loop_half_window);
    sc.tracker.flow_sigma = field_or<double>(jt, "flow_sigma", sc.tracker.flow_sigma);
    sc.tracker.window_weight_sigma =
      field_or<double>(jt, "window_weight_sigma", sc.tracker.window_weight_sigma);
    sc.tracker.finish_flow_threshold =
      field_or<double>(jt, "finish_flow_threshold", sc.tracker.finish_flow_threshold);
  }
  if (j.contains("planner_config")) {
    const auto & jp = j.at("planner_config");
    sc.planner.segment_count = field_or<int>(jp, "segment_count", sc.planner.segment_count);
    sc.planner.segment_length =
      field_or<double>(jp, "segment_length", sc.planner.segment_length);
    sc.planner.linear_speed = field_or<double>(jp, "linear_speed", sc.planner.linear_speed);
    sc.planner.max_angular_speed =
      field_or<double>(jp, "max_angular_speed", sc.planner.max_angular_speed);
    sc.planner.angular_sample_count =
      field_or<int>(jp, "angular_sample_count", sc.planner.angular_sample_count);
    sc.planner.sample_period = field_or<double>(jp, "sample_period", sc.planner.sample_period);
    sc.planner.grid_extent = field_or<double>(jp, "grid_extent", sc.planner.grid_extent);
    sc.planner.grid_resolution =
      field_or<double>(jp, "grid_resolution", sc.planner.grid_resolution);
    sc.planner.inflation_radius =
      field_or<double>(jp, "inflation_radius", sc.planner.inflation_radius);
  }
  if (j.contains("match")) {
    sc.match.lowe_ratio = field_or<double>(j.at("match"), "lowe_ratio", sc.match.lowe_ratio);
  }

  validate_scenario(sc);
  return sc;
}

void save_scenario(const Scenario & sc, const std::string & path)
{
  validate_scenario(sc);
  jsonio::json j;
  j["format"] = kScenarioFormat;
  j["version"] = kScenarioVersion;
  j["world"] = sc.world_file;
  j["seed"] = sc.rng_seed;
  auto & jp = j["teach_path"] = jsonio::json::array();
  for (const auto & wp : sc.teach_path) {
    jp.push_back(
      {{"x", wp.pose.x}, {"y", wp.pose.y}, {"heading", wp.pose.heading}, {"speed", wp.speed}});
  }
  j["control_rate_hz"] = sc.control_rate_hz;
  j["duration_limit_s"] = sc.duration_limit_s;
  j["repeat_speed"] = sc.repeat_speed;
  j["pursuit_lookahead"] = sc.pursuit_lookahead;
  j["goal_tolerance"] = sc.goal_tolerance;
  j["robot_radius"] = sc.robot_radius;
  j["scan_beam_count"] = sc.scan_beam_count;
  j["scan_max_range"] = sc.scan_max_range;
  j["limits"] = {{"v_max", sc.limits.v_max}, {"omega_max", sc.limits.omega_max}};
  if (sc.noise) {
    j["noise"] = noise_to_json(*sc.noise);
  }
  if (sc.blackout) {
    j["blackout"] = {{"start_s", sc.blackout->start_s}, {"end_s", sc.blackout->end_s}};
  }
  j["teach_config"] = {
    {"keyframe_flow_threshold", sc.teach.keyframe_flow_threshold},
    {"keyframe_inlier_ratio", sc.teach.keyframe_inlier_ratio},
    {"min_edge_matches", sc.teach.min_edge_matches},
    {"max_keyframe_features", sc.teach.max_keyframe_features},
    {"rematch_linked_keyframes", sc.teach.rematch_linked_keyframes}};
  j["tracker_config"] = {
    {"lost_inlier_threshold", sc.tracker.lost_inlier_threshold},
    {"loop_half_window", sc.tracker.loop_half_window},
    {"flow_sigma", sc.tracker.flow_sigma},
    {"window_weight_sigma", sc.tracker.window_weight_sigma},
    {"finish_flow_threshold", sc.tracker.finish_flow_threshold}};
  j["planner_config"] = {
    {"segment_count", sc.planner.segment_count},
    {"segment_length", sc.planner.segment_length},
    {"linear_speed", sc.planner.linear_speed},
    {"max_angular_speed", sc.planner.max_angular_speed},
    {"angular_sample_count", sc.planner.angular_sample_count},
    {"sample_period", sc.planner.sample_period},
    {"grid_extent", sc.planner.grid_extent},
    {"grid_resolution", sc.planner.grid_resolution},
    {"inflation_radius", sc.planner.inflation_radius}};
  j["match"] = {{"lowe_ratio", sc.match.lowe_ratio}};
  jsonio::save_json_file(j, path, 1);
}

std::string path_relative_to(const std::string & anchor_file, const std::string & relative)
{
  namespace fs = std::filesystem;
  fs::path rel(relative);
  if (rel.is_absolute()) {
    return rel.string();
  }
  return (fs::path(anchor_file).parent_path() / rel).string();
}

TeachResult run_teach(const World & world, const Scenario & scenario)
{
  validate_scenario(scenario);
  validate_world(world);

  const NoiseConfig noise = effective_noise(world, scenario, kTeachSalt);
  const double dt = 1.0 / scenario.control_rate_hz;
  const auto max_ticks =
    static_cast<std::int64_t>(std::ceil(scenario.duration_limit_s / dt));

  TeachMapBuilder builder(world.intrinsics, scenario.teach, scenario.match);
  PurePursuit pursuit(
    scenario.teach_path, scenario.pursuit_lookahead, scenario.goal_tolerance, scenario.limits);

  TeachResult result;
  result.log.phase = "teach";
  Pose2 pose = scenario.teach_path.front().pose;

  for (std::int64_t tick = 0; tick <= max_ticks; ++tick) {
    const double t = tick * dt;
    const Frame frame = observe(world, pose, noise, t, tick);
    builder.process_frame(frame);
    const auto decision = pursuit.step(pose);

    TickRecord rec;
    rec.tick = tick;
    rec.time = t;
    rec.pose = pose;
    rec.command = decision.command;
    rec.status = TrackStatus::kTracking;
    rec.tracked_index = builder.keyframe_count() - 1;
    rec.inliers_tracked = builder.last_matches();
    rec.flow_tracked = builder.last_flow();
    rec.clearance = tick_clearance(world, scenario, pose, t);
    result.log.records.push_back(rec);

    if (decision.done) {
      break;
    }
    pose = step_unicycle(pose, decision.command, dt);
  }

  result.map = builder.finalize();
  return result;
}

RepeatResult run_repeat(
  const World & world, const Scenario & scenario, const KeyframeMap & map,
  const CandidateLibrary & library)
{
  validate_scenario(scenario);
  validate_world(world);
  validate_map(map);
  if (library.candidates.empty()) {
    throw PreconditionError("candidate library is empty");
  }

  const NoiseConfig noise = effective_noise(world, scenario, kRepeatSalt);
  const double dt = 1.0 / scenario.control_rate_hz;
  const auto max_ticks =
    static_cast<std::int64_t>(std::ceil(scenario.duration_limit_s / dt));
  const double command_scale = scenario.repeat_speed / library.config.linear_speed;

  RepeatTracker tracker(map, scenario.tracker, scenario.match);

  RepeatResult result;
  result.log.phase = "repeat";
  Pose2 pose = scenario.teach_path.front().pose;
  double compute_ms = 0.0;
  std::int64_t ticks_run = 0;

  for (std::int64_t tick = 0; tick <= max_ticks; ++tick) {
    const double t = tick * dt;
    const auto t_start = std::chrono::steady_clock::now();

    Frame frame = observe(world, pose, noise, t, tick);
    if (
      scenario.blackout && t >= scenario.blackout->start_s && t < scenario.blackout->end_s) {
      frame.observations.clear();
    }

    const FlowWindow window = tracker.track(frame);
    const TrackerState & state = tracker.state();
    const MovementDistribution dist = movement_probabilities(window, scenario.tracker);
    const GoalPoint goal = select_goal(dist);

    VelocityCommand cmd{0.0, 0.0};
    int feasible_count = -1;
    int chosen = -1;
    if (state.status == TrackStatus::kTracking) {
      const RangeScan scan = raycast_scan(
        world.obstacles, pose, t, scenario.scan_beam_count, scenario.scan_max_range);
      const OccupancyGrid grid = build_grid(scan, scenario.planner);
      const std::vector<int> feasible = filter_collisions(library, grid);
      feasible_count = static_cast<int>(feasible.size());
      chosen = select_best_candidate(library, feasible, goal);
      if (chosen >= 0) {
        const VelocityCommand & first = library.candidates[chosen].first_command;
        cmd = VelocityCommand{first.linear * command_scale, first.angular * command_scale};
      }
    }

    const auto t_end = std::chrono::steady_clock::now();
    compute_ms += std::chrono::duration<double, std::milli>(t_end - t_start).count();
    ticks_run += 1;

    TickRecord rec;
    rec.tick = tick;
    rec.time = t;
    rec.pose = pose;
    rec.command = cmd;
    rec.status = state.status;
    rec.tracked_index = state.tracked_index;
    rec.inliers_tracked = window.inliers_tracked;
    rec.inliers_next = window.inliers_next;
    rec.flow_tracked = window.flow_tracked;
    rec.flow_next = window.flow_next.value_or(0.0);
    rec.has_flow_next = window.flow_next.has_value();
    rec.dist = dist;
    rec.event = argmax_event(dist);
    rec.goal = goal;
    rec.feasible_count = feasible_count;
    rec.chosen_path_id = chosen >= 0 ? library.candidates[chosen].path_id : -1;
    rec.clearance = tick_clearance(world, scenario, pose, t);
    result.log.records.push_back(rec);

    result.min_clearance = std::min(result.min_clearance, rec.clearance);
    if (rec.clearance <= 0.0) {
      result.collision = true;
      break;
    }
    if (state.status == TrackStatus::kFinished) {
      result.completed = true;
      break;
    }
    pose = step_unicycle(pose, cmd, dt);
  }

  result.final_status = tracker.state().status;
  result.mean_tick_ms = ticks_run > 0 ? compute_ms / static_cast<double>(ticks_run) : 0.0;
  return result;
}

Metrics evaluate(const RunLog & repeat_log, const RunLog & teach_log)
{
  if (repeat_log.records.empty() || teach_log.records.empty()) {
    throw PreconditionError("evaluate requires non-empty logs");
  }
  Metrics metrics;
  const Pose2 & end_repeat = repeat_log.records.back().pose;
  const Pose2 & end_teach = teach_log.records.back().pose;
  metrics.end_point_distance =
    std::hypot(end_repeat.x - end_teach.x, end_repeat.y - end_teach.y);
  metrics.path_completed = repeat_log.records.back().status == TrackStatus::kFinished;
  metrics.min_clearance = kInf;
  for (const auto & rec : repeat_log.records) {
    metrics.min_clearance = std::min(metrics.min_clearance, rec.clearance);
  }
  metrics.collision = metrics.min_clearance <= 0.0;
  metrics.mean_tick_ms = 0.0;
  return metrics;
}

namespace
{

constexpr const char * kRunLogFormat = "ffnav-runlog";
constexpr int kRunLogVersion = 1;

}  // namespace

void save_run_log(const RunLog & log, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open run log for writing: " + path);
  }
  out << "# " << kRunLogFormat << ' ' << kRunLogVersion << ' ' << log.phase << '\n';
  out << "# tick time x y heading v omega status tracked inliers_tracked inliers_next"
         " flow_tracked flow_next has_next p_straight p_left p_right event goal_x goal_y"
         " feasible path_id clearance\n";
  for (const auto & r : log.records) {
    out << r.tick << ' ' << fmt_double(r.time) << ' ' << fmt_double(r.pose.x) << ' '
        << fmt_double(r.pose.y) << ' ' << fmt_double(r.pose.heading) << ' '
        << fmt_double(r.command.linear) << ' ' << fmt_double(r.command.angular) << ' '
        << to_string(r.status) << ' ' << r.tracked_index << ' ' << r.inliers_tracked << ' '
        << r.inliers_next << ' ' << fmt_double(r.flow_tracked) << ' '
        << fmt_double(r.flow_next) << ' ' << (r.has_flow_next ? 1 : 0) << ' '
        << fmt_double(r.dist.straight) << ' ' << fmt_double(r.dist.left) << ' '
        << fmt_double(r.dist.right) << ' ' << to_string(r.event) << ' '
        << fmt_double(r.goal.x) << ' ' << fmt_double(r.goal.y) << ' ' << r.feasible_count
        << ' ' << r.chosen_path_id << ' ' << fmt_double(r.clearance) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

RunLog load_run_log(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open run log for reading: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("run log is empty: " + path);
  }
  std::istringstream header(line);
  std::string hash;
  std::string format;
  int version = 0;
  RunLog log;
  header >> hash >> format >> version >> log.phase;
  if (hash != "#" || format != kRunLogFormat) {
    throw SchemaError("missing run log header: " + path);
  }
  if (version != kRunLogVersion) {
    throw VersionMismatchError(
      "unsupported run log version " + std::to_string(version));
  }
  if (log.phase != "teach" && log.phase != "repeat") {
    throw SchemaError("unknown run log phase: " + log.phase);
  }

  std::int64_t expected_tick = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    RecordReader reader(line);
    TickRecord r;
    r.tick = reader.integer();
    r.time = reader.number();
    r.pose.x = reader.number();
    r.pose.y = reader.number();
    r.pose.heading = reader.number();
    r.command.linear = reader.number();
    r.command.angular = reader.number();
    r.status = status_from_string(reader.token());
    r.tracked_index = static_cast<int>(reader.integer());
    r.inliers_tracked = static_cast<int>(reader.integer());
    r.inliers_next = static_cast<int>(reader.integer());
    r.flow_tracked = reader.number();
    r.flow_next = reader.number();
    r.has_flow_next = reader.integer() != 0;
    r.dist.straight = reader.number();
    r.dist.left = reader.number();
    r.dist.right = reader.number();
    r.event = event_from_string(reader.token());
    r.goal.x = reader.number();
    r.goal.y = reader.number();
    r.feasible_count = static_cast<int>(reader.integer());
    r.chosen_path_id = static_cast<int>(reader.integer());
    r.clearance = reader.number();
    if (!reader.exhausted()) {
      throw SchemaError("trailing fields in run log record: " + line);
    }
    if (r.tick != expected_tick) {
      throw SchemaError("run log ticks must increase by one per record");
    }
    expected_tick += 1;
    log.records.push_back(r);
  }
  return log;
}

void write_trace_csv(const RunLog & log, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open trace for writing: " + path);
  }
  out << "tick,tracked_index,flow_l,flow_l1,inliers_l,inliers_l1,event,"
         "p_straight,p_left,p_right\n";
  for (const auto & r : log.records) {
    out << r.tick << ',' << r.tracked_index << ',' << fmt_double(r.flow_tracked) << ',';
    if (r.has_flow_next) {
      out << fmt_double(r.flow_next);
    }
    out << ',' << r.inliers_tracked << ',' << r.inliers_next << ',' << to_string(r.event)
        << ',' << fmt_double(r.dist.straight) << ',' << fmt_double(r.dist.left) << ','
        << fmt_double(r.dist.right) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace ffnav
