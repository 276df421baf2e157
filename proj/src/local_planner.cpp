#include "ffnav/local_planner.hpp"

#include <algorithm>
#include <cmath>

#include "ffnav/errors.hpp"
#include "json_util.hpp"

namespace ffnav
{

namespace
{

// Keeps pathological configs from allocating unbounded candidate sets.
constexpr long kMaxCandidates = 1000000;

long candidate_count(const PlannerConfig & c)
{
  long count = 1;
  for (int s = 0; s < c.segment_count; ++s) {
    count *= c.angular_sample_count;
    if (count > kMaxCandidates) {
      return -1;
    }
  }
  return count;
}

void validate_planner_config(const PlannerConfig & c)
{
  if (
    c.segment_count < 1 || c.segment_length <= 0.0 || c.linear_speed <= 0.0 ||
    c.max_angular_speed <= 0.0 || c.angular_sample_count < 1 || c.sample_period <= 0.0 ||
    c.grid_extent <= 0.0 || c.grid_resolution <= 0.0 || c.inflation_radius < 0.0) {
    throw ConfigError("planner config out of range");
  }
  if (candidate_count(c) < 0) {
    throw ConfigError("planner config enumerates too many candidates");
  }
}

}  // namespace

CandidateLibrary generate_library(const PlannerConfig & config)
{
  validate_planner_config(config);

  std::vector<double> omegas(config.angular_sample_count);
  if (config.angular_sample_count == 1) {
    omegas[0] = 0.0;
  } else {
    const double step =
      2.0 * config.max_angular_speed / static_cast<double>(config.angular_sample_count - 1);
    for (int i = 0; i < config.angular_sample_count; ++i) {
      omegas[i] = -config.max_angular_speed + step * i;
    }
  }

  const int steps_per_segment = std::max(
    1, static_cast<int>(
         std::llround(config.segment_length / config.linear_speed / config.sample_period)));
  const long total = candidate_count(config);

  CandidateLibrary library;
  library.config = config;
  library.candidates.reserve(total);

  std::vector<int> digits(config.segment_count, 0);
  for (long path_id = 0; path_id < total; ++path_id) {
    // Decode path_id in base angular_sample_count, first segment slowest.
    long rest = path_id;
    for (int s = config.segment_count - 1; s >= 0; --s) {
      digits[s] = static_cast<int>(rest % config.angular_sample_count);
      rest /= config.angular_sample_count;
    }

    TrajectoryCandidate cand;
    cand.path_id = static_cast<int>(path_id);
    cand.group_id = digits[0];
    cand.first_command = VelocityCommand{config.linear_speed, omegas[digits[0]]};
    cand.samples.reserve(1 + config.segment_count * steps_per_segment);
    Pose2 pose;
    cand.samples.push_back(pose);
    for (int s = 0; s < config.segment_count; ++s) {
      const VelocityCommand cmd{config.linear_speed, omegas[digits[s]]};
      for (int k = 0; k < steps_per_segment; ++k) {
        pose = step_unicycle(pose, cmd, config.sample_period);
        cand.samples.push_back(pose);
      }
    }
    library.candidates.push_back(std::move(cand));
  }
  return library;
}

OccupancyGrid::OccupancyGrid(double extent, double resolution, double inflation_radius)
: resolution_(resolution), inflation_radius_(inflation_radius)
{
  if (extent <= 0.0 || resolution <= 0.0 || inflation_radius < 0.0) {
    throw ConfigError("occupancy grid parameters out of range");
  }
  half_ = static_cast<int>(std::floor(extent / (2.0 * resolution)));
  cells_per_side_ = 2 * half_ + 1;
  raw_.assign(static_cast<std::size_t>(cells_per_side_) * cells_per_side_, 0);
  inflated_ = raw_;
}

bool OccupancyGrid::cell_index(double x, double y, int & ix, int & iy) const
{
  ix = static_cast<int>(std::lround(x / resolution_)) + half_;
  iy = static_cast<int>(std::lround(y / resolution_)) + half_;
  return ix >= 0 && ix < cells_per_side_ && iy >= 0 && iy < cells_per_side_;
}

void OccupancyGrid::mark_hit(double x, double y)
{
  int ix = 0;
  int iy = 0;
  if (cell_index(x, y, ix, iy)) {
    raw_[static_cast<std::size_t>(iy) * cells_per_side_ + ix] = 1;
    inflated_[static_cast<std::size_t>(iy) * cells_per_side_ + ix] = 1;
  }
}

void OccupancyGrid::inflate()
{
  // Dilation kernel: every cell-center offset within the inflation radius.
  const int reach = static_cast<int>(std::floor(inflation_radius_ / resolution_));
  std::vector<std::pair<int, int>> kernel;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const double dist = resolution_ * std::hypot(dx, dy);
      if (dist <= inflation_radius_) {
        kernel.emplace_back(dx, dy);
      }
    }
  }
  for (int iy = 0; iy < cells_per_side_; ++iy) {
    for (int ix = 0; ix < cells_per_side_; ++ix) {
      if (!raw_[static_cast<std::size_t>(iy) * cells_per_side_ + ix]) {
        continue;
      }
      for (const auto & [dx, dy] : kernel) {
        const int jx = ix + dx;
        const int jy = iy + dy;
        if (jx >= 0 && jx < cells_per_side_ && jy >= 0 && jy < cells_per_side_) {
          inflated_[static_cast<std::size_t>(jy) * cells_per_side_ + jx] = 1;
        }
      }
    }
  }
}

bool OccupancyGrid::occupied(double x, double y) const
{
  int ix = 0;
  int iy = 0;
  if (!cell_index(x, y, ix, iy)) {
    return false;
  }
  return inflated_[static_cast<std::size_t>(iy) * cells_per_side_ + ix] != 0;
}

bool OccupancyGrid::raw_occupied(double x, double y) const
{
  int ix = 0;
  int iy = 0;
  if (!cell_index(x, y, ix, iy)) {
    return false;
  }
  return raw_[static_cast<std::size_t>(iy) * cells_per_side_ + ix] != 0;
}

OccupancyGrid build_grid(const RangeScan & scan, const PlannerConfig & config)
{
  validate_planner_config(config);
  OccupancyGrid grid(config.grid_extent, config.grid_resolution, config.inflation_radius);
  for (int i = 0; i < scan.beam_count; ++i) {
    const double range = scan.ranges[i];
    if (range < scan.max_range) {
      grid.mark_hit(range * std::cos(scan.angles[i]), range * std::sin(scan.angles[i]));
    }
  }
  grid.inflate();
  return grid;
}

std::vector<int> filter_collisions(const CandidateLibrary & library, const OccupancyGrid & grid)
{
  std::vector<int> feasible;
  feasible.reserve(library.candidates.size());
  for (std::size_t i = 0; i < library.candidates.size(); ++i) {
    bool clear = true;
    for (const Pose2 & sample : library.candidates[i].samples) {
      if (grid.occupied(sample.x, sample.y)) {
        clear = false;
        break;
      }
    }
    if (clear) {
      feasible.push_back(static_cast<int>(i));
    }
  }
  return feasible;
}

double score_candidate(const TrajectoryCandidate & candidate, const GoalPoint & goal)
{
  const Pose2 & end = candidate.samples.back();
  const double goal_angle = std::atan2(goal.y, goal.x);
  const double end_angle = std::atan2(end.y, end.x);
  const double theta = std::abs(normalize_angle(goal_angle - end_angle));
  return 1.0 - std::pow(0.005 * theta, 0.25);
}

int select_best_candidate(
  const CandidateLibrary & library, std::span<const int> feasible, const GoalPoint & goal)
{
  int best = -1;
  double best_score = 0.0;
  double best_omega = 0.0;
  for (int idx : feasible) {
    const TrajectoryCandidate & cand = library.candidates[idx];
    const double score = score_candidate(cand, goal);
    const double omega = std::abs(cand.first_command.angular);
    if (
      best < 0 || score > best_score ||
      (score == best_score && (omega < best_omega ||
                               (omega == best_omega && cand.path_id < library.candidates[best].path_id)))) {
      best = idx;
      best_score = score;
      best_omega = omega;
    }
  }
  return best;
}

VelocityCommand select_command(
  const CandidateLibrary & library, std::span<const int> feasible, const GoalPoint & goal)
{
  const int best = select_best_candidate(library, feasible, goal);
  if (best < 0) {
    return VelocityCommand{0.0, 0.0};
  }
  return library.candidates[best].first_command;
}

namespace
{

constexpr const char * kLibraryFormat = "ffnav-traj-lib";
constexpr int kLibraryVersion = 1;

}  // namespace

CandidateLibrary load_library(const std::string & path)
{
  using jsonio::field;
  const auto j = jsonio::load_json_file(path);
  jsonio::check_format(j, kLibraryFormat, kLibraryVersion);

  CandidateLibrary library;
  const auto & jc = jsonio::require(j, "config");
  library.config = PlannerConfig{
    field<int>(jc, "segment_count"),        field<double>(jc, "segment_length"),
    field<double>(jc, "linear_speed"),      field<double>(jc, "max_angular_speed"),
    field<int>(jc, "angular_sample_count"), field<double>(jc, "sample_period"),
    field<double>(jc, "grid_extent"),       field<double>(jc, "grid_resolution"),
    field<double>(jc, "inflation_radius")};
  validate_planner_config(library.config);

  for (const auto & jk : jsonio::require(j, "candidates")) {
    TrajectoryCandidate cand;
    cand.path_id = field<int>(jk, "path_id");
    cand.group_id = field<int>(jk, "group_id");
    cand.first_command = VelocityCommand{
      field<double>(jk, "first_linear"), field<double>(jk, "first_angular")};
    const auto & js = jsonio::require(jk, "samples");
    for (const auto & jp : js) {
      if (!jp.is_array() || jp.size() != 3) {
        throw SchemaError("candidate sample must be a [x, y, heading] triple");
      }
      cand.samples.push_back(
        Pose2{jp.at(0).get<double>(), jp.at(1).get<double>(), jp.at(2).get<double>()});
    }
    if (cand.samples.empty()) {
      throw SchemaError("candidate carries no samples");
    }
    library.candidates.push_back(std::move(cand));
  }
  return library;
}

void save_library(const CandidateLibrary & library, const std::string & path)
{
  jsonio::json j;
  j["format"] = kLibraryFormat;
  j["version"] = kLibraryVersion;
  j["config"] = {
    {"segment_count", library.config.segment_count},
    {"segment_length", library.config.segment_length},
    {"linear_speed", library.config.linear_speed},
    {"max_angular_speed", library.config.max_angular_speed},
    {"angular_sample_count", library.config.angular_sample_count},
    {"sample_period", library.config.sample_period},
    {"grid_extent", library.config.grid_extent},
    {"grid_resolution", library.config.grid_resolution},
    {"inflation_radius", library.config.inflation_radius}};
  auto & jcs = j["candidates"] = jsonio::json::array();
  for (const auto & cand : library.candidates) {
    jsonio::json js = jsonio::json::array();
    for (const Pose2 & p : cand.samples) {
      js.push_back({p.x, p.y, p.heading});
    }
    jcs.push_back(
      {{"path_id", cand.path_id},
       {"group_id", cand.group_id},
       {"first_linear", cand.first_command.linear},
       {"first_angular", cand.first_command.angular},
       {"samples", std::move(js)}});
  }
  jsonio::save_json_file(j, path);
}

}  // namespace ffnav
