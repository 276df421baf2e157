#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ffnav/geometry.hpp"
#include "ffnav/repeat_tracker.hpp"
#include "ffnav/world.hpp"

namespace ffnav
{

struct PlannerConfig
{
  // Candidate paths are segment_count constant-curvature segments of
  // segment_length meters driven at linear_speed.
  int segment_count{3};
  double segment_length{1.0};
  double linear_speed{1.0};
  // Per segment, angular_sample_count angular speeds evenly spaced over
  // [-max_angular_speed, +max_angular_speed].
  double max_angular_speed{M_PI / 3.0};
  int angular_sample_count{13};
  // Pose sampling period along each candidate (s).
  double sample_period{0.1};
  // Robot-centered occupancy grid: square side length, cell size, and
  // obstacle dilation radius (all meters).
  double grid_extent{8.0};
  double grid_resolution{0.05};
  double inflation_radius{0.4};
};

// One precomputed candidate path in the robot frame. samples[0] is the
// origin pose; group_id indexes the first segment's angular speed.
struct TrajectoryCandidate
{
  int path_id{0};
  int group_id{0};
  std::vector<Pose2> samples;
  VelocityCommand first_command;
};

struct CandidateLibrary
{
  std::vector<TrajectoryCandidate> candidates;
  PlannerConfig config;
};

// Enumerates all angular_sample_count^segment_count command sequences.
// path_id orders them with the first segment varying slowest. Throws
// ConfigError on an invalid or oversized configuration.
CandidateLibrary generate_library(const PlannerConfig & config);

// Robot-centered square occupancy grid with an odd cell count, so the
// robot sits on the center cell's center. Coordinates are robot-frame
// meters; cells outside the grid read as free.
class OccupancyGrid
{
public:
  OccupancyGrid(double extent, double resolution, double inflation_radius);

  void mark_hit(double x, double y);
  // Dilates every marked cell by the inflation radius (measured between
  // cell centers). Call once after all hits are marked.
  void inflate();

  bool occupied(double x, double y) const;
  bool raw_occupied(double x, double y) const;

  int cells_per_side() const { return cells_per_side_; }
  double resolution() const { return resolution_; }
  double inflation_radius() const { return inflation_radius_; }

private:
  bool cell_index(double x, double y, int & ix, int & iy) const;

  double resolution_;
  double inflation_radius_;
  int cells_per_side_;
  int half_;
  std::vector<std::uint8_t> raw_;
  std::vector<std::uint8_t> inflated_;
};

// Marks the cell under every scan return closer than max_range, then
// inflates. The scan is interpreted in the robot frame, matching the
// candidate samples.
OccupancyGrid build_grid(const RangeScan & scan, const PlannerConfig & config);

// Indices (into library.candidates) of candidates whose samples all avoid
// inflated cells.
std::vector<int> filter_collisions(const CandidateLibrary & library, const OccupancyGrid & grid);

// Alignment score: 1 - (0.005 * theta)^(1/4) where theta is the absolute
// angle between the goal direction and the candidate's endpoint direction.
// Strictly decreasing in theta; equal-theta candidates score equal.
double score_candidate(const TrajectoryCandidate & candidate, const GoalPoint & goal);

// Best-scoring feasible candidate, ties broken toward the smaller first
// angular speed magnitude and then the smaller path_id. Returns -1 when
// the feasible set is empty.
int select_best_candidate(
  const CandidateLibrary & library, std::span<const int> feasible, const GoalPoint & goal);

// First command of the selected candidate, or a stop command when nothing
// is feasible.
VelocityCommand select_command(
  const CandidateLibrary & library, std::span<const int> feasible, const GoalPoint & goal);

CandidateLibrary load_library(const std::string & path);
void save_library(const CandidateLibrary & library, const std::string & path);

}  // namespace ffnav
