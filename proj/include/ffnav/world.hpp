#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ffnav/geometry.hpp"

namespace ffnav
{

// Synthetic sensing noise. All fields are optional degradations; zeros give
// ideal measurements. `rng_seed` roots every per-frame generator.
struct NoiseConfig
{
  double pixel_sigma{0.0};       // std-dev of additive pixel noise (px)
  double descriptor_sigma{0.0};  // per-component descriptor noise before renormalization
  double dropout_prob{0.0};      // chance a visible feature is dropped, in [0, 1]
  double outlier_prob{0.0};      // chance a descriptor is replaced wholesale, in [0, 1]
  // Ground-plane distance beyond which the detector no longer resolves a
  // landmark. Infinity means unlimited. A finite range makes the visible set
  // a sliding window along the route — features enter ahead as others leave
  // the view — which is what lets successive keyframes differ by more than
  // sensor noise on straight, obstacle-free stretches.
  double max_detection_range{std::numeric_limits<double>::infinity()};
  std::uint64_t rng_seed{0};
};

struct Point2
{
  double x{0.0};
  double y{0.0};
};

struct DiscObstacle
{
  double x{0.0};
  double y{0.0};
  double radius{0.0};
};

struct BoxObstacle
{
  double min_x{0.0};
  double min_y{0.0};
  double max_x{0.0};
  double max_y{0.0};
};

struct DynamicWaypoint
{
  double t{0.0};
  double x{0.0};
  double y{0.0};
};

// Disc that moves along a scripted piecewise-linear schedule. Position is
// clamped to the first/last waypoint outside the scripted time range, so the
// obstacle is defined for the entire scenario duration.
struct DynamicDisc
{
  double radius{0.0};
  std::vector<DynamicWaypoint> waypoints;

  Point2 position_at(double time) const;
};

// 2-D obstacle set. Shapes are footprints in the ground plane and are
// treated as full-height occluders by the perception model.
struct ObstacleWorld
{
  std::vector<DiscObstacle> discs;
  std::vector<BoxObstacle> boxes;
  std::vector<DynamicDisc> dynamic_discs;

  bool empty() const { return discs.empty() && boxes.empty() && dynamic_discs.empty(); }

  // True when the open segment (x0,y0)-(x1,y1) crosses any obstacle
  // footprint at `time`.
  bool segment_blocked(double x0, double y0, double x1, double y1, double time) const;

  // Signed distance from a point to the nearest obstacle boundary at
  // `time` (negative inside an obstacle). +inf when the world has no
  // obstacles.
  double distance_to_boundary(double x, double y, double time) const;

  // Distance along a ray to the first obstacle hit, or max_range.
  double cast_ray(
    double x0, double y0, double angle, double time, double max_range) const;
};

// One simulated 360-degree range scan. Bearings are in the robot frame,
// evenly spaced over (-pi, pi]; ranges are clipped at max_range.
struct RangeScan
{
  std::vector<double> angles;
  std::vector<double> ranges;
  int beam_count{0};
  double max_range{0.0};
};

RangeScan raycast_scan(
  const ObstacleWorld & obstacles, const Pose2 & pose, double time, int beam_count,
  double max_range);

// Complete simulated environment: landmarks to observe, obstacles to avoid,
// and the camera that observes them. `default_noise` applies when a
// scenario does not override it.
struct World
{
  CameraIntrinsics intrinsics;
  CameraMount mount;
  NoiseConfig default_noise;
  std::vector<Landmark> landmarks;
  ObstacleWorld obstacles;
};

// Checks structural validity (intrinsics, unique landmark ids, positive
// radii, well-formed dynamic scripts). Throws SchemaError on violation.
void validate_world(const World & world);

World load_world(const std::string & path);
void save_world(const World & world, const std::string & path);

}  // namespace ffnav
