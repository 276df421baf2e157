#pragma once

#include <cstdint>
#include <optional>

namespace ffnav
{

// Points closer than this to the image plane are treated as not visible.
inline constexpr double kZNear = 0.1;
// Depth magnitudes below this are rejected by the shift predictors.
inline constexpr double kDepthEpsilon = 1e-6;
// Angular speeds below this use the straight-line motion limit.
inline constexpr double kOmegaEpsilon = 1e-9;

// Pinhole camera. Valid when fx, fy > 0 and the principal point lies
// strictly inside the image.
struct CameraIntrinsics
{
  double fx{0.0};
  double fy{0.0};
  double cx{0.0};
  double cy{0.0};
  int width{0};
  int height{0};
};

bool intrinsics_valid(const CameraIntrinsics & intr);

// Planar robot pose, heading in radians normalized to (-pi, pi].
struct Pose2
{
  double x{0.0};
  double y{0.0};
  double heading{0.0};
};

// Camera rigidly attached to the robot: `height` above the ground plane,
// `forward_offset` along the robot's forward axis. The optical axis points
// along the robot heading; image x points right, image y points down.
struct CameraMount
{
  double height{0.0};
  double forward_offset{0.0};
};

// Point landmark in the world frame (z up). Ids are unique within a world.
struct Landmark
{
  std::int64_t id{0};
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

// Unicycle command: linear speed (m/s) and angular speed (rad/s).
struct VelocityCommand
{
  double linear{0.0};
  double angular{0.0};
};

// Continuous (sub-pixel) image coordinates.
struct PixelPoint
{
  double u{0.0};
  double v{0.0};
};

// Point in the camera frame: x right, y down, z forward (meters).
struct CameraPoint
{
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

// Wraps an angle to (-pi, pi].
double normalize_angle(double angle);

// Transforms a world landmark into the camera frame for the given robot
// pose and mount.
CameraPoint to_camera_frame(const Pose2 & robot, const CameraMount & mount, const Landmark & lm);

// Projects a camera-frame point. Returns nullopt when the point is behind
// the near plane (z <= kZNear) or falls outside the image.
std::optional<PixelPoint> project_camera_point(
  const CameraIntrinsics & intr, const CameraPoint & pc);

// Projects a world landmark seen from a robot pose. Composition of
// to_camera_frame and project_camera_point.
std::optional<PixelPoint> project(
  const CameraIntrinsics & intr, const Pose2 & robot, const CameraMount & mount,
  const Landmark & lm);

// Inverse of project_camera_point at a known depth: recovers the
// camera-frame point whose image is `px` at distance `depth` along z.
CameraPoint back_project(const CameraIntrinsics & intr, const PixelPoint & px, double depth);

// Horizontal pixel shift of a camera point caused by the camera advancing
// `delta` meters along its optical axis:
//   du = fx * x * delta / (z * (z - delta)).
// Throws DegenerateDepthError when z or z - delta is within kDepthEpsilon
// of zero.
double predict_translation_shift(
  const CameraIntrinsics & intr, const CameraPoint & pc, double delta);

// Horizontal pixel shift caused by the camera yawing left by `theta`
// (small-angle model, valid for |theta| < pi/2): du = fx * sin(theta).
double predict_rotation_shift(const CameraIntrinsics & intr, double theta);

// Exact unicycle integration over `dt` seconds (arc for |angular| >=
// kOmegaEpsilon, straight line otherwise). dt must be positive.
Pose2 step_unicycle(const Pose2 & pose, const VelocityCommand & cmd, double dt);

}  // namespace ffnav
