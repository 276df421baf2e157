#include "ffnav/geometry.hpp"

#include <cmath>

#include "ffnav/errors.hpp"

namespace ffnav
{

bool intrinsics_valid(const CameraIntrinsics & intr)
{
  return intr.fx > 0.0 && intr.fy > 0.0 && intr.width > 0 && intr.height > 0 &&
         intr.cx > 0.0 && intr.cx < intr.width && intr.cy > 0.0 && intr.cy < intr.height;
}

double normalize_angle(double angle)
{
  angle = std::fmod(angle, 2.0 * M_PI);
  if (angle <= -M_PI) {
    angle += 2.0 * M_PI;
  } else if (angle > M_PI) {
    angle -= 2.0 * M_PI;
  }
  return angle;
}

CameraPoint to_camera_frame(const Pose2 & robot, const CameraMount & mount, const Landmark & lm)
{
  const double ch = std::cos(robot.heading);
  const double sh = std::sin(robot.heading);
  const double cam_x = robot.x + mount.forward_offset * ch;
  const double cam_y = robot.y + mount.forward_offset * sh;
  const double dx = lm.x - cam_x;
  const double dy = lm.y - cam_y;
  const double dz = lm.z - mount.height;
  // Camera axes in world coordinates: forward = (ch, sh, 0),
  // right = (sh, -ch, 0), down = (0, 0, -1).
  return CameraPoint{dx * sh - dy * ch, -dz, dx * ch + dy * sh};
}

std::optional<PixelPoint> project_camera_point(
  const CameraIntrinsics & intr, const CameraPoint & pc)
{
  if (pc.z <= kZNear) {
    return std::nullopt;
  }
  const double u = intr.fx * (pc.x / pc.z) + intr.cx;
  const double v = intr.fy * (pc.y / pc.z) + intr.cy;
  if (u < 0.0 || u >= intr.width || v < 0.0 || v >= intr.height) {
    return std::nullopt;
  }
  return PixelPoint{u, v};
}

std::optional<PixelPoint> project(
  const CameraIntrinsics & intr, const Pose2 & robot, const CameraMount & mount,
  const Landmark & lm)
{
  return project_camera_point(intr, to_camera_frame(robot, mount, lm));
}

CameraPoint back_project(const CameraIntrinsics & intr, const PixelPoint & px, double depth)
{
  return CameraPoint{(px.u - intr.cx) / intr.fx * depth, (px.v - intr.cy) / intr.fy * depth, depth};
}

double predict_translation_shift(
  const CameraIntrinsics & intr, const CameraPoint & pc, double delta)
{
  const double shifted = pc.z - delta;
  if (std::abs(pc.z) < kDepthEpsilon || std::abs(shifted) < kDepthEpsilon) {
    throw DegenerateDepthError("translation shift undefined at near-zero depth");
  }
  return intr.fx * pc.x * delta / (pc.z * shifted);
}

double predict_rotation_shift(const CameraIntrinsics & intr, double theta)
{
  return intr.fx * std::sin(theta);
}

Pose2 step_unicycle(const Pose2 & pose, const VelocityCommand & cmd, double dt)
{
  const double h = pose.heading;
  if (std::abs(cmd.angular) < kOmegaEpsilon) {
    return Pose2{
      pose.x + cmd.linear * dt * std::cos(h), pose.y + cmd.linear * dt * std::sin(h),
      normalize_angle(h)};
  }
  const double radius = cmd.linear / cmd.angular;
  const double h2 = h + cmd.angular * dt;
  return Pose2{
    pose.x + radius * (std::sin(h2) - std::sin(h)),
    pose.y - radius * (std::cos(h2) - std::cos(h)), normalize_angle(h2)};
}

}  // namespace ffnav
