#include "ffnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_util.hpp"

namespace ffnav
{

namespace
{

constexpr double kRayEpsilon = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest t > kRayEpsilon with origin + t*dir on the disc boundary, or inf.
double ray_disc(
  double ox, double oy, double dx, double dy, const Point2 & center, double radius)
{
  const double mx = center.x - ox;
  const double my = center.y - oy;
  const double b = mx * dx + my * dy;
  const double c = mx * mx + my * my - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) {
    return kInf;
  }
  const double root = std::sqrt(disc);
  const double t0 = b - root;
  if (t0 > kRayEpsilon) {
    return t0;
  }
  const double t1 = b + root;
  if (t1 > kRayEpsilon) {
    return t1;
  }
  return kInf;
}

// Slab test. Returns entry distance, or inf when the ray misses the box.
double ray_box(double ox, double oy, double dx, double dy, const BoxObstacle & box)
{
  double tmin = -kInf;
  double tmax = kInf;
  if (std::abs(dx) < 1e-15) {
    if (ox < box.min_x || ox > box.max_x) {
      return kInf;
    }
  } else {
    double t0 = (box.min_x - ox) / dx;
    double t1 = (box.max_x - ox) / dx;
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  }
  if (std::abs(dy) < 1e-15) {
    if (oy < box.min_y || oy > box.max_y) {
      return kInf;
    }
  } else {
    double t0 = (box.min_y - oy) / dy;
    double t1 = (box.max_y - oy) / dy;
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  }
  if (tmax < tmin || tmax < kRayEpsilon) {
    return kInf;
  }
  return tmin > kRayEpsilon ? tmin : tmax;
}

// Minimum distance between the segment a-b and a point.
double segment_point_distance(
  double ax, double ay, double bx, double by, double px, double py)
{
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
  }
  return std::hypot(ax + t * vx - px, ay + t * vy - py);
}

// Liang-Barsky clip of the segment a-b against an axis-aligned box.
bool segment_hits_box(
  double ax, double ay, double bx, double by, const BoxObstacle & box)
{
  const double dx = bx - ax;
  const double dy = by - ay;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {ax - box.min_x, box.max_x - ax, ay - box.min_y, box.max_y - ay};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(p[i]) < 1e-15) {
      if (q[i] < 0.0) {
        return false;
      }
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) {
      return false;
    }
  }
  return true;
}

double box_signed_distance(double x, double y, const BoxObstacle & box)
{
  const double dx = std::max({box.min_x - x, 0.0, x - box.max_x});
  const double dy = std::max({box.min_y - y, 0.0, y - box.max_y});
  if (dx > 0.0 || dy > 0.0) {
    return std::hypot(dx, dy);
  }
  // Inside: negative distance to the nearest face.
  return -std::min({x - box.min_x, box.max_x - x, y - box.min_y, box.max_y - y});
}

}  // namespace

Point2 DynamicDisc::position_at(double time) const
{
  const auto & wps = waypoints;
  if (wps.empty()) {
    return Point2{};
  }
  if (time <= wps.front().t) {
    return Point2{wps.front().x, wps.front().y};
  }
  if (time >= wps.back().t) {
    return Point2{wps.back().x, wps.back().y};
  }
  for (std::size_t i = 1; i < wps.size(); ++i) {
    if (time <= wps[i].t) {
      const auto & a = wps[i - 1];
      const auto & b = wps[i];
      const double span = b.t - a.t;
      const double s = span > 0.0 ? (time - a.t) / span : 1.0;
      return Point2{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
    }
  }
  return Point2{wps.back().x, wps.back().y};
}

bool ObstacleWorld::segment_blocked(
  double x0, double y0, double x1, double y1, double time) const
{
  for (const auto & d : discs) {
    if (segment_point_distance(x0, y0, x1, y1, d.x, d.y) <= d.radius) {
      return true;
    }
  }
  for (const auto & b : boxes) {
    if (segment_hits_box(x0, y0, x1, y1, b)) {
      return true;
    }
  }
  for (const auto & d : dynamic_discs) {
    const Point2 c = d.position_at(time);
    if (segment_point_distance(x0, y0, x1, y1, c.x, c.y) <= d.radius) {
      return true;
    }
  }
  return false;
}

double ObstacleWorld::distance_to_boundary(double x, double y, double time) const
{
  double best = kInf;
  for (const auto & d : discs) {
    best = std::min(best, std::hypot(x - d.x, y - d.y) - d.radius);
  }
  for (const auto & b : boxes) {
    best = std::min(best, box_signed_distance(x, y, b));
  }
  for (const auto & d : dynamic_discs) {
    const Point2 c = d.position_at(time);
    best = std::min(best, std::hypot(x - c.x, y - c.y) - d.radius);
  }
  return best;
}

double ObstacleWorld::cast_ray(
  double x0, double y0, double angle, double time, double max_range) const
{
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  double best = max_range;
  for (const auto & d : discs) {
    best = std::min(best, ray_disc(x0, y0, dx, dy, Point2{d.x, d.y}, d.radius));
  }
  for (const auto & b : boxes) {
    best = std::min(best, ray_box(x0, y0, dx, dy, b));
  }
  for (const auto & d : dynamic_discs) {
    best = std::min(best, ray_disc(x0, y0, dx, dy, d.position_at(time), d.radius));
  }
  return best;
}

RangeScan raycast_scan(
  const ObstacleWorld & obstacles, const Pose2 & pose, double time, int beam_count,
  double max_range)
{
  if (beam_count <= 0 || max_range <= 0.0) {
    throw ConfigError("raycast_scan requires beam_count > 0 and max_range > 0");
  }
  RangeScan scan;
  scan.beam_count = beam_count;
  scan.max_range = max_range;
  scan.angles.resize(beam_count);
  scan.ranges.resize(beam_count);
  for (int i = 0; i < beam_count; ++i) {
    // Robot-frame bearings spanning (-pi, pi], forward beam included when
    // beam_count is even.
    const double bearing = -M_PI + 2.0 * M_PI * (i + 1) / beam_count;
    scan.angles[i] = bearing;
    scan.ranges[i] =
      obstacles.cast_ray(pose.x, pose.y, pose.heading + bearing, time, max_range);
  }
  return scan;
}

void validate_world(const World & world)
{
  if (!intrinsics_valid(world.intrinsics)) {
    throw SchemaError("world: invalid camera intrinsics");
  }
  for (std::size_t i = 1; i < world.landmarks.size(); ++i) {
    if (world.landmarks[i].id <= world.landmarks[i - 1].id) {
      throw SchemaError("world: landmark ids must be unique and sorted ascending");
    }
  }
  const auto & n = world.default_noise;
  if (
    n.pixel_sigma < 0.0 || n.descriptor_sigma < 0.0 || n.dropout_prob < 0.0 ||
    n.dropout_prob > 1.0 || n.outlier_prob < 0.0 || n.outlier_prob > 1.0 ||
    !(n.max_detection_range > 0.0)) {
    throw SchemaError("world: noise config out of range");
  }
  for (const auto & d : world.obstacles.discs) {
    if (d.radius <= 0.0) {
      throw SchemaError("world: disc obstacle radius must be positive");
    }
  }
  for (const auto & b : world.obstacles.boxes) {
    if (b.min_x >= b.max_x || b.min_y >= b.max_y) {
      throw SchemaError("world: box obstacle must have positive extent");
    }
  }
  for (const auto & d : world.obstacles.dynamic_discs) {
    if (d.radius <= 0.0) {
      throw SchemaError("world: dynamic disc radius must be positive");
    }
    if (d.waypoints.empty()) {
      throw SchemaError("world: dynamic disc script must be non-empty");
    }
    for (std::size_t i = 1; i < d.waypoints.size(); ++i) {
      if (d.waypoints[i].t <= d.waypoints[i - 1].t) {
        throw SchemaError("world: dynamic disc script times must be strictly increasing");
      }
    }
  }
}

namespace
{

constexpr const char * kWorldFormat = "ffnav-world";
constexpr int kWorldVersion = 1;

}  // namespace

World load_world(const std::string & path)
{
  using jsonio::field;
  const auto j = jsonio::load_json_file(path);
  jsonio::check_format(j, kWorldFormat, kWorldVersion);

  World world;
  const auto & ji = jsonio::require(j, "intrinsics");
  world.intrinsics = CameraIntrinsics{
    field<double>(ji, "fx"),    field<double>(ji, "fy"),    field<double>(ji, "cx"),
    field<double>(ji, "cy"),    field<int>(ji, "width"),    field<int>(ji, "height")};
  const auto & jm = jsonio::require(j, "mount");
  world.mount = CameraMount{field<double>(jm, "height"), field<double>(jm, "forward_offset")};
  const auto & jn = jsonio::require(j, "noise");
  world.default_noise.pixel_sigma = field<double>(jn, "pixel_sigma");
  world.default_noise.descriptor_sigma = field<double>(jn, "descriptor_sigma");
  world.default_noise.dropout_prob = field<double>(jn, "dropout_prob");
  world.default_noise.outlier_prob = field<double>(jn, "outlier_prob");
  world.default_noise.max_detection_range = jsonio::field_or<double>(
    jn, "max_detection_range", std::numeric_limits<double>::infinity());
  world.default_noise.rng_seed = field<std::uint64_t>(jn, "rng_seed");

  for (const auto & jl : jsonio::require(j, "landmarks")) {
    world.landmarks.push_back(Landmark{
      field<std::int64_t>(jl, "id"), field<double>(jl, "x"), field<double>(jl, "y"),
      field<double>(jl, "z")});
  }

  const auto & jo = jsonio::require(j, "obstacles");
  for (const auto & jd : jsonio::require(jo, "discs")) {
    world.obstacles.discs.push_back(DiscObstacle{
      field<double>(jd, "x"), field<double>(jd, "y"), field<double>(jd, "radius")});
  }
  for (const auto & jb : jsonio::require(jo, "boxes")) {
    world.obstacles.boxes.push_back(BoxObstacle{
      field<double>(jb, "min_x"), field<double>(jb, "min_y"), field<double>(jb, "max_x"),
      field<double>(jb, "max_y")});
  }
  for (const auto & jd : jsonio::require(jo, "dynamic_discs")) {
    DynamicDisc disc;
    disc.radius = field<double>(jd, "radius");
    for (const auto & jw : jsonio::require(jd, "waypoints")) {
      disc.waypoints.push_back(DynamicWaypoint{
        field<double>(jw, "t"), field<double>(jw, "x"), field<double>(jw, "y")});
    }
    world.obstacles.dynamic_discs.push_back(std::move(disc));
  }

  validate_world(world);
  return world;
}

void save_world(const World & world, const std::string & path)
{
  validate_world(world);
  jsonio::json j;
  j["format"] = kWorldFormat;
  j["version"] = kWorldVersion;
  j["intrinsics"] = {
    {"fx", world.intrinsics.fx},       {"fy", world.intrinsics.fy},
    {"cx", world.intrinsics.cx},       {"cy", world.intrinsics.cy},
    {"width", world.intrinsics.width}, {"height", world.intrinsics.height}};
  j["mount"] = {
    {"height", world.mount.height}, {"forward_offset", world.mount.forward_offset}};
  j["noise"] = {
    {"pixel_sigma", world.default_noise.pixel_sigma},
    {"descriptor_sigma", world.default_noise.descriptor_sigma},
    {"dropout_prob", world.default_noise.dropout_prob},
    {"outlier_prob", world.default_noise.outlier_prob},
    {"rng_seed", world.default_noise.rng_seed}};
  // JSON has no literal for infinity, so an unlimited range is expressed by
  // omitting the key.
  if (std::isfinite(world.default_noise.max_detection_range)) {
    j["noise"]["max_detection_range"] = world.default_noise.max_detection_range;
  }
  auto & jl = j["landmarks"] = jsonio::json::array();
  for (const auto & lm : world.landmarks) {
    jl.push_back({{"id", lm.id}, {"x", lm.x}, {"y", lm.y}, {"z", lm.z}});
  }
  auto & jo = j["obstacles"];
  auto & jd = jo["discs"] = jsonio::json::array();
  for (const auto & d : world.obstacles.discs) {
    jd.push_back({{"x", d.x}, {"y", d.y}, {"radius", d.radius}});
  }
  auto & jb = jo["boxes"] = jsonio::json::array();
  for (const auto & b : world.obstacles.boxes) {
    jb.push_back(
      {{"min_x", b.min_x}, {"min_y", b.min_y}, {"max_x", b.max_x}, {"max_y", b.max_y}});
  }
  auto & jdd = jo["dynamic_discs"] = jsonio::json::array();
  for (const auto & d : world.obstacles.dynamic_discs) {
    jsonio::json jw = jsonio::json::array();
    for (const auto & w : d.waypoints) {
      jw.push_back({{"t", w.t}, {"x", w.x}, {"y", w.y}});
    }
    jdd.push_back({{"radius", d.radius}, {"waypoints", std::move(jw)}});
  }
  jsonio::save_json_file(j, path, 1);
}

}  // namespace ffnav
