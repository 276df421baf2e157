#include "ffnav/presets.hpp"

#include <cmath>

#include "ffnav/errors.hpp"
#include "ffnav/rng.hpp"

namespace ffnav
{

namespace
{

constexpr std::uint64_t kWorldSalt = 0x776f726c64ull;

struct RouteStation
{
  Point2 position;
  Point2 tangent;  // unit vector along the route
};

struct RouteSpec
{
  std::vector<Point2> control;  // sparse corner-defining points
  std::vector<Point2> dense;    // resampled drivable polyline
};

double segment_length(const Point2 & a, const Point2 & b)
{
  return std::hypot(b.x - a.x, b.y - a.y);
}

/// Replaces each interior corner of a polyline with a circular fillet and
/// resamples the result at roughly `step` spacing. Keeping route curvature
/// at or below 1/radius lets the repeat controller, whose tightest steady
/// turn is a little under a 2 m radius, stay on top of the bends.
std::vector<Point2> round_corners(
  const std::vector<Point2> & control, double radius, double step)
{
  std::vector<Point2> out;
  if (control.size() < 2) {
    throw ConfigError("route needs at least two control points");
  }

  Point2 cursor = control.front();
  out.push_back(cursor);
  auto emit_straight = [&](const Point2 & to) {
    const double len = segment_length(cursor, to);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 1; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      out.push_back(Point2{cursor.x + t * (to.x - cursor.x), cursor.y + t * (to.y - cursor.y)});
    }
    cursor = to;
  };

  for (std::size_t i = 1; i + 1 < control.size(); ++i) {
    const Point2 & a = control[i - 1];
    const Point2 & b = control[i];
    const Point2 & c = control[i + 1];
    const double l1 = segment_length(a, b);
    const double l2 = segment_length(b, c);
    const Point2 u1{(b.x - a.x) / l1, (b.y - a.y) / l1};
    const Point2 u2{(c.x - b.x) / l2, (c.y - b.y) / l2};
    const double cross = u1.x * u2.y - u1.y * u2.x;
    const double dot = std::clamp(u1.x * u2.x + u1.y * u2.y, -1.0, 1.0);
    const double turn = std::atan2(std::abs(cross), dot);
    if (turn < 1e-6) {
      emit_straight(b);
      continue;
    }
    const double trim = std::min({radius * std::tan(turn / 2.0), l1 * 0.5, l2 * 0.5});
    const double r = trim / std::tan(turn / 2.0);
    const Point2 t1{b.x - u1.x * trim, b.y - u1.y * trim};
    const Point2 t2{b.x + u2.x * trim, b.y + u2.y * trim};
    emit_straight(t1);
    // Arc from t1 to t2 around a center offset to the turning side.
    const double side = cross >= 0.0 ? 1.0 : -1.0;
    const Point2 c2{t1.x - side * u1.y * r, t1.y + side * u1.x * r};
    const double a0 = std::atan2(t1.y - c2.y, t1.x - c2.x);
    const int n = std::max(2, static_cast<int>(std::ceil(r * turn / step)));
    for (int k = 1; k <= n; ++k) {
      const double ang = a0 + side * turn * static_cast<double>(k) / n;
      out.push_back(Point2{c2.x + r * std::cos(ang), c2.y + r * std::sin(ang)});
    }
    cursor = t2;
  }
  emit_straight(control.back());
  return out;
}

double route_length(const std::vector<Point2> & path)
{
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    total += segment_length(path[i - 1], path[i]);
  }
  return total;
}

Point2 point_at_length(const std::vector<Point2> & path, double s, Point2 * tangent_out)
{
  double remaining = s;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Point2 & a = path[i - 1];
    const Point2 & b = path[i];
    const double len = segment_length(a, b);
    if (len <= 0.0) {
      continue;
    }
    const Point2 tan{(b.x - a.x) / len, (b.y - a.y) / len};
    if (remaining <= len || i == path.size() - 1) {
      const double t = std::clamp(remaining / len, 0.0, 1.0);
      if (tangent_out) {
        *tangent_out = tan;
      }
      return Point2{a.x + tan.x * len * t, a.y + tan.y * len * t};
    }
    remaining -= len;
  }
  if (tangent_out) {
    *tangent_out = Point2{1.0, 0.0};
  }
  return path.back();
}

/// Walks the polyline and returns stations with the local route tangent,
/// spaced `straight_step` apart on straight stretches and `bend_step` where
/// the tangent turns noticeably across a one-meter window. Keyframes emit
/// off feature-overlap decay, and in a bend the view rotates out from under
/// a keyframe quickly; denser wall texture there keeps successive keyframes
/// sharing enough features that the match-count ramp stays informative.
std::vector<RouteStation> sample_stations(
  const std::vector<Point2> & path, double straight_step, double bend_step)
{
  std::vector<RouteStation> stations;
  const double total = route_length(path);
  double s = straight_step;
  while (s <= total) {
    Point2 tan_here;
    const Point2 pos = point_at_length(path, s, &tan_here);
    Point2 tan_ahead;
    point_at_length(path, std::min(total, s + 0.5), &tan_ahead);
    Point2 tan_behind;
    point_at_length(path, std::max(0.0, s - 0.5), &tan_behind);
    const double turn = std::abs(std::atan2(
      tan_behind.x * tan_ahead.y - tan_behind.y * tan_ahead.x,
      tan_behind.x * tan_ahead.x + tan_behind.y * tan_ahead.y));
    stations.push_back(RouteStation{pos, tan_here});
    s += turn > 0.05 ? bend_step : straight_step;
  }
  return stations;
}

/// Populates the landmark field for a route: textured side walls that run
/// well past the route end, plus a close "docking funnel" and end wall so
/// the final approach sees nearby, translation-sensitive features.
///
/// The walls continue ~10 m beyond the end on purpose. With a finite
/// detection range, fresh wall features enter the visible window as the
/// robot advances — including during the final approach — so each keyframe
/// holds features its predecessor lacks and the repeat tracker's inlier
/// argmax is tied to geometric progress rather than noise realizations.
std::vector<Landmark> build_landmarks(const RouteSpec & route, std::uint64_t seed)
{
  const std::vector<Point2> & path = route.dense;
  Rng rng(mix_seed(seed, kWorldSalt));
  std::vector<Landmark> landmarks;
  std::int64_t next_id = 0;
  auto add = [&](double x, double y, double z) {
    landmarks.push_back(Landmark{next_id++, x, y, z});
  };

  // Extend the wall line straight out past the route end.
  std::vector<Point2> wall_path = path;
  {
    const Point2 & a = path[path.size() - 2];
    const Point2 & b = path.back();
    const double len = segment_length(a, b);
    const Point2 tan{(b.x - a.x) / len, (b.y - a.y) / len};
    wall_path.push_back(Point2{b.x + 10.0 * tan.x, b.y + 10.0 * tan.y});
  }

  // Side walls: three stacked points per station along both walls, jittered
  // so the field is only statistically symmetric. Texture additions near
  // the route must keep the left/right feature mass balanced in the forward
  // view: the servo reads mean flow, and one-sided density turns plain
  // forward-motion image expansion into a phantom turn vote.
  const double wall_offset = 2.0;
  const double heights[3] = {0.7, 1.3, 1.9};
  for (const auto & st : sample_stations(wall_path, 0.45, 0.25)) {
    const Point2 n{-st.tangent.y, st.tangent.x};
    for (double side : {1.0, -1.0}) {
      const double px = st.position.x + side * wall_offset * n.x + 0.15 * rng.gaussian();
      const double py = st.position.y + side * wall_offset * n.y + 0.15 * rng.gaussian();
      for (double h : heights) {
        add(px + 0.05 * rng.gaussian(), py + 0.05 * rng.gaussian(), h + 0.1 * rng.gaussian());
      }
    }
  }

  // Approach colonnade: column pairs flanking the last ~9 m of the route,
  // much nearer than the side walls. The steering servo nulls mean flow,
  // and flow per meter of lateral offset falls off with feature depth, so
  // against far walls alone the servo tolerates half a meter of sideways
  // drift (its turn vote needs ~24 px) and re-centers with a ~7 m length
  // constant — too lazy to absorb a corner exit before the route ends.
  // Near columns multiply pixels-per-meter, shrinking both the dead zone
  // and the convergence length so the final approach actually re-centers.
  const double total = route_length(path);
  Point2 end_tan;
  const Point2 end_for_gate = point_at_length(path, total, &end_tan);
  const Point2 gate_n{-end_tan.y, end_tan.x};
  for (double back : {1.2, 2.2, 3.2, 4.2, 5.2, 6.2, 7.2, 8.2, 9.2}) {
    if (back >= total) {
      break;
    }
    Point2 t_in;
    const Point2 q = point_at_length(path, total - back, &t_in);
    const Point2 n_in{-t_in.y, t_in.x};
    for (double side : {1.2, -1.2}) {
      for (double h : {0.3, 0.6, 0.9}) {
        add(
          q.x + side * n_in.x + 0.02 * rng.gaussian(),
          q.y + side * n_in.y + 0.02 * rng.gaussian(), h + 0.03 * rng.gaussian());
      }
    }
  }
  // Arrival wall: a feature plane placed so it sits just inside detection
  // range from the route end and nowhere earlier. Only the final keyframe
  // (closed at the end pose) contains its features, so the match count for
  // that keyframe stays structurally short of its predecessor's until the
  // robot is within the last few decimeters. The tracker's advance to the
  // final keyframe — and with it the finish check — is thereby gated by
  // geometry rather than by count noise, which otherwise lets the run
  // finish early anywhere the last two counts run close.
  {
    const double wx = end_for_gate.x + 6.7 * end_tan.x;
    const double wy = end_for_gate.y + 6.7 * end_tan.y;
    for (int col = -3; col <= 3; ++col) {
      for (double h : heights) {
        add(
          wx + 0.5 * col * gate_n.x + 0.02 * rng.gaussian(),
          wy + 0.5 * col * gate_n.y + 0.02 * rng.gaussian(), h + 0.03 * rng.gaussian());
      }
    }
  }

  // Facing walls: approaching a sharp corner, the camera points past the
  // turn where the route's own side walls are oblique, nearly edge-on, and
  // the next leg's walls are still outside the field of view, so the frames
  // just before the bend starve for features. A textured plane square to
  // the approach direction, a few meters beyond the corner, keeps those
  // frames rich; it sits far enough out that its own too-close dead zone
  // opens only past the apex, where the turned camera no longer faces it.
  for (std::size_t i = 1; i + 1 < route.control.size(); ++i) {
    const Point2 & a = route.control[i - 1];
    const Point2 & b = route.control[i];
    const Point2 & c = route.control[i + 1];
    const double l1 = segment_length(a, b);
    const double l2 = segment_length(b, c);
    if (l1 <= 0.0 || l2 <= 0.0) {
      continue;
    }
    const Point2 u1{(b.x - a.x) / l1, (b.y - a.y) / l1};
    const Point2 u2{(c.x - b.x) / l2, (c.y - b.y) / l2};
    const double cross = u1.x * u2.y - u1.y * u2.x;
    const double dot = u1.x * u2.x + u1.y * u2.y;
    if (std::atan2(std::abs(cross), dot) < 0.52) {  // only bends sharper than ~30 deg
      continue;
    }
    const Point2 n1{-u1.y, u1.x};
    for (int k = -3; k <= 3; ++k) {
      const double lx = 0.5 * k;
      const double wx = b.x + 3.0 * u1.x + lx * n1.x;
      const double wy = b.y + 3.0 * u1.y + lx * n1.y;
      for (double h : heights) {
        add(wx + 0.05 * rng.gaussian(), wy + 0.05 * rng.gaussian(), h + 0.1 * rng.gaussian());
      }
    }
  }

  return landmarks;
}

std::vector<TeachWaypoint> to_teach_path(const std::vector<Point2> & path, double speed)
{
  std::vector<TeachWaypoint> wps;
  wps.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    TeachWaypoint wp;
    const Point2 & p = path[i];
    const Point2 & q = path[std::min(i + 1, path.size() - 1)];
    const Point2 & prev = path[i == 0 ? 0 : i - 1];
    const double heading =
      i + 1 < path.size() ? std::atan2(q.y - p.y, q.x - p.x) : std::atan2(p.y - prev.y, p.x - prev.x);
    wp.pose = Pose2{p.x, p.y, heading};
    // Slow down through bends: the view turns over quickly there (rotation
    // plus a short detection window), and keyframe edges need a healthy
    // match overlap, so give the teach camera more frames per radian.
    const double prev_heading = std::atan2(p.y - prev.y, p.x - prev.x);
    const double ds = std::max(segment_length(prev, p), 1e-6);
    const double curvature =
      i == 0 ? 0.0 : std::abs(normalize_angle(heading - prev_heading)) / ds;
    wp.speed = speed / (1.0 + 3.0 * curvature);
    wps.push_back(wp);
  }
  return wps;
}

RouteSpec route_for(const std::string & name)
{
  if (name == "straight") {
    const std::vector<Point2> control{Point2{0.0, 0.0}, Point2{10.0, 0.0}};
    return RouteSpec{control, round_corners(control, 2.0, 0.5)};
  }
  if (name == "corridor" || name == "corridor_dynamic") {
    // The flow servo turns only while the tracked keyframe's flow exceeds
    // the movement model's deadband, so its usable duty cycle caps the mean
    // curvature it can hold well below the planner's tightest arc. Four
    // meter fillets keep the demanded curvature inside that envelope.
    // Both corners bend the same way. The servo exits a corner still
    // converging back onto the line, i.e. with its heading biased toward
    // the inside of the turn it just finished; a same-direction second
    // corner turns into that bias, an opposing one fights it. Direction
    // reversal is exercised by the S-curve route instead.
    // Legs are long enough for the servo to finish re-centering after each
    // corner: it exits a bend a meter or two wide and converges back with a
    // length constant set by the feature distance (~6 m), and the next
    // corner only engages cleanly when entered without leftover bias.
    const std::vector<Point2> control{
      Point2{0.0, 0.0}, Point2{11.0, 0.0}, Point2{11.0, 18.0}, Point2{-2.0, 18.0}};
    return RouteSpec{control, round_corners(control, 4.0, 0.4)};
  }
  if (name == "scurve") {
    std::vector<Point2> pts;
    for (int i = 0; i <= 40; ++i) {
      const double x = 0.5 * i;
      pts.push_back(Point2{x, 2.5 * std::sin(M_PI * x / 10.0)});
    }
    return RouteSpec{pts, pts};
  }
  throw ConfigError("unknown preset: " + name);
}

}  // namespace

std::vector<std::string> preset_names()
{
  return {"straight", "corridor", "scurve", "corridor_dynamic"};
}

PresetBundle make_preset(const std::string & name, std::uint64_t seed)
{
  const RouteSpec route = route_for(name);

  PresetBundle bundle;
  bundle.name = name;
  bundle.world.intrinsics = CameraIntrinsics{500.0, 500.0, 320.0, 240.0, 640, 480};
  bundle.world.mount = CameraMount{0.4, 0.1};
  bundle.world.default_noise.pixel_sigma = 0.5;
  bundle.world.default_noise.descriptor_sigma = 0.05;
  bundle.world.default_noise.dropout_prob = 0.05;
  bundle.world.default_noise.outlier_prob = 0.02;
  // Detection range sets the depth window every match count integrates
  // over. Shorter range → fewer features shared between neighboring
  // keyframes → steeper count ramps between keyframe stations, which is
  // what keeps the tracker's advance-on-count-argmax locked to progress.
  bundle.world.default_noise.max_detection_range = 7.0;
  bundle.world.default_noise.rng_seed = seed;
  bundle.world.landmarks = build_landmarks(route, seed);

  if (name == "corridor_dynamic") {
    // A disc waits three meters east of the second corridor leg until the
    // (faster) teach pass has gone by, then crosses the leg westward at a
    // walking-ish pace, blocking the lane just as the slower repeat robot
    // approaches — the robot must hold short or arc through the wake.
    // The crossing is one-way on purpose. A disc that parks in-lane can
    // pin an approaching robot flush against the inflated boundary, where
    // every candidate arc starts occupied and the planner deadlocks; one
    // that retreats east can sideswipe a robot squeezing past the flank.
    // Both phases share the scripted clock: the teach robot passes y=9
    // near t=23 s, the repeat robot after t=37 s.
    DynamicDisc disc;
    disc.radius = 0.5;
    disc.waypoints = {
      DynamicWaypoint{0.0, 14.0, 9.0}, DynamicWaypoint{26.0, 14.0, 9.0},
      DynamicWaypoint{56.0, 5.0, 9.0}};
    bundle.world.obstacles.dynamic_discs.push_back(disc);
  }

  Scenario & sc = bundle.scenario;
  sc.rng_seed = seed;
  sc.teach_path = to_teach_path(route.dense, 1.0);
  // Each keyframe hands the repeat servo one keyframe's worth of flow to
  // burn against the movement deadband before the event falls back to
  // straight. A higher emission threshold widens that per-keyframe budget,
  // raising the fraction of the drive spent actually turning; 60 px keeps
  // bends trackable while the inlier-ratio rule still caps keyframe
  // spacing on straights.
  sc.teach.keyframe_flow_threshold = 60.0;
  // ... while the overlap rule caps spacing on straights, where flow grows
  // slowly. The ratio is set low enough that consecutive keyframes sit
  // around a meter apart: between stations the two candidate match counts
  // differ by a near-constant margin proportional to that gap, and the gap
  // must be wide enough that count noise (a few matches rms) cannot close
  // it anywhere along the approach.
  sc.teach.keyframe_inlier_ratio = 0.7;
  // Keyframes keep a spread subsample of their features rather than all of
  // them. An uncapped feature-rich keyframe holds matches from the whole
  // depth window at once, so its count saturates and its successor can
  // never overtake it on approach — the advance argmax then stalls behind
  // it while the robot drives on. The cap also sets the count-noise scale;
  // it stays well below the typical visible count so the kept set still
  // spans the full depth window.
  sc.teach.max_keyframe_features = 40;
  // The corner keyframes of a bend legitimately run lean (oblique walls,
  // short windows): hold tracking down to 8 matches before declaring the
  // frame unusable rather than the looser default.
  sc.tracker.lost_inlier_threshold = 8;
  // Arrival tolerance in pixels of mean flow. The arrival wall gates the
  // final keyframe advance to the last few decimeters, so a flow residual
  // under the steering dead zone (~24 px) carries no position information
  // — demanding less than it only makes the robot overshoot while waiting
  // for a number that will not improve.
  sc.tracker.finish_flow_threshold = 20.0;
  // Repeat pace: the steering primitive is a fixed-rate turn, so a slower
  // pace both tightens its effective turn radius and grants the servo more
  // control ticks per meter; bends hold their line visibly better at 0.5
  // than at 0.6 while the runtime stays well inside the duration budget.
  sc.repeat_speed = 0.5;
  if (name == "corridor_dynamic") {
    // Extra obstacle dilation beyond the robot's own radius: candidate
    // arcs are sampled at a finite period and the grid is cell-quantized,
    // so passing margins need slack on top of the geometric minimum.
    sc.planner.inflation_radius = 0.5;
  }
  if (name == "straight") {
    sc.duration_limit_s = 60.0;
  } else if (name == "scurve") {
    sc.duration_limit_s = 120.0;
  } else {
    sc.duration_limit_s = 200.0;
  }
  validate_world(bundle.world);
  validate_scenario(sc);
  return bundle;
}

}  // namespace ffnav
