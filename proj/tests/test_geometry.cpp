#include <cmath>
#include <random>

#include "doctest.h"
#include "ffnav/errors.hpp"
#include "ffnav/geometry.hpp"
#include "test_helpers.hpp"

using namespace ffnav;

namespace
{

const CameraIntrinsics kCam = testutil::camera();
const CameraMount kMount = testutil::mount();

}  // namespace

TEST_CASE("optical-axis point projects to the principal point")
{
  const auto px = project_camera_point(kCam, CameraPoint{0.0, 0.0, 5.0});
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(px->v == doctest::Approx(240.0).epsilon(1e-12));
}

TEST_CASE("off-axis point projects by similar triangles")
{
  const auto px = project_camera_point(kCam, CameraPoint{1.0, 0.5, 5.0});
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(420.0).epsilon(1e-12));
  CHECK(px->v == doctest::Approx(290.0).epsilon(1e-12));
}

TEST_CASE("points behind the camera do not project")
{
  CHECK_FALSE(project_camera_point(kCam, CameraPoint{0.0, 0.0, -1.0}).has_value());
  // At or inside the near plane counts as not visible.
  CHECK_FALSE(project_camera_point(kCam, CameraPoint{0.0, 0.0, kZNear}).has_value());
  CHECK(project_camera_point(kCam, CameraPoint{0.0, 0.0, kZNear + 0.01}).has_value());
}

TEST_CASE("points outside the image bounds do not project")
{
  // u = 320 + 500 * 1.0 / 1.0 = 820 > width.
  CHECK_FALSE(project_camera_point(kCam, CameraPoint{1.0, 0.0, 1.0}).has_value());
}

TEST_CASE("world projection composes mount transform and pinhole model")
{
  // Camera sits 0.1 m ahead of the robot at height 0.4; a landmark on the
  // optical axis 5 m from the camera lands on the principal point.
  const auto px = project(kCam, Pose2{0.0, 0.0, 0.0}, kMount, Landmark{7, 5.1, 0.0, 0.4});
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(px->v == doctest::Approx(240.0).epsilon(1e-12));
}

TEST_CASE("left-of-robot landmarks project left of the image center")
{
  const auto px = project(kCam, Pose2{0.0, 0.0, 0.0}, kMount, Landmark{7, 5.0, 0.5, 0.4});
  REQUIRE(px.has_value());
  CHECK(px->u < kCam.cx);
}

TEST_CASE("back-projection inverts projection at known depth")
{
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ux(-1.5, 1.5);
  std::uniform_real_distribution<double> uy(-1.0, 1.0);
  std::uniform_real_distribution<double> uz(0.5, 40.0);
  for (int i = 0; i < 1000; ++i) {
    const CameraPoint pc{ux(rng), uy(rng), uz(rng)};
    const auto px = project_camera_point(kCam, pc);
    if (!px) {
      continue;
    }
    const CameraPoint rec = back_project(kCam, *px, pc.z);
    CHECK(std::abs(rec.x - pc.x) <= 1e-9 * std::max(1.0, std::abs(pc.x)));
    CHECK(std::abs(rec.y - pc.y) <= 1e-9 * std::max(1.0, std::abs(pc.y)));
    CHECK(std::abs(rec.z - pc.z) <= 1e-9 * std::abs(pc.z));
  }
}

TEST_CASE("forward-translation pixel shift closed form")
{
  // du = fx * x * delta / (z * (z - delta)) = 500 * 1 * 1 / (5 * 4) = 25.
  CHECK(
    predict_translation_shift(kCam, CameraPoint{1.0, 0.0, 5.0}, 1.0) ==
    doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("on-axis points do not shift under forward translation")
{
  CHECK(predict_translation_shift(kCam, CameraPoint{0.0, 0.3, 5.0}, 1.0) == 0.0);
}

TEST_CASE("mirrored points shift by exactly opposite amounts")
{
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ux(0.05, 2.0);
  std::uniform_real_distribution<double> uz(2.0, 30.0);
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng);
    const double z = uz(rng);
    const double d = ud(rng);
    const double plus = predict_translation_shift(kCam, CameraPoint{x, 0.0, z}, d);
    const double minus = predict_translation_shift(kCam, CameraPoint{-x, 0.0, z}, d);
    CHECK(plus + minus == 0.0);  // exact odd symmetry, no tolerance
  }
}

TEST_CASE("translation shift rejects degenerate depths")
{
  CHECK_THROWS_AS(
    predict_translation_shift(kCam, CameraPoint{1.0, 0.0, 1.0}, 1.0), DegenerateDepthError);
  CHECK_THROWS_AS(
    predict_translation_shift(kCam, CameraPoint{1.0, 0.0, 1e-9}, 0.5), DegenerateDepthError);
}

TEST_CASE("rotation pixel shift closed form")
{
  CHECK(
    predict_rotation_shift(kCam, 0.1) ==
    doctest::Approx(49.916708323414076).epsilon(1e-12));
  CHECK(predict_rotation_shift(kCam, 0.0) == 0.0);
  CHECK(
    predict_rotation_shift(kCam, -0.1) ==
    doctest::Approx(-49.916708323414076).epsilon(1e-12));
}

TEST_CASE("small-angle rotation model matches true projection within 5 percent")
{
  // For landmarks with |x/z| <= 0.2 and yaw magnitudes up to 0.15 rad, the
  // measured horizontal shift of the true projection stays within 5% of
  // fx * sin(theta).
  for (double theta : {0.05, 0.1, 0.15, -0.05, -0.1, -0.15}) {
    for (double bearing : {-0.04, -0.02, 0.0, 0.02, 0.04}) {
      for (double range : {20.0, 30.0, 40.0}) {
        const Landmark lm{1, range * std::cos(bearing), range * std::sin(bearing), 0.4};
        const auto before = project(kCam, Pose2{0.0, 0.0, 0.0}, kMount, lm);
        const auto after = project(kCam, Pose2{0.0, 0.0, theta}, kMount, lm);
        REQUIRE(before.has_value());
        REQUIRE(after.has_value());
        const double du = after->u - before->u;
        const double predicted = predict_rotation_shift(kCam, theta);
        CHECK(std::abs(du - predicted) <= 0.05 * std::abs(predicted));
      }
    }
  }
}

TEST_CASE("straight unicycle step")
{
  const Pose2 p = step_unicycle(Pose2{0.0, 0.0, 0.0}, VelocityCommand{1.0, 0.0}, 1.0);
  CHECK(p.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.heading == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pure spin leaves position unchanged")
{
  const Pose2 p = step_unicycle(Pose2{0.0, 0.0, 0.0}, VelocityCommand{0.0, M_PI / 2.0}, 1.0);
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.heading == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
}

TEST_CASE("quarter circle arc")
{
  const Pose2 p = step_unicycle(Pose2{0.0, 0.0, 0.0}, VelocityCommand{1.0, 1.0}, M_PI / 2.0);
  CHECK(std::abs(p.x - 1.0) <= 1e-12);
  CHECK(std::abs(p.y - 1.0) <= 1e-12);
  CHECK(std::abs(p.heading - M_PI / 2.0) <= 1e-12);
}

TEST_CASE("two half steps equal one full step")
{
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> uv(-2.0, 2.0);
  std::uniform_real_distribution<double> uw(-2.0, 2.0);
  std::uniform_real_distribution<double> ut(0.01, 2.0);
  std::uniform_real_distribution<double> uh(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const Pose2 start{uv(rng), uv(rng), normalize_angle(uh(rng))};
    const VelocityCommand cmd{uv(rng), uw(rng)};
    const double dt = ut(rng);
    const Pose2 whole = step_unicycle(start, cmd, dt);
    const Pose2 halves = step_unicycle(step_unicycle(start, cmd, dt / 2.0), cmd, dt / 2.0);
    CHECK(std::abs(whole.x - halves.x) <= 1e-12);
    CHECK(std::abs(whole.y - halves.y) <= 1e-12);
    CHECK(std::abs(normalize_angle(whole.heading - halves.heading)) <= 1e-12);
  }
}

TEST_CASE("angle normalization wraps into the half-open interval")
{
  CHECK(normalize_angle(M_PI) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(normalize_angle(-M_PI) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(normalize_angle(3.0 * M_PI) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(normalize_angle(2.0 * M_PI) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normalize_angle(-0.5) == doctest::Approx(-0.5).epsilon(1e-12));
  for (double a = -20.0; a <= 20.0; a += 0.37) {
    const double n = normalize_angle(a);
    CHECK(n > -M_PI - 1e-12);
    CHECK(n <= M_PI + 1e-12);
    CHECK(std::abs(std::sin(n) - std::sin(a)) <= 1e-9);
    CHECK(std::abs(std::cos(n) - std::cos(a)) <= 1e-9);
  }
}

TEST_CASE("intrinsics validity conditions")
{
  CHECK(intrinsics_valid(kCam));
  CameraIntrinsics bad = kCam;
  bad.fx = 0.0;
  CHECK_FALSE(intrinsics_valid(bad));
  bad = kCam;
  bad.cx = 640.0;  // principal point must be strictly inside
  CHECK_FALSE(intrinsics_valid(bad));
}
