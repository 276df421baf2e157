#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "doctest.h"
#include "ffnav/errors.hpp"
#include "ffnav/perception.hpp"
#include "ffnav/world.hpp"
#include "test_helpers.hpp"

using namespace ffnav;

namespace
{

MatchSet pairs_with_offsets(const std::vector<double> & dus)
{
  MatchSet set;
  double u = 100.0;
  std::int64_t id = 0;
  for (double du : dus) {
    FeatureObservation ref;
    ref.pixel = PixelPoint{u, 200.0};
    ref.descriptor = canonical_descriptor(id);
    FeatureObservation query = ref;
    query.pixel.u = u + du;
    set.pairs.push_back(MatchedPair{query, ref});
    u += 40.0;
    ++id;
  }
  set.inlier_count = static_cast<int>(set.pairs.size());
  return set;
}

}  // namespace

TEST_CASE("canonical descriptors are unit length and id-stable")
{
  for (std::int64_t id : {0, 1, 7, 12345}) {
    const Descriptor a = canonical_descriptor(id);
    const Descriptor b = canonical_descriptor(id);
    CHECK(a == b);
    double norm2 = 0.0;
    for (float v : a) {
      norm2 += static_cast<double>(v) * v;
    }
    CHECK(std::abs(std::sqrt(norm2) - 1.0) <= 1e-6);
  }
  CHECK(canonical_descriptor(1) != canonical_descriptor(2));
}

TEST_CASE("noiseless observation reproduces the projection model exactly")
{
  const World world = testutil::symmetric_world();
  const Pose2 pose{0.0, 0.0, 0.0};
  NoiseConfig noise;  // all zero
  const Frame frame = observe(world, pose, noise, 0.0, 0);

  // Every visible landmark appears exactly once, at its projected pixel,
  // with its canonical descriptor.
  std::map<std::int64_t, PixelPoint> expected;
  for (const Landmark & lm : world.landmarks) {
    if (const auto px = project(world.intrinsics, pose, world.mount, lm)) {
      expected[lm.id] = *px;
    }
  }
  REQUIRE(frame.observations.size() == expected.size());
  for (const auto & obs : frame.observations) {
    REQUIRE(obs.debug_landmark_id.has_value());
    const auto it = expected.find(*obs.debug_landmark_id);
    REQUIRE(it != expected.end());
    CHECK(obs.pixel.u == it->second.u);
    CHECK(obs.pixel.v == it->second.v);
    CHECK(obs.descriptor == canonical_descriptor(*obs.debug_landmark_id));
  }
}

TEST_CASE("an obstacle on the line of sight hides the landmark")
{
  World world;
  world.intrinsics = testutil::camera();
  world.mount = testutil::mount();
  world.landmarks.push_back(Landmark{1, 10.0, 0.0, 0.4});
  DynamicDisc disc;
  disc.radius = 0.5;
  disc.waypoints = {DynamicWaypoint{0.0, 5.0, 0.0}, DynamicWaypoint{10.0, 5.0, 30.0}};
  world.obstacles.dynamic_discs.push_back(disc);

  NoiseConfig noise;
  const Frame blocked = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 0.0, 0);
  CHECK(blocked.observations.empty());
  // By t = 10 the disc has moved far off the sight line.
  const Frame clear = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 10.0, 1);
  REQUIRE(clear.observations.size() == 1);
  CHECK(clear.observations.front().debug_landmark_id == 1);
}

TEST_CASE("observation is deterministic for identical seeds and inputs")
{
  const World world = testutil::symmetric_world();
  NoiseConfig noise;
  noise.pixel_sigma = 0.5;
  noise.descriptor_sigma = 0.05;
  noise.dropout_prob = 0.05;
  noise.outlier_prob = 0.02;
  noise.rng_seed = 77;
  const Pose2 pose{1.0, 0.2, 0.1};
  const Frame a = observe(world, pose, noise, 3.0, 30);
  const Frame b = observe(world, pose, noise, 3.0, 30);
  REQUIRE(a.observations.size() == b.observations.size());
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    CHECK(a.observations[i].pixel.u == b.observations[i].pixel.u);
    CHECK(a.observations[i].pixel.v == b.observations[i].pixel.v);
    CHECK(a.observations[i].descriptor == b.observations[i].descriptor);
    CHECK(a.observations[i].debug_landmark_id == b.observations[i].debug_landmark_id);
  }
  // A different frame index reseeds the per-frame noise.
  const Frame c = observe(world, pose, noise, 3.0, 31);
  bool any_difference = c.observations.size() != a.observations.size();
  for (std::size_t i = 0; !any_difference && i < a.observations.size(); ++i) {
    any_difference = a.observations[i].pixel.u != c.observations[i].pixel.u;
  }
  CHECK(any_difference);
}

TEST_CASE("identical frames match feature for feature")
{
  const Frame frame = testutil::feature_row(25);
  const MatchSet matches = match_frames(frame, frame, MatchConfig{});
  CHECK(matches.inlier_count == 25);
  REQUIRE(matches.pairs.size() == 25);
  for (const auto & pair : matches.pairs) {
    CHECK(pair.query.pixel.u == pair.reference.pixel.u);
    CHECK(pair.query.debug_landmark_id == pair.reference.debug_landmark_id);
  }
  // Pairs come back sorted by query u.
  CHECK(std::is_sorted(
    matches.pairs.begin(), matches.pairs.end(),
    [](const MatchedPair & a, const MatchedPair & b) {
      return a.query.pixel.u < b.query.pixel.u;
    }));
}

TEST_CASE("disjoint landmark sets produce no true matches")
{
  std::vector<std::pair<std::int64_t, PixelPoint>> a_feats;
  std::vector<std::pair<std::int64_t, PixelPoint>> b_feats;
  for (int i = 0; i < 20; ++i) {
    a_feats.emplace_back(i, PixelPoint{50.0 + 25.0 * i, 240.0});
    b_feats.emplace_back(1000 + i, PixelPoint{50.0 + 25.0 * i, 240.0});
  }
  const MatchSet matches =
    match_frames(testutil::frame_at(a_feats), testutil::frame_at(b_feats), MatchConfig{});
  // No pair can be a true correspondence; the ratio test should reject
  // effectively everything between unrelated unit descriptors.
  for (const auto & pair : matches.pairs) {
    CHECK(pair.query.debug_landmark_id != pair.reference.debug_landmark_id);
  }
  CHECK(matches.inlier_count <= 1);
}

TEST_CASE("match precision under descriptor noise and outliers")
{
  const World world = testutil::symmetric_world();
  int correct = 0;
  int total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    NoiseConfig noisy;
    noisy.descriptor_sigma = 0.1;
    noisy.outlier_prob = 0.05;
    noisy.rng_seed = 9000 + trial;
    const Pose2 pose{0.05 * (trial % 10), 0.0, 0.0};
    const Frame query = observe(world, pose, noisy, 0.0, trial);
    const Frame reference = observe(world, pose, noisy, 0.0, trial + 100000);
    const MatchSet matches = match_frames(query, reference, MatchConfig{});
    for (const auto & pair : matches.pairs) {
      total += 1;
      if (pair.query.debug_landmark_id == pair.reference.debug_landmark_id) {
        correct += 1;
      }
    }
  }
  REQUIRE(total > 500);  // the setup must actually exercise matching
  CHECK(static_cast<double>(correct) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("flow is the arithmetic mean of horizontal offsets")
{
  const FlowMeasurement flow = feature_flow(pairs_with_offsets({10.0, -4.0, 6.0}));
  CHECK(flow.flow == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(flow.inlier_count == 3);
}

TEST_CASE("flow depends on the mean, not the number of pairs")
{
  const FlowMeasurement one = feature_flow(pairs_with_offsets({10.0, -4.0, 6.0}));
  const FlowMeasurement three = feature_flow(
    pairs_with_offsets({10.0, -4.0, 6.0, 10.0, -4.0, 6.0, 10.0, -4.0, 6.0}));
  CHECK(one.flow == doctest::Approx(three.flow).epsilon(1e-12));
  CHECK(three.inlier_count == 9);
}

TEST_CASE("flow from an empty match set is an error")
{
  CHECK_THROWS_AS(feature_flow(MatchSet{}), EmptyMatchError);
}

TEST_CASE("pure rotation produces flow near the small-angle prediction")
{
  const World world = testutil::distant_world();
  NoiseConfig noise;
  const Frame base = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 0.0, 0);
  for (double theta : {0.1, -0.1}) {
    const Frame turned = observe(world, Pose2{0.0, 0.0, theta}, noise, 0.0, 1);
    // Query taken after the turn: positive flow reports a left turn.
    const MatchSet matches = match_frames(turned, base, MatchConfig{});
    REQUIRE(matches.inlier_count >= 50);
    const FlowMeasurement flow = feature_flow(matches);
    const double predicted = 500.0 * std::sin(theta);
    CHECK(flow.flow * predicted > 0.0);  // sign agreement
    CHECK(std::abs(flow.flow - predicted) <= 2.5);
  }
}

TEST_CASE("opposite rotations produce opposite flows")
{
  const World world = testutil::distant_world();
  NoiseConfig noise;
  const Frame base = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 0.0, 0);
  const Frame left = observe(world, Pose2{0.0, 0.0, 0.08}, noise, 0.0, 1);
  const Frame right = observe(world, Pose2{0.0, 0.0, -0.08}, noise, 0.0, 2);
  const double f_left = feature_flow(match_frames(left, base, MatchConfig{})).flow;
  const double f_right = feature_flow(match_frames(right, base, MatchConfig{})).flow;
  CHECK(f_left > 0.0);
  CHECK(f_right < 0.0);
  CHECK(std::abs(f_left + f_right) <= 0.5);
}

TEST_CASE("straight motion through a symmetric field has near-zero flow")
{
  const World world = testutil::symmetric_world();
  NoiseConfig noise;
  const Frame before = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 0.0, 0);
  const Frame after = observe(world, Pose2{0.5, 0.0, 0.0}, noise, 0.0, 1);
  const MatchSet matches = match_frames(after, before, MatchConfig{});
  REQUIRE(matches.inlier_count >= 50);
  CHECK(std::abs(feature_flow(matches).flow) <= 1.0);
}

TEST_CASE("matching is count-symmetric under query and reference swap")
{
  const World world = testutil::symmetric_world();
  NoiseConfig noise;
  const Frame a = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 0.0, 0);
  const Frame b = observe(world, Pose2{0.3, 0.1, 0.05}, noise, 0.0, 1);
  const MatchSet ab = match_frames(a, b, MatchConfig{});
  const MatchSet ba = match_frames(b, a, MatchConfig{});
  CHECK(ab.inlier_count == ba.inlier_count);
}

TEST_CASE("range scan hits a disc directly ahead")
{
  ObstacleWorld obstacles;
  obstacles.discs.push_back(DiscObstacle{2.0, 0.0, 0.5});
  const RangeScan scan = raycast_scan(obstacles, Pose2{0.0, 0.0, 0.0}, 0.0, 720, 10.0);
  REQUIRE(scan.beam_count == 720);
  REQUIRE(scan.angles.size() == 720);
  REQUIRE(scan.ranges.size() == 720);
  // The beam pointing closest to straight ahead measures the near surface.
  int forward = 0;
  for (int i = 1; i < scan.beam_count; ++i) {
    if (std::abs(scan.angles[i]) < std::abs(scan.angles[forward])) {
      forward = i;
    }
  }
  CHECK(scan.ranges[forward] == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("range scan in an empty world returns max range everywhere")
{
  const RangeScan scan = raycast_scan(ObstacleWorld{}, Pose2{1.0, 2.0, 0.5}, 0.0, 64, 8.0);
  for (double r : scan.ranges) {
    CHECK(r == 8.0);
  }
}

TEST_CASE("obstacle behind the robot leaves forward beams clear")
{
  ObstacleWorld obstacles;
  obstacles.discs.push_back(DiscObstacle{-2.0, 0.0, 0.5});
  const RangeScan scan = raycast_scan(obstacles, Pose2{0.0, 0.0, 0.0}, 0.0, 720, 10.0);
  for (int i = 0; i < scan.beam_count; ++i) {
    if (std::abs(scan.angles[i]) < M_PI / 2.0 - 0.3) {
      CHECK(scan.ranges[i] == 10.0);
    }
  }
}

TEST_CASE("range scan sees a box front face")
{
  ObstacleWorld obstacles;
  obstacles.boxes.push_back(BoxObstacle{2.0, -1.0, 3.0, 1.0});
  const RangeScan scan = raycast_scan(obstacles, Pose2{0.0, 0.0, 0.0}, 0.0, 720, 10.0);
  int forward = 0;
  for (int i = 1; i < scan.beam_count; ++i) {
    if (std::abs(scan.angles[i]) < std::abs(scan.angles[forward])) {
      forward = i;
    }
  }
  CHECK(scan.ranges[forward] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("dynamic disc positions interpolate and clamp")
{
  DynamicDisc disc;
  disc.radius = 0.5;
  disc.waypoints = {DynamicWaypoint{0.0, 0.0, 0.0}, DynamicWaypoint{10.0, 10.0, 0.0}};
  CHECK(disc.position_at(5.0).x == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(disc.position_at(-1.0).x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(disc.position_at(11.0).x == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("moving obstacle changes the scan over time")
{
  ObstacleWorld obstacles;
  DynamicDisc disc;
  disc.radius = 0.5;
  disc.waypoints = {DynamicWaypoint{0.0, 2.0, 0.0}, DynamicWaypoint{10.0, 2.0, 30.0}};
  obstacles.dynamic_discs.push_back(disc);
  const RangeScan at0 = raycast_scan(obstacles, Pose2{0.0, 0.0, 0.0}, 0.0, 360, 10.0);
  const RangeScan at10 = raycast_scan(obstacles, Pose2{0.0, 0.0, 0.0}, 10.0, 360, 10.0);
  int forward = 0;
  for (int i = 1; i < at0.beam_count; ++i) {
    if (std::abs(at0.angles[i]) < std::abs(at0.angles[forward])) {
      forward = i;
    }
  }
  CHECK(at0.ranges[forward] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(at10.ranges[forward] == 10.0);
}
