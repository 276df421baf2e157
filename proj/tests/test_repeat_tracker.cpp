#include <cmath>
#include <random>

#include "doctest.h"
#include "ffnav/errors.hpp"
#include "ffnav/perception.hpp"
#include "ffnav/repeat_tracker.hpp"
#include "ffnav/teach_map.hpp"
#include "test_helpers.hpp"

using namespace ffnav;

namespace
{

FlowWindow window_of(double tracked, double next)
{
  FlowWindow w;
  w.flow_tracked = tracked;
  w.flow_next = next;
  w.inliers_tracked = 30;
  w.inliers_next = 30;
  return w;
}

FlowWindow window_single(double tracked)
{
  FlowWindow w;
  w.flow_tracked = tracked;
  w.inliers_tracked = 30;
  return w;
}

// Map of four keyframes with pairwise-disjoint landmark sets, so a frame's
// match count against each keyframe is exactly the number of that
// keyframe's landmarks present in the frame.
KeyframeMap disjoint_map()
{
  const int sizes[4] = {42, 57, 30, 20};
  KeyframeMap map;
  map.intrinsics = testutil::camera();
  for (int k = 0; k < 4; ++k) {
    Keyframe kf;
    kf.id = k;
    const Frame row = testutil::feature_row(sizes[k], 30.0 + 5.0 * k, 10.0);
    for (const auto & obs : row.observations) {
      FeatureObservation feature = obs;
      const std::int64_t id = *obs.debug_landmark_id + 1000 * k;
      feature.debug_landmark_id = id;
      feature.descriptor = canonical_descriptor(id);
      kf.features.push_back(feature);
    }
    kf.creation_inliers = sizes[k];
    if (k < 3) {
      kf.flow_to_next = 30.0;
    }
    map.keyframes.push_back(kf);
  }
  validate_map(map);
  return map;
}

// Frame holding the first n features of the map's k-th keyframe.
Frame frame_from(const KeyframeMap & map, int k, int n)
{
  Frame frame;
  const auto & feats = map.keyframes[k].features;
  frame.observations.assign(feats.begin(), feats.begin() + n);
  return frame;
}

void append(Frame & frame, const Frame & other)
{
  frame.observations.insert(
    frame.observations.end(), other.observations.begin(), other.observations.end());
}

constexpr double kW0 = 1.0;
const double kW1 = std::exp(-1.0 / 8.0);

}  // namespace

TEST_CASE("zero flow in both slots puts all mass on straight")
{
  const MovementDistribution p = movement_probabilities(window_of(0.0, 0.0), TrackerConfig{});
  CHECK(std::abs(p.straight - 1.0) <= 1e-12);
  CHECK(p.left == 0.0);
  CHECK(p.right == 0.0);
}

TEST_CASE("strong common positive flow votes left")
{
  // Both flows at 40 px: the per-entry weights factor out and the split is
  // exp(-2) vs 1 - exp(-2).
  const MovementDistribution p = movement_probabilities(window_of(40.0, 40.0), TrackerConfig{});
  CHECK(std::abs(p.straight - 0.1353352832366127) <= 1e-9);
  CHECK(std::abs(p.left - 0.8646647167633873) <= 1e-9);
  CHECK(p.right == 0.0);
}

TEST_CASE("mixed-sign flows split the mass across all three events")
{
  const MovementDistribution raw = movement_scores(window_of(-30.0, 10.0), TrackerConfig{});
  CHECK(std::abs(raw.straight - 1.1034532504297547) <= 1e-12);
  CHECK(std::abs(raw.left - 0.1036961195131905) <= 1e-12);
  CHECK(std::abs(raw.right - 0.6753475326416503) <= 1e-12);

  const MovementDistribution p = movement_probabilities(window_of(-30.0, 10.0), TrackerConfig{});
  CHECK(std::abs(p.straight - 0.5861647097080245) <= 1e-9);
  CHECK(std::abs(p.left - 0.05508435066789206) <= 1e-9);
  CHECK(std::abs(p.right - 0.35875093962408344) <= 1e-9);
}

TEST_CASE("raw scores always sum to the total window weight")
{
  std::mt19937_64 rng(314159);
  std::uniform_real_distribution<double> uf(-120.0, 120.0);
  for (int i = 0; i < 1000; ++i) {
    const MovementDistribution raw =
      movement_scores(window_of(uf(rng), uf(rng)), TrackerConfig{});
    CHECK(std::abs(raw.straight + raw.left + raw.right - (kW0 + kW1)) <= 1e-12);
  }
  // Single-slot windows sum to the first weight alone.
  const MovementDistribution solo = movement_scores(window_single(55.0), TrackerConfig{});
  CHECK(std::abs(solo.straight + solo.left + solo.right - kW0) <= 1e-12);
}

TEST_CASE("probabilities are a valid distribution")
{
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> uf(-120.0, 120.0);
  for (int i = 0; i < 500; ++i) {
    const MovementDistribution p =
      movement_probabilities(window_of(uf(rng), uf(rng)), TrackerConfig{});
    CHECK(p.straight >= 0.0);
    CHECK(p.left >= 0.0);
    CHECK(p.right >= 0.0);
    CHECK(std::abs(p.straight + p.left + p.right - 1.0) <= 1e-9);
  }
}

TEST_CASE("negating both flows swaps left and right")
{
  std::mt19937_64 rng(1618);
  std::uniform_real_distribution<double> uf(-120.0, 120.0);
  for (int i = 0; i < 500; ++i) {
    const double f0 = uf(rng);
    const double f1 = uf(rng);
    const MovementDistribution p = movement_probabilities(window_of(f0, f1), TrackerConfig{});
    const MovementDistribution q = movement_probabilities(window_of(-f0, -f1), TrackerConfig{});
    CHECK(p.straight == q.straight);
    CHECK(p.left == q.right);
    CHECK(p.right == q.left);
  }
}

TEST_CASE("straight probability never grows with flow magnitude")
{
  const TrackerConfig config;
  double prev = movement_probabilities(window_of(0.0, 0.0), config).straight;
  for (double f = 0.5; f <= 150.0; f += 0.5) {
    const double cur = movement_probabilities(window_of(f, 0.0), config).straight;
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("the nearer window entry carries more weight")
{
  // The straight score of a zero-flow single-entry window is the first
  // weight; adding a second zero-flow entry adds the (smaller) second one.
  const TrackerConfig config;
  const double w0 = movement_scores(window_single(0.0), config).straight;
  const double w1 = movement_scores(window_of(0.0, 0.0), config).straight - w0;
  CHECK(std::abs(w0 - kW0) <= 1e-12);
  CHECK(std::abs(w1 - kW1) <= 1e-12);
  CHECK(w0 > w1);
}

TEST_CASE("a lone flow measurement still yields a distribution")
{
  const MovementDistribution p = movement_probabilities(window_single(25.0), TrackerConfig{});
  CHECK(std::abs(p.straight - 0.45783336177161427) <= 1e-9);
  CHECK(std::abs(p.left - 0.5421666382283857) <= 1e-9);
  CHECK(p.right == 0.0);
}

TEST_CASE("goal selection follows the argmax event")
{
  const GoalPoint straight = select_goal(MovementDistribution{1.0, 0.0, 0.0});
  CHECK(straight.x == 1.0);
  CHECK(straight.y == 0.0);

  const GoalPoint left = select_goal(MovementDistribution{0.1, 0.8, 0.1});
  CHECK(left.x == 1.0);
  CHECK(left.y == 1.0);

  const GoalPoint right = select_goal(MovementDistribution{0.1, 0.1, 0.8});
  CHECK(right.x == 1.0);
  CHECK(right.y == -1.0);

  const GoalPoint plurality = select_goal(MovementDistribution{0.4, 0.3, 0.3});
  CHECK(plurality.x == 1.0);
  CHECK(plurality.y == 0.0);
}

TEST_CASE("argmax ties prefer straight, then left")
{
  CHECK(argmax_event(MovementDistribution{0.4, 0.4, 0.2}) == MovementEvent::kStraight);
  CHECK(argmax_event(MovementDistribution{0.2, 0.4, 0.4}) == MovementEvent::kLeft);
  CHECK(
    argmax_event(MovementDistribution{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}) ==
    MovementEvent::kStraight);
}

TEST_CASE("termination requires the last keyframe, low flow, and inliers")
{
  const KeyframeMap map = disjoint_map();
  const TrackerConfig config;  // finish threshold 10 px, inlier floor 15

  TrackerState at_end;
  at_end.tracked_index = 3;
  at_end.status = TrackStatus::kTracking;
  FlowWindow window;
  window.flow_tracked = 2.0;
  window.inliers_tracked = 20;
  CHECK(check_finished(at_end, window, map, config) == TrackStatus::kFinished);

  TrackerState mid = at_end;
  mid.tracked_index = 2;
  CHECK(check_finished(mid, window, map, config) == TrackStatus::kTracking);

  TrackerState lost = at_end;
  lost.status = TrackStatus::kLost;
  CHECK(check_finished(lost, window, map, config) == TrackStatus::kLost);

  window.flow_tracked = 12.0;  // beyond the finish threshold
  CHECK(check_finished(at_end, window, map, config) == TrackStatus::kTracking);

  window.flow_tracked = 2.0;
  window.inliers_tracked = 5;  // too few inliers
  CHECK(check_finished(at_end, window, map, config) == TrackStatus::kTracking);
}

TEST_CASE("the tracker advances to the keyframe with more inliers")
{
  const KeyframeMap map = disjoint_map();
  RepeatTracker tracker(map, TrackerConfig{}, MatchConfig{});

  Frame frame = frame_from(map, 0, 42);
  append(frame, frame_from(map, 1, 57));
  const FlowWindow window = tracker.track(frame);
  CHECK(tracker.state().tracked_index == 1);
  CHECK(tracker.state().status == TrackStatus::kTracking);
  CHECK(window.inliers_tracked == 57);
  REQUIRE(window.flow_next.has_value());
}

TEST_CASE("equal inlier counts keep the current keyframe")
{
  const KeyframeMap map = disjoint_map();
  RepeatTracker tracker(map, TrackerConfig{}, MatchConfig{});

  Frame frame = frame_from(map, 0, 20);
  append(frame, frame_from(map, 1, 20));
  tracker.track(frame);
  CHECK(tracker.state().tracked_index == 0);
  CHECK(tracker.state().status == TrackStatus::kTracking);
}

TEST_CASE("too few inliers mark the tracker lost")
{
  const KeyframeMap map = disjoint_map();
  RepeatTracker tracker(map, TrackerConfig{}, MatchConfig{});  // lost threshold 15

  Frame frame = frame_from(map, 0, 8);
  append(frame, frame_from(map, 1, 6));
  tracker.track(frame);
  CHECK(tracker.state().status == TrackStatus::kLost);
  CHECK(tracker.state().tracked_index == 0);
  CHECK(tracker.state().frames_since_ok == 1);
}

TEST_CASE("the local window search recovers tracking")
{
  const KeyframeMap map = disjoint_map();
  RepeatTracker tracker(map, TrackerConfig{}, MatchConfig{});

  tracker.track(frame_from(map, 0, 8));  // under the threshold: lost
  REQUIRE(tracker.state().status == TrackStatus::kLost);

  // A clear view of keyframe 2 (inside the search window) recovers.
  tracker.track(frame_from(map, 2, 30));
  CHECK(tracker.state().status == TrackStatus::kTracking);
  CHECK(tracker.state().tracked_index == 2);
  CHECK(tracker.state().frames_since_ok == 0);
}

TEST_CASE("reaching the final keyframe with low flow finishes the route")
{
  const KeyframeMap map = disjoint_map();
  RepeatTracker tracker(map, TrackerConfig{}, MatchConfig{});

  tracker.track(frame_from(map, 1, 57));
  CHECK(tracker.state().tracked_index == 1);
  tracker.track(frame_from(map, 2, 30));
  CHECK(tracker.state().tracked_index == 2);
  const FlowWindow last = tracker.track(frame_from(map, 3, 20));
  CHECK(tracker.state().tracked_index == 3);
  CHECK_FALSE(last.flow_next.has_value());
  // Same pixels as the stored keyframe: zero residual flow, so finished.
  CHECK(tracker.state().status == TrackStatus::kFinished);
  CHECK_THROWS_AS(tracker.track(frame_from(map, 3, 20)), PreconditionError);
}

TEST_CASE("the tracker needs at least two keyframes")
{
  KeyframeMap map = disjoint_map();
  map.keyframes.resize(1);
  CHECK_THROWS_AS(RepeatTracker(map, TrackerConfig{}, MatchConfig{}), PreconditionError);
}

TEST_CASE("tracker configuration is validated")
{
  const KeyframeMap map = disjoint_map();
  TrackerConfig bad;
  bad.flow_sigma = 0.0;
  CHECK_THROWS_AS(RepeatTracker(map, bad, MatchConfig{}), ConfigError);
  bad = TrackerConfig{};
  bad.lost_inlier_threshold = 0;
  CHECK_THROWS_AS(RepeatTracker(map, bad, MatchConfig{}), ConfigError);
}

TEST_CASE("turning toward the argmax direction reduces the flow residual")
{
  // A heading error to the right of the reference view produces positive
  // flow, the argmax votes left, and turning left shrinks the residual:
  // the closed-loop sign chain that makes the controller converge.
  const World world = testutil::distant_world();
  NoiseConfig noise;
  const Frame reference_view = observe(world, Pose2{0.0, 0.0, 0.0}, noise, 0.0, 0);

  const Frame veered_right = observe(world, Pose2{0.0, 0.0, -0.06}, noise, 0.0, 1);
  const double flow_before =
    feature_flow(match_frames(reference_view, veered_right, MatchConfig{})).flow;
  CHECK(flow_before > 0.0);

  FlowWindow window;
  window.flow_tracked = flow_before;
  window.inliers_tracked = 60;
  CHECK(
    argmax_event(movement_probabilities(window, TrackerConfig{})) == MovementEvent::kLeft);

  const Frame after_left_step = observe(world, Pose2{0.0, 0.0, -0.03}, noise, 0.0, 2);
  const double flow_after =
    feature_flow(match_frames(reference_view, after_left_step, MatchConfig{})).flow;
  CHECK(std::abs(flow_after) < std::abs(flow_before));

  // Mirror image: veering left produces negative flow and a right vote.
  const Frame veered_left = observe(world, Pose2{0.0, 0.0, 0.06}, noise, 0.0, 3);
  const double mirrored =
    feature_flow(match_frames(reference_view, veered_left, MatchConfig{})).flow;
  CHECK(mirrored < 0.0);
  window.flow_tracked = mirrored;
  CHECK(
    argmax_event(movement_probabilities(window, TrackerConfig{})) == MovementEvent::kRight);
}
