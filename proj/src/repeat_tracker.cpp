#include "ffnav/repeat_tracker.hpp"

#include <algorithm>
#include <cmath>

#include "ffnav/errors.hpp"

namespace ffnav
{

MovementDistribution movement_scores(const FlowWindow & window, const TrackerConfig & config)
{
  MovementDistribution scores;
  const double inv_two_sigma2 = 1.0 / (2.0 * config.flow_sigma * config.flow_sigma);
  const double inv_two_sigma_w2 =
    1.0 / (2.0 * config.window_weight_sigma * config.window_weight_sigma);

  double flows[2] = {window.flow_tracked, 0.0};
  const int count = window.flow_next ? 2 : 1;
  if (window.flow_next) {
    flows[1] = *window.flow_next;
  }
  for (int n = 0; n < count; ++n) {
    const double weight = std::exp(-static_cast<double>(n) * n * inv_two_sigma_w2);
    const double f = flows[n];
    const double straight_vote = std::exp(-f * f * inv_two_sigma2);
    scores.straight += weight * straight_vote;
    if (f > 0.0) {
      scores.left += weight * (1.0 - straight_vote);
    } else if (f < 0.0) {
      scores.right += weight * (1.0 - straight_vote);
    }
  }
  return scores;
}

MovementDistribution movement_probabilities(
  const FlowWindow & window, const TrackerConfig & config)
{
  MovementDistribution dist = movement_scores(window, config);
  const double total = dist.straight + dist.left + dist.right;
  dist.straight /= total;
  dist.left /= total;
  dist.right /= total;
  return dist;
}

MovementEvent argmax_event(const MovementDistribution & dist)
{
  if (dist.straight >= dist.left && dist.straight >= dist.right) {
    return MovementEvent::kStraight;
  }
  return dist.left >= dist.right ? MovementEvent::kLeft : MovementEvent::kRight;
}

GoalPoint select_goal(const MovementDistribution & dist)
{
  switch (argmax_event(dist)) {
    case MovementEvent::kLeft:
      return GoalPoint{1.0, 1.0};
    case MovementEvent::kRight:
      return GoalPoint{1.0, -1.0};
    case MovementEvent::kStraight:
    default:
      return GoalPoint{1.0, 0.0};
  }
}

TrackStatus check_finished(
  const TrackerState & state, const FlowWindow & window, const KeyframeMap & map,
  const TrackerConfig & config)
{
  const int last = static_cast<int>(map.keyframes.size()) - 1;
  if (
    state.status == TrackStatus::kTracking && state.tracked_index == last &&
    window.inliers_tracked >= config.lost_inlier_threshold &&
    std::abs(window.flow_tracked) <= config.finish_flow_threshold) {
    return TrackStatus::kFinished;
  }
  return state.status;
}

RepeatTracker::RepeatTracker(
  const KeyframeMap & map, const TrackerConfig & config, const MatchConfig & match)
: map_(&map), config_(config), match_(match)
{
  if (map.keyframes.size() < 2) {
    throw PreconditionError("repeat tracker requires a map with at least two keyframes");
  }
  if (
    config_.lost_inlier_threshold < 1 || config_.loop_half_window < 0 ||
    config_.flow_sigma <= 0.0 || config_.window_weight_sigma <= 0.0 ||
    config_.finish_flow_threshold < 0.0) {
    throw ConfigError("tracker config out of range");
  }
}

FlowMeasurement RepeatTracker::measure(int keyframe_index, const Frame & frame) const
{
  // The keyframe is the query and the live frame the reference, so positive
  // flow means the route continues to the robot's left.
  const MatchSet matches = match_frames(
    std::span<const FeatureObservation>(map_->keyframes[keyframe_index].features),
    std::span<const FeatureObservation>(frame.observations), match_);
  if (matches.pairs.empty()) {
    return FlowMeasurement{0.0, 0};
  }
  return feature_flow(matches);
}

FlowWindow RepeatTracker::window_at(int index, const Frame & frame) const
{
  FlowWindow window;
  const FlowMeasurement tracked = measure(index, frame);
  window.flow_tracked = tracked.flow;
  window.inliers_tracked = tracked.inlier_count;
  if (index + 1 < static_cast<int>(map_->keyframes.size())) {
    const FlowMeasurement next = measure(index + 1, frame);
    window.flow_next = next.flow;
    window.inliers_next = next.inlier_count;
  }
  return window;
}

FlowWindow RepeatTracker::track(const Frame & frame)
{
  if (state_.status == TrackStatus::kFinished) {
    throw PreconditionError("track called on a finished route");
  }
  const int keyframe_count = static_cast<int>(map_->keyframes.size());

  int index = state_.tracked_index;
  const FlowMeasurement at_tracked = measure(index, frame);
  int best_inliers = at_tracked.inlier_count;
  if (index + 1 < keyframe_count) {
    const FlowMeasurement at_next = measure(index + 1, frame);
    if (at_next.inlier_count > best_inliers) {
      index = index + 1;
      best_inliers = at_next.inlier_count;
    }
  }

  if (best_inliers < config_.lost_inlier_threshold) {
    state_.status = TrackStatus::kLost;
    state_.frames_since_ok += 1;
    // Local re-detection around the last believed position.
    const int lo = std::max(0, index - config_.loop_half_window);
    const int hi = std::min(keyframe_count - 1, index + config_.loop_half_window);
    int best_index = index;
    int best_count = -1;
    for (int k = lo; k <= hi; ++k) {
      const FlowMeasurement m = measure(k, frame);
      if (m.inlier_count > best_count) {
        best_count = m.inlier_count;
        best_index = k;
      }
    }
    if (best_count >= config_.lost_inlier_threshold) {
      index = best_index;
      state_.status = TrackStatus::kTracking;
      state_.frames_since_ok = 0;
    }
  } else {
    state_.status = TrackStatus::kTracking;
    state_.frames_since_ok = 0;
  }

  state_.tracked_index = index;
  const FlowWindow window = window_at(index, frame);
  state_.status = check_finished(state_, window, *map_, config_);
  return window;
}

}  // namespace ffnav
