#pragma once

#include <optional>

#include "ffnav/teach_map.hpp"

namespace ffnav
{

enum class TrackStatus
{
  kTracking,
  kLost,
  kFinished,
};

struct TrackerConfig
{
  // Below this many inliers the tracker declares itself lost.
  int lost_inlier_threshold{15};
  // Half-width (in keyframes) of the local re-detection window when lost.
  int loop_half_window{5};
  // Flow scale (px) of the movement-probability kernel.
  double flow_sigma{20.0};
  // Index-distance scale of the per-keyframe weights in that kernel.
  double window_weight_sigma{2.0};
  // The route counts as finished once the final keyframe is tracked with
  // at most this much residual flow (px).
  double finish_flow_threshold{10.0};
};

// Flow measurements against the tracked keyframe and its successor.
// flow_next is absent exactly when the final keyframe is tracked; a
// successor that produced no matches contributes flow 0 with 0 inliers.
struct FlowWindow
{
  double flow_tracked{0.0};
  std::optional<double> flow_next;
  int inliers_tracked{0};
  int inliers_next{0};
};

struct TrackerState
{
  int tracked_index{0};
  TrackStatus status{TrackStatus::kTracking};
  // Consecutive track() calls spent lost; 0 while tracking.
  int frames_since_ok{0};
};

struct MovementDistribution
{
  double straight{0.0};
  double left{0.0};
  double right{0.0};
};

enum class MovementEvent
{
  kStraight,
  kLeft,
  kRight,
};

// Planner-frame goal point the movement decision maps to.
struct GoalPoint
{
  double x{0.0};
  double y{0.0};
};

// Unnormalized movement scores: each flow votes for straight with weight
// exp(-f^2 / (2 sigma^2)) and for its turn direction (left when positive)
// with the complement, scaled by exp(-n^2 / (2 sigma_w^2)) for the n-th
// window entry. Their sum equals the total window weight, so the
// normalization below is always well defined.
MovementDistribution movement_scores(const FlowWindow & window, const TrackerConfig & config);

// The scores normalized into a probability distribution.
MovementDistribution movement_probabilities(
  const FlowWindow & window, const TrackerConfig & config);

// Argmax with deterministic tie-breaking: straight beats left beats right.
MovementEvent argmax_event(const MovementDistribution & dist);

// Goal handed to the local planner: straight -> (1, 0), left -> (1, 1),
// right -> (1, -1) in the robot frame.
GoalPoint select_goal(const MovementDistribution & dist);

// Finished once the final keyframe is tracked with |flow| at or below the
// finish threshold and enough inliers; otherwise the status is unchanged.
TrackStatus check_finished(
  const TrackerState & state, const FlowWindow & window, const KeyframeMap & map,
  const TrackerConfig & config);

// Follows a teach map through a repeat-frame stream. Per frame, the current
// and next keyframe are matched and the tracked index advances to the
// inlier argmax (ties keep the current one). When both counts fall below
// the lost threshold the tracker searches a local window of keyframes and
// recovers to the best of them if that clears the threshold.
class RepeatTracker
{
public:
  // The map must outlive the tracker and contain at least two keyframes.
  RepeatTracker(const KeyframeMap & map, const TrackerConfig & config, const MatchConfig & match);

  // Processes one frame and returns the flow window at the (possibly
  // updated) tracked index. Must not be called once finished.
  FlowWindow track(const Frame & frame);

  const TrackerState & state() const { return state_; }

private:
  FlowMeasurement measure(int keyframe_index, const Frame & frame) const;
  FlowWindow window_at(int index, const Frame & frame) const;

  const KeyframeMap * map_;
  TrackerConfig config_;
  MatchConfig match_;
  TrackerState state_;
};

}  // namespace ffnav
