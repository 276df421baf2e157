#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ffnav/perception.hpp"

namespace ffnav
{

struct TeachConfig
{
  // Emit a keyframe once the mean flow since the last one reaches this (px).
  double keyframe_flow_threshold{30.0};
  // ... or once matches drop below this fraction of the keyframe's features.
  double keyframe_inlier_ratio{0.6};
  // Minimum matches required for a valid keyframe-to-keyframe flow edge.
  int min_edge_matches{15};
  // Feature cap per keyframe; over-budget frames keep a uniform-stride
  // subsample in observation order, so the kept set spans the whole frame.
  int max_keyframe_features{500};
  // When set, edge flows are re-measured between the stored keyframe
  // feature lists instead of reusing the emission-time measurement.
  bool rematch_linked_keyframes{false};
};

struct Keyframe
{
  int id{0};
  std::vector<FeatureObservation> features;
  // Mean flow toward the next keyframe; present on all but the last one.
  std::optional<double> flow_to_next;
  // Matches against the previous keyframe when this one was created (for
  // the first keyframe: its feature count).
  int creation_inliers{0};
};

// Topological route map: an ordered chain of keyframes with flow edges.
struct KeyframeMap
{
  std::vector<Keyframe> keyframes;
  CameraIntrinsics intrinsics;
  TeachConfig config;
  MatchConfig match;
};

// Checks the structural invariants of a finished map: at least two
// keyframes, dense ids, flow_to_next present exactly on non-final
// keyframes, every edge built from at least min_edge_matches matches.
void validate_map(const KeyframeMap & map);

// Incrementally turns a teach-drive frame stream into a KeyframeMap.
// Feed every frame in order via process_frame, then call finalize exactly
// once; the final frame always becomes the last keyframe.
class TeachMapBuilder
{
public:
  TeachMapBuilder(
    const CameraIntrinsics & intrinsics, const TeachConfig & config,
    const MatchConfig & match);

  // Returns the new keyframe id when this frame triggered an emission.
  // Throws BarrenFrameError when the frame carries fewer than 8 features.
  std::optional<int> process_frame(const Frame & frame);

  // Throws TooShortTeachError when fewer than two keyframes resulted.
  KeyframeMap finalize();

  int keyframe_count() const { return static_cast<int>(keyframes_.size()); }
  // Telemetry from the most recent process_frame call.
  double last_flow() const { return last_flow_; }
  int last_matches() const { return last_matches_; }

private:
  CameraIntrinsics intrinsics_;
  TeachConfig config_;
  MatchConfig match_;
  std::vector<Keyframe> keyframes_;
  std::vector<FeatureObservation> pending_features_;
  bool frame_pending_{false};
  bool finalized_{false};
  double last_flow_{0.0};
  int last_matches_{0};
};

KeyframeMap load_map(const std::string & path);
void save_map(const KeyframeMap & map, const std::string & path);

}  // namespace ffnav
