#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ffnav/geometry.hpp"
#include "ffnav/world.hpp"

namespace ffnav
{

inline constexpr int kDescriptorDim = 32;

// Unit-norm appearance descriptor.
using Descriptor = std::array<float, kDescriptorDim>;

// The stable descriptor a landmark produces under zero noise. Derived from
// the landmark id alone, so it is identical across frames, runs, and worlds.
Descriptor canonical_descriptor(std::int64_t landmark_id);

struct FeatureObservation
{
  PixelPoint pixel;
  Descriptor descriptor{};
  // Ground-truth provenance for oracles and diagnostics. Matching never
  // reads it.
  std::optional<std::int64_t> debug_landmark_id;
};

struct Frame
{
  std::vector<FeatureObservation> observations;
  std::int64_t frame_index{0};
  double timestamp{0.0};
};

struct MatchedPair
{
  FeatureObservation query;
  FeatureObservation reference;
};

// Accepted matches, sorted by query pixel u (then v) for determinism.
struct MatchSet
{
  std::vector<MatchedPair> pairs;
  int inlier_count{0};
};

struct MatchConfig
{
  // Lowe ratio: best distance must be <= lowe_ratio * second-best distance.
  double lowe_ratio{0.8};
};

// Simulates one camera frame: projects every landmark visible from `pose`
// (in front of the near plane, inside the image, line of sight clear of
// obstacles at `time`), then applies the configured noise. The per-frame
// RNG is derived from (noise.rng_seed, frame_index), so identical inputs
// give identical frames.
Frame observe(
  const World & world, const Pose2 & pose, const NoiseConfig & noise, double time,
  std::int64_t frame_index);

// Mutual-nearest-neighbor matching under cosine distance with a Lowe ratio
// test on the query side.
MatchSet match_frames(
  std::span<const FeatureObservation> query, std::span<const FeatureObservation> reference,
  const MatchConfig & config);
MatchSet match_frames(const Frame & query, const Frame & reference, const MatchConfig & config);

struct FlowMeasurement
{
  double flow{0.0};
  int inlier_count{0};
};

// Mean signed horizontal pixel displacement over the matched pairs,
// computed as query.u - reference.u. With the reference taken where the
// robot is and the query where it should be, positive flow means the robot
// needs a left turn; swapping roles yields the turn it just performed.
// Throws EmptyMatchError when the match set is empty.
FlowMeasurement feature_flow(const MatchSet & matches);

}  // namespace ffnav
