#include "ffnav/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ffnav/errors.hpp"
#include "ffnav/rng.hpp"

namespace ffnav
{

namespace
{

constexpr std::uint64_t kDescriptorStream = 0x64657363u;  // canonical descriptors
constexpr std::uint64_t kFrameStream = 0x6672616du;       // per-frame observation noise

Descriptor normalized(Descriptor d)
{
  double norm2 = 0.0;
  for (float v : d) {
    norm2 += static_cast<double>(v) * v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (float & v : d) {
    v = static_cast<float>(v * inv);
  }
  return d;
}

Descriptor random_unit_descriptor(Rng & rng)
{
  Descriptor d;
  for (float & v : d) {
    v = static_cast<float>(rng.gaussian());
  }
  return normalized(d);
}

double cosine_distance(const Descriptor & a, const Descriptor & b)
{
  double dot = 0.0;
  for (int i = 0; i < kDescriptorDim; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
  }
  return 1.0 - dot;
}

}  // namespace

Descriptor canonical_descriptor(std::int64_t landmark_id)
{
  Rng rng(mix_seed(kDescriptorStream, static_cast<std::uint64_t>(landmark_id)));
  return random_unit_descriptor(rng);
}

Frame observe(
  const World & world, const Pose2 & pose, const NoiseConfig & noise, double time,
  std::int64_t frame_index)
{
  Frame frame;
  frame.frame_index = frame_index;
  frame.timestamp = time;

  Rng rng(mix_seed(noise.rng_seed ^ kFrameStream, static_cast<std::uint64_t>(frame_index)));

  const double ch = std::cos(pose.heading);
  const double sh = std::sin(pose.heading);
  const double cam_x = pose.x + world.mount.forward_offset * ch;
  const double cam_y = pose.y + world.mount.forward_offset * sh;

  for (const Landmark & lm : world.landmarks) {
    if (std::hypot(lm.x - cam_x, lm.y - cam_y) > noise.max_detection_range) {
      continue;
    }
    const auto px = project(world.intrinsics, pose, world.mount, lm);
    if (!px) {
      continue;
    }
    if (world.obstacles.segment_blocked(cam_x, cam_y, lm.x, lm.y, time)) {
      continue;
    }
    if (noise.dropout_prob > 0.0 && rng.uniform() < noise.dropout_prob) {
      continue;
    }

    FeatureObservation obs;
    obs.pixel = *px;
    if (noise.pixel_sigma > 0.0) {
      obs.pixel.u += noise.pixel_sigma * rng.gaussian();
      obs.pixel.v += noise.pixel_sigma * rng.gaussian();
      const double u_max = std::nextafter(static_cast<double>(world.intrinsics.width), 0.0);
      const double v_max = std::nextafter(static_cast<double>(world.intrinsics.height), 0.0);
      obs.pixel.u = std::clamp(obs.pixel.u, 0.0, u_max);
      obs.pixel.v = std::clamp(obs.pixel.v, 0.0, v_max);
    }

    if (noise.outlier_prob > 0.0 && rng.uniform() < noise.outlier_prob) {
      obs.descriptor = random_unit_descriptor(rng);
    } else {
      obs.descriptor = canonical_descriptor(lm.id);
      if (noise.descriptor_sigma > 0.0) {
        for (float & v : obs.descriptor) {
          v += static_cast<float>(noise.descriptor_sigma * rng.gaussian());
        }
        obs.descriptor = normalized(obs.descriptor);
      }
    }
    obs.debug_landmark_id = lm.id;
    frame.observations.push_back(std::move(obs));
  }
  return frame;
}

MatchSet match_frames(
  std::span<const FeatureObservation> query, std::span<const FeatureObservation> reference,
  const MatchConfig & config)
{
  MatchSet result;
  if (query.empty() || reference.empty()) {
    return result;
  }
  const std::size_t nq = query.size();
  const std::size_t nr = reference.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Nearest and second-nearest reference for each query feature.
  std::vector<std::size_t> best_ref(nq, 0);
  std::vector<double> best_d(nq, kInf);
  std::vector<double> second_d(nq, kInf);
  // Nearest query for each reference feature (for the mutual check).
  std::vector<std::size_t> best_query(nr, 0);
  std::vector<double> best_query_d(nr, kInf);

  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      const double d = cosine_distance(query[i].descriptor, reference[j].descriptor);
      if (d < best_d[i]) {
        second_d[i] = best_d[i];
        best_d[i] = d;
        best_ref[i] = j;
      } else if (d < second_d[i]) {
        second_d[i] = d;
      }
      if (d < best_query_d[j]) {
        best_query_d[j] = d;
        best_query[j] = i;
      }
    }
  }

  for (std::size_t i = 0; i < nq; ++i) {
    const std::size_t j = best_ref[i];
    if (best_query[j] != i) {
      continue;  // not mutual
    }
    if (best_d[i] > config.lowe_ratio * second_d[i]) {
      continue;  // ambiguous
    }
    result.pairs.push_back(MatchedPair{query[i], reference[j]});
  }

  std::sort(result.pairs.begin(), result.pairs.end(), [](const auto & a, const auto & b) {
    if (a.query.pixel.u != b.query.pixel.u) {
      return a.query.pixel.u < b.query.pixel.u;
    }
    if (a.query.pixel.v != b.query.pixel.v) {
      return a.query.pixel.v < b.query.pixel.v;
    }
    return a.reference.pixel.u < b.reference.pixel.u;
  });
  result.inlier_count = static_cast<int>(result.pairs.size());
  return result;
}

MatchSet match_frames(const Frame & query, const Frame & reference, const MatchConfig & config)
{
  return match_frames(
    std::span<const FeatureObservation>(query.observations),
    std::span<const FeatureObservation>(reference.observations), config);
}

FlowMeasurement feature_flow(const MatchSet & matches)
{
  if (matches.pairs.empty()) {
    throw EmptyMatchError("feature flow undefined for an empty match set");
  }
  double sum = 0.0;
  for (const auto & pair : matches.pairs) {
    sum += pair.query.pixel.u - pair.reference.pixel.u;
  }
  return FlowMeasurement{
    sum / static_cast<double>(matches.pairs.size()), matches.inlier_count};
}

}  // namespace ffnav
