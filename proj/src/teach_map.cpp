#include "ffnav/teach_map.hpp"

#include <cmath>
#include <utility>

#include "ffnav/errors.hpp"
#include "json_util.hpp"

namespace ffnav
{

namespace
{

constexpr int kMinFrameFeatures = 8;

std::vector<FeatureObservation> capped_features(
  const std::vector<FeatureObservation> & observations, int cap)
{
  const int size = static_cast<int>(observations.size());
  if (size <= cap) {
    return observations;
  }
  // Subsample at a uniform stride rather than truncating: the kept set then
  // spans the frame's whole depth range, so successor keyframes stay
  // distinguishable by match count throughout the approach instead of
  // saturating once the near field is shared.
  std::vector<FeatureObservation> kept;
  kept.reserve(cap);
  for (int k = 0; k < cap; ++k) {
    kept.push_back(observations[static_cast<std::size_t>(
      (static_cast<long long>(k) * size) / cap)]);
  }
  return kept;
}

double safe_flow(const MatchSet & matches)
{
  return matches.pairs.empty() ? 0.0 : feature_flow(matches).flow;
}

}  // namespace

void validate_map(const KeyframeMap & map)
{
  const int count = static_cast<int>(map.keyframes.size());
  if (count < 2) {
    throw MapValidationError("map must contain at least two keyframes");
  }
  if (!intrinsics_valid(map.intrinsics)) {
    throw MapValidationError("map carries invalid camera intrinsics");
  }
  for (int i = 0; i < count; ++i) {
    const Keyframe & kf = map.keyframes[i];
    if (kf.id != i) {
      throw MapValidationError("keyframe ids must be dense and ascending from 0");
    }
    if (kf.features.empty()) {
      throw MapValidationError("keyframe has no features");
    }
    if (static_cast<int>(kf.features.size()) > map.config.max_keyframe_features) {
      throw MapValidationError("keyframe exceeds the feature cap");
    }
    const bool is_last = i == count - 1;
    if (kf.flow_to_next.has_value() == is_last) {
      throw MapValidationError("flow_to_next must be present exactly on non-final keyframes");
    }
    if (i > 0 && kf.creation_inliers < map.config.min_edge_matches) {
      throw MapValidationError("keyframe edge built from too few matches");
    }
  }
}

TeachMapBuilder::TeachMapBuilder(
  const CameraIntrinsics & intrinsics, const TeachConfig & config, const MatchConfig & match)
: intrinsics_(intrinsics), config_(config), match_(match)
{
  if (!intrinsics_valid(intrinsics_)) {
    throw ConfigError("teach builder requires valid camera intrinsics");
  }
  if (
    config_.keyframe_flow_threshold <= 0.0 || config_.keyframe_inlier_ratio <= 0.0 ||
    config_.keyframe_inlier_ratio > 1.0 || config_.min_edge_matches < 1 ||
    config_.max_keyframe_features < kMinFrameFeatures) {
    throw ConfigError("teach config out of range");
  }
}

std::optional<int> TeachMapBuilder::process_frame(const Frame & frame)
{
  if (finalized_) {
    throw PreconditionError("process_frame called after finalize");
  }
  if (static_cast<int>(frame.observations.size()) < kMinFrameFeatures) {
    throw BarrenFrameError(
      "frame " + std::to_string(frame.frame_index) + " carries fewer than " +
      std::to_string(kMinFrameFeatures) + " features");
  }

  auto capped = capped_features(frame.observations, config_.max_keyframe_features);

  if (keyframes_.empty()) {
    Keyframe first;
    first.id = 0;
    first.creation_inliers = static_cast<int>(capped.size());
    first.features = std::move(capped);
    keyframes_.push_back(std::move(first));
    last_flow_ = 0.0;
    last_matches_ = keyframes_.front().creation_inliers;
    frame_pending_ = false;
    return 0;
  }

  Keyframe & last_kf = keyframes_.back();
  const MatchSet matches = match_frames(
    std::span<const FeatureObservation>(frame.observations),
    std::span<const FeatureObservation>(last_kf.features), match_);
  const double flow = safe_flow(matches);
  last_flow_ = flow;
  last_matches_ = matches.inlier_count;

  const double inlier_floor =
    config_.keyframe_inlier_ratio * static_cast<double>(last_kf.features.size());
  const bool emit = std::abs(flow) >= config_.keyframe_flow_threshold ||
                    static_cast<double>(matches.inlier_count) < inlier_floor;
  if (!emit) {
    pending_features_ = std::move(capped);
    frame_pending_ = true;
    return std::nullopt;
  }

  double edge_flow = flow;
  if (config_.rematch_linked_keyframes) {
    edge_flow = safe_flow(match_frames(
      std::span<const FeatureObservation>(capped),
      std::span<const FeatureObservation>(last_kf.features), match_));
  }
  last_kf.flow_to_next = edge_flow;

  Keyframe next;
  next.id = static_cast<int>(keyframes_.size());
  next.creation_inliers = matches.inlier_count;
  next.features = std::move(capped);
  keyframes_.push_back(std::move(next));
  frame_pending_ = false;
  return keyframes_.back().id;
}

KeyframeMap TeachMapBuilder::finalize()
{
  if (finalized_) {
    throw PreconditionError("finalize called twice");
  }
  finalized_ = true;
  if (keyframes_.empty()) {
    throw TooShortTeachError("teach produced no keyframes");
  }

  if (frame_pending_) {
    // The final frame always closes the map, whatever flow it reached.
    Keyframe & last_kf = keyframes_.back();
    double edge_flow = last_flow_;
    if (config_.rematch_linked_keyframes) {
      edge_flow = safe_flow(match_frames(
        std::span<const FeatureObservation>(pending_features_),
        std::span<const FeatureObservation>(last_kf.features), match_));
    }
    last_kf.flow_to_next = edge_flow;
    Keyframe final_kf;
    final_kf.id = static_cast<int>(keyframes_.size());
    final_kf.creation_inliers = last_matches_;
    final_kf.features = std::move(pending_features_);
    keyframes_.push_back(std::move(final_kf));
    frame_pending_ = false;
  }

  if (keyframes_.size() < 2) {
    throw TooShortTeachError("teach ended with a single keyframe");
  }

  KeyframeMap map;
  map.keyframes = std::move(keyframes_);
  map.intrinsics = intrinsics_;
  map.config = config_;
  map.match = match_;
  validate_map(map);
  return map;
}

namespace
{

constexpr const char * kMapFormat = "ffnav-map";
constexpr int kMapVersion = 1;

jsonio::json feature_to_json(const FeatureObservation & obs)
{
  jsonio::json jd = jsonio::json::array();
  for (float v : obs.descriptor) {
    jd.push_back(v);
  }
  jsonio::json jf = {{"u", obs.pixel.u}, {"v", obs.pixel.v}, {"descriptor", std::move(jd)}};
  if (obs.debug_landmark_id) {
    jf["landmark_id"] = *obs.debug_landmark_id;
  }
  return jf;
}

FeatureObservation feature_from_json(const jsonio::json & jf)
{
  using jsonio::field;
  FeatureObservation obs;
  obs.pixel = PixelPoint{field<double>(jf, "u"), field<double>(jf, "v")};
  const auto & jd = jsonio::require(jf, "descriptor");
  if (!jd.is_array() || jd.size() != kDescriptorDim) {
    throw SchemaError("feature descriptor must hold exactly 32 components");
  }
  for (int i = 0; i < kDescriptorDim; ++i) {
    obs.descriptor[i] = jd.at(i).get<float>();
  }
  if (jf.contains("landmark_id")) {
    obs.debug_landmark_id = jf.at("landmark_id").get<std::int64_t>();
  }
  return obs;
}

}  // namespace

KeyframeMap load_map(const std::string & path)
{
  using jsonio::field;
  const auto j = jsonio::load_json_file(path);
  jsonio::check_format(j, kMapFormat, kMapVersion);

  KeyframeMap map;
  const auto & ji = jsonio::require(j, "intrinsics");
  map.intrinsics = CameraIntrinsics{
    field<double>(ji, "fx"), field<double>(ji, "fy"), field<double>(ji, "cx"),
    field<double>(ji, "cy"), field<int>(ji, "width"), field<int>(ji, "height")};
  const auto & jc = jsonio::require(j, "teach_config");
  map.config = TeachConfig{
    field<double>(jc, "keyframe_flow_threshold"), field<double>(jc, "keyframe_inlier_ratio"),
    field<int>(jc, "min_edge_matches"), field<int>(jc, "max_keyframe_features"),
    field<bool>(jc, "rematch_linked_keyframes")};
  map.match.lowe_ratio = field<double>(jsonio::require(j, "match"), "lowe_ratio");

  for (const auto & jk : jsonio::require(j, "keyframes")) {
    Keyframe kf;
    kf.id = field<int>(jk, "id");
    kf.creation_inliers = field<int>(jk, "creation_inliers");
    if (jk.contains("flow_to_next")) {
      kf.flow_to_next = jk.at("flow_to_next").get<double>();
    }
    for (const auto & jf : jsonio::require(jk, "features")) {
      kf.features.push_back(feature_from_json(jf));
    }
    map.keyframes.push_back(std::move(kf));
  }

  validate_map(map);
  return map;
}

void save_map(const KeyframeMap & map, const std::string & path)
{
  validate_map(map);
  jsonio::json j;
  j["format"] = kMapFormat;
  j["version"] = kMapVersion;
  j["intrinsics"] = {
    {"fx", map.intrinsics.fx},       {"fy", map.intrinsics.fy},
    {"cx", map.intrinsics.cx},       {"cy", map.intrinsics.cy},
    {"width", map.intrinsics.width}, {"height", map.intrinsics.height}};
  j["teach_config"] = {
    {"keyframe_flow_threshold", map.config.keyframe_flow_threshold},
    {"keyframe_inlier_ratio", map.config.keyframe_inlier_ratio},
    {"min_edge_matches", map.config.min_edge_matches},
    {"max_keyframe_features", map.config.max_keyframe_features},
    {"rematch_linked_keyframes", map.config.rematch_linked_keyframes}};
  j["match"] = {{"lowe_ratio", map.match.lowe_ratio}};
  auto & jks = j["keyframes"] = jsonio::json::array();
  for (const auto & kf : map.keyframes) {
    jsonio::json jk;
    jk["id"] = kf.id;
    jk["creation_inliers"] = kf.creation_inliers;
    if (kf.flow_to_next) {
      jk["flow_to_next"] = *kf.flow_to_next;
    }
    auto & jfs = jk["features"] = jsonio::json::array();
    for (const auto & obs : kf.features) {
      jfs.push_back(feature_to_json(obs));
    }
    jks.push_back(std::move(jk));
  }
  jsonio::save_json_file(j, path);
}

}  // namespace ffnav
