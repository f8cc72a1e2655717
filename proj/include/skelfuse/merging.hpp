#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelfuse/matching.hpp"
#include "skelfuse/skeleton.hpp"

namespace skelfuse {

// Tracker confidence to merge weight.
struct WeightTable {
  double none = 0.0;
  double low = 0.25;
  double medium = 0.5;
  double high = 1.0;

  double weight(Confidence c) const;
};

// Throws std::invalid_argument unless weights are non-negative and
// monotone in confidence order.
void validate(const WeightTable& w);

double weight_of(Confidence c);  // default table lookup

// Confidence-weighted average of two observations of the same joint:
// position and each orientation axis move from i toward j by
// w_j / (w_i + w_j); the axes are then re-orthonormalized. The merged
// confidence is the maximum of the two. When both weights are zero the
// sides are averaged equally and the result is marked None.
// Throws std::invalid_argument on mismatched joint ids.
Joint merge_joint(const Joint& i, const Joint& j, const WeightTable& w = {});

// Joint-wise merge; joints present on one side only are copied verbatim.
Skeleton merge_skeletons(const Skeleton& a, const Skeleton& b, int fused_body_id,
                         const WeightTable& w = {});

struct Provenance {
  enum class Kind { Merged, Isolated };
  Kind kind = Kind::Isolated;
  // Contributing (sensor_id, body_id) observations; one entry for
  // isolated skeletons, one per side for merged ones.
  std::vector<std::pair<std::string, int>> contributors;
  double pair_distance = 0;  // meters, merged only
};

struct FusedPerson {
  Skeleton skeleton;  // world frame
  Provenance provenance;
};

struct FusedFrame {
  int64_t timestamp_us = 0;
  std::vector<FusedPerson> persons;
};

// Merges the outcome's pairs and passes isolated skeletons through,
// ordered merged-by-ascending-distance first, then isolated by
// (sensor_id, body_id). Fused body ids are assigned sequentially.
FusedFrame fuse_frame(const MatchOutcome& outcome, const std::string& sensor_id_a,
                      const std::string& sensor_id_b, int64_t t_us, const WeightTable& w = {});

}  // namespace skelfuse
