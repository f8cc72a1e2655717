#pragma once

#include <set>
#include <utility>
#include <vector>

#include "skelfuse/skeleton.hpp"

namespace skelfuse {

struct MatchConfig {
  double d_easy = 0.3;  // unambiguous-match threshold, meters
  double d_max = 0.8;   // candidate radius / ambiguity bound, meters
};

void validate(const MatchConfig& cfg);

// (body_id_a, body_id_b) pairs matched in the previous fused frame.
struct MatchHistory {
  std::set<std::pair<int, int>> pairs;

  bool contains(int body_a, int body_b) const { return pairs.count({body_a, body_b}) > 0; }
};

struct CandidatePair {
  int index_a = 0;
  int index_b = 0;
  double distance = 0;  // inter-pelvis, meters
};

// All cross pairs with inter-pelvis distance <= d_max, sorted by
// (distance, body_id_a, body_id_b) ascending.
std::vector<CandidatePair> candidate_pairs(const std::vector<Skeleton>& a,
                                           const std::vector<Skeleton>& b, double d_max);

struct MatchedPair {
  Skeleton a;
  Skeleton b;
  double distance = 0;
};

struct MatchOutcome {
  std::vector<MatchedPair> pairs;
  std::vector<Skeleton> isolated_a;
  std::vector<Skeleton> isolated_b;
};

// Pairs skeletons from two sensors (both already world-frame and
// pre-filtered) in four passes: unique mutual matches within d_easy,
// forced leftovers with a single remaining candidate, history-backed
// choices among ambiguous candidates, then greedy ascending-distance
// resolution. Leftovers come back isolated.
MatchOutcome match_skeletons(const std::vector<Skeleton>& a, const std::vector<Skeleton>& b,
                             const MatchConfig& cfg, const MatchHistory& history);

MatchHistory fuse_match_history(const MatchOutcome& outcome);

}  // namespace skelfuse
