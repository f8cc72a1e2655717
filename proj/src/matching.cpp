#include "skelfuse/matching.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace skelfuse {

void validate(const MatchConfig& cfg) {
  if (!(cfg.d_easy > 0) || !(cfg.d_easy <= cfg.d_max)) {
    throw std::invalid_argument("match config: need 0 < d_easy <= d_max");
  }
}

std::vector<CandidatePair> candidate_pairs(const std::vector<Skeleton>& a,
                                           const std::vector<Skeleton>& b, double d_max) {
  std::vector<CandidatePair> out;
  for (size_t i = 0; i < a.size(); ++i) {
    const Vec3& pa = a[i].pelvis().position;
    for (size_t j = 0; j < b.size(); ++j) {
      const double d = (pa - b[j].pelvis().position).norm();
      if (d <= d_max) out.push_back({static_cast<int>(i), static_cast<int>(j), d});
    }
  }
  std::sort(out.begin(), out.end(), [&](const CandidatePair& l, const CandidatePair& r) {
    return std::make_tuple(l.distance, a[l.index_a].body_id, b[l.index_b].body_id, l.index_a, l.index_b) <
           std::make_tuple(r.distance, a[r.index_a].body_id, b[r.index_b].body_id, r.index_a, r.index_b);
  });
  return out;
}

namespace {

// Matching state over the candidate set. Candidate ordering inside the
// resolution passes uses the side-symmetric key (distance, sorted body
// id pair) so that swapping the two sensors swaps roles but never the
// chosen pairs.
struct Resolver {
  const std::vector<Skeleton>& a;
  const std::vector<Skeleton>& b;
  std::vector<CandidatePair> candidates;  // symmetric order
  std::vector<bool> matched_a, matched_b;
  std::vector<std::pair<int, int>> accepted;  // (index_a, index_b)

  Resolver(const std::vector<Skeleton>& a_in, const std::vector<Skeleton>& b_in, double d_max)
      : a(a_in), b(b_in), candidates(candidate_pairs(a_in, b_in, d_max)),
        matched_a(a_in.size(), false), matched_b(b_in.size(), false) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const CandidatePair& l, const CandidatePair& r) {
                       return symmetric_key(l) < symmetric_key(r);
                     });
  }

  std::tuple<double, int, int, int, int> symmetric_key(const CandidatePair& c) const {
    const int ida = a[c.index_a].body_id;
    const int idb = b[c.index_b].body_id;
    return {c.distance, std::min(ida, idb), std::max(ida, idb), std::min(c.index_a, c.index_b),
            std::max(c.index_a, c.index_b)};
  }

  bool open(const CandidatePair& c) const { return !matched_a[c.index_a] && !matched_b[c.index_b]; }

  void accept(const CandidatePair& c) {
    matched_a[c.index_a] = true;
    matched_b[c.index_b] = true;
    accepted.emplace_back(c.index_a, c.index_b);
  }

  // Remaining candidate counts per skeleton.
  void degrees(std::vector<int>& deg_a, std::vector<int>& deg_b) const {
    deg_a.assign(a.size(), 0);
    deg_b.assign(b.size(), 0);
    for (const CandidatePair& c : candidates) {
      if (!open(c)) continue;
      ++deg_a[c.index_a];
      ++deg_b[c.index_b];
    }
  }
};

}  // namespace

MatchOutcome match_skeletons(const std::vector<Skeleton>& a, const std::vector<Skeleton>& b,
                             const MatchConfig& cfg, const MatchHistory& history) {
  validate(cfg);
  Resolver res(a, b, cfg.d_max);
  std::vector<int> deg_a, deg_b;

  // Pass 1: unambiguous cases. Both members have exactly one candidate
  // (hence are mutual nearest neighbors) and sit within d_easy.
  res.degrees(deg_a, deg_b);
  for (const CandidatePair& c : res.candidates) {
    if (!res.open(c)) continue;
    if (c.distance <= cfg.d_easy && deg_a[c.index_a] == 1 && deg_b[c.index_b] == 1) res.accept(c);
  }

  // Pass 2: earlier matches may have removed all but one candidate of a
  // remaining skeleton; such forced choices are taken until none is left.
  for (bool changed = true; changed;) {
    changed = false;
    res.degrees(deg_a, deg_b);
    for (const CandidatePair& c : res.candidates) {
      if (!res.open(c)) continue;
      if (deg_a[c.index_a] == 1 || deg_b[c.index_b] == 1) {
        res.accept(c);
        changed = true;
        break;  // degrees are stale after an acceptance
      }
    }
  }

  // Pass 3: persistent pairs from the previous fused frame break ties.
  for (const CandidatePair& c : res.candidates) {
    if (!res.open(c)) continue;
    if (history.contains(a[c.index_a].body_id, b[c.index_b].body_id)) res.accept(c);
  }

  // Pass 4: greedy ascending-distance resolution of what remains, which
  // keeps the worst accepted pair as short as possible.
  for (const CandidatePair& c : res.candidates) {
    if (res.open(c)) res.accept(c);
  }

  // Assemble: pairs in acceptance order are re-sorted by the symmetric
  // key for a stable, side-independent output order.
  std::sort(res.accepted.begin(), res.accepted.end(), [&](const auto& l, const auto& r) {
    const double dl = (a[l.first].pelvis().position - b[l.second].pelvis().position).norm();
    const double dr = (a[r.first].pelvis().position - b[r.second].pelvis().position).norm();
    const int la = a[l.first].body_id, lb = b[l.second].body_id;
    const int ra = a[r.first].body_id, rb = b[r.second].body_id;
    return std::make_tuple(dl, std::min(la, lb), std::max(la, lb), l.first) <
           std::make_tuple(dr, std::min(ra, rb), std::max(ra, rb), r.first);
  });

  MatchOutcome out;
  for (const auto& [ia, ib] : res.accepted) {
    const double d = (a[ia].pelvis().position - b[ib].pelvis().position).norm();
    out.pairs.push_back({a[ia], b[ib], d});
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (!res.matched_a[i]) out.isolated_a.push_back(a[i]);
  }
  for (size_t j = 0; j < b.size(); ++j) {
    if (!res.matched_b[j]) out.isolated_b.push_back(b[j]);
  }
  return out;
}

MatchHistory fuse_match_history(const MatchOutcome& outcome) {
  MatchHistory h;
  for (const MatchedPair& p : outcome.pairs) h.pairs.insert({p.a.body_id, p.b.body_id});
  return h;
}

}  // namespace skelfuse
