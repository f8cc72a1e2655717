#include "skelfuse/merging.hpp"

#include <algorithm>
#include <stdexcept>

namespace skelfuse {

double WeightTable::weight(Confidence c) const {
  switch (c) {
    case Confidence::None: return none;
    case Confidence::Low: return low;
    case Confidence::Medium: return medium;
    case Confidence::High: return high;
  }
  throw std::invalid_argument("bad confidence value");
}

void validate(const WeightTable& w) {
  if (w.none < 0 || w.low < w.none || w.medium < w.low || w.high < w.medium) {
    throw std::invalid_argument("weight table: weights must be non-negative and monotone");
  }
}

double weight_of(Confidence c) { return WeightTable{}.weight(c); }

namespace {

Vec3 blend(const Vec3& vi, const Vec3& vj, double t) {
  if (t == 0.0) return vi;
  if (t == 1.0) return vj;
  return vi + t * (vj - vi);
}

}  // namespace

Joint merge_joint(const Joint& i, const Joint& j, const WeightTable& w) {
  if (i.id != j.id) {
    throw std::invalid_argument(std::string("merge_joint: id mismatch (") + to_string(i.id) + " vs " +
                                to_string(j.id) + ")");
  }
  const double wi = w.weight(i.confidence);
  const double wj = w.weight(j.confidence);

  Joint out;
  out.id = i.id;
  double t;  // fraction moved from i toward j
  if (wi + wj > 0) {
    t = wj / (wi + wj);
    out.confidence = std::max(i.confidence, j.confidence);
    // A zero-weight side passes the other one through untouched.
    if (t == 0.0) return i;
    if (t == 1.0) return j;
  } else {
    t = 0.5;
    out.confidence = Confidence::None;
  }
  out.position = blend(i.position, j.position, t);
  const Vec3 x = blend(i.axes.x, j.axes.x, t);
  const Vec3 y = blend(i.axes.y, j.axes.y, t);
  const Vec3 z = blend(i.axes.z, j.axes.z, t);
  try {
    out.axes = orthonormalize(x, y, z);
  } catch (const std::runtime_error&) {
    // Opposed input triads cancel out; keep the dominant side's basis.
    out.axes = t <= 0.5 ? i.axes : j.axes;
  }
  return out;
}

Skeleton merge_skeletons(const Skeleton& a, const Skeleton& b, int fused_body_id,
                         const WeightTable& w) {
  Skeleton out;
  out.body_id = fused_body_id;
  for (const Joint& ja : a.joints) {
    const Joint* jb = b.find(ja.id);
    out.joints.push_back(jb ? merge_joint(ja, *jb, w) : ja);
  }
  for (const Joint& jb : b.joints) {
    if (!a.find(jb.id)) out.joints.push_back(jb);
  }
  return out;
}

FusedFrame fuse_frame(const MatchOutcome& outcome, const std::string& sensor_id_a,
                      const std::string& sensor_id_b, int64_t t_us, const WeightTable& w) {
  FusedFrame out;
  out.timestamp_us = t_us;

  std::vector<const MatchedPair*> pairs;
  for (const MatchedPair& p : outcome.pairs) pairs.push_back(&p);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const MatchedPair* l, const MatchedPair* r) { return l->distance < r->distance; });

  for (const MatchedPair* p : pairs) {
    FusedPerson person;
    person.provenance.kind = Provenance::Kind::Merged;
    person.provenance.contributors = {{sensor_id_a, p->a.body_id}, {sensor_id_b, p->b.body_id}};
    person.provenance.pair_distance = p->distance;
    person.skeleton = merge_skeletons(p->a, p->b, static_cast<int>(out.persons.size()), w);
    out.persons.push_back(std::move(person));
  }

  std::vector<std::pair<std::pair<std::string, int>, const Skeleton*>> isolated;
  for (const Skeleton& s : outcome.isolated_a) isolated.push_back({{sensor_id_a, s.body_id}, &s});
  for (const Skeleton& s : outcome.isolated_b) isolated.push_back({{sensor_id_b, s.body_id}, &s});
  std::sort(isolated.begin(), isolated.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  for (const auto& [origin, skel] : isolated) {
    FusedPerson person;
    person.provenance.kind = Provenance::Kind::Isolated;
    person.provenance.contributors = {origin};
    person.skeleton = *skel;
    person.skeleton.body_id = static_cast<int>(out.persons.size());
    out.persons.push_back(std::move(person));
  }
  return out;
}

}  // namespace skelfuse
