#include "mym/matchmaking.hpp"

#include <algorithm>
#include <cmath>

#include "mym/error.hpp"

namespace mym::matchmaking {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

const char* to_string(MatchClass c) {
  switch (c) {
    case MatchClass::no_match: return "no_match";
    case MatchClass::match: return "match";
    case MatchClass::exact_match: return "exact_match";
  }
  return "no_match";
}

const char* to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::unspecified: return "unspecified";
  }
  return "unspecified";
}

const char* to_string(MotionState m) {
  switch (m) {
    case MotionState::still: return "still";
    case MotionState::walking: return "walking";
    case MotionState::vehicle: return "vehicle";
  }
  return "still";
}

void validate(const Profile& p, const Taxonomy& t) {
  if (p.name.empty()) throw Error(ErrorCode::InvalidParams, "profile name is empty");
  if (p.age < 0) throw Error(ErrorCode::InvalidParams, "profile age is negative");
  if (p.context.orientation && !(*p.context.orientation >= 0.0 && *p.context.orientation < 360.0)) {
    throw Error(ErrorCode::InvalidParams, "orientation outside [0,360)");
  }
  for (ConceptId c : p.interests) {
    if (!t.contains(c)) throw Error(ErrorCode::UnknownConcept, "interest id " + std::to_string(c.value));
  }
}

void MatchParams::validate() const {
  if (!(match_threshold > 0.0 && match_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "match_threshold must lie in (0,1]");
  }
  if (!(match_threshold <= exact_match_floor)) {
    throw Error(ErrorCode::InvalidParams, "match_threshold must not exceed exact_match_floor");
  }
  if (!(near_radius > 0.0)) throw Error(ErrorCode::InvalidParams, "near_radius must be positive");
  if (!(decay_length > 0.0)) throw Error(ErrorCode::InvalidParams, "decay_length must be positive");
}

namespace {

// Sum over `from` of the best similarity against any member of `to`.
double best_match_sum(const std::set<ConceptId>& from, const std::set<ConceptId>& to, const Taxonomy& t) {
  double sum = 0.0;
  for (ConceptId a : from) {
    double best = 0.0;
    for (ConceptId b : to) {
      best = std::max(best, t.concept_similarity(a, b));
      if (best == 1.0) break;
    }
    sum += best;
  }
  return sum;
}

}  // namespace

double profile_similarity(const Profile& p, const Profile& q, const Taxonomy& t) {
  for (const Profile* x : {&p, &q}) {
    for (ConceptId c : x->interests) {
      if (!t.contains(c)) throw Error(ErrorCode::UnknownConcept, "interest id " + std::to_string(c.value));
    }
  }
  if (p.interests.empty() || q.interests.empty()) return 0.0;
  // The two directional sums are formed separately so the result does not
  // depend on argument order.
  const double forward = best_match_sum(p.interests, q.interests, t);
  const double backward = best_match_sum(q.interests, p.interests, t);
  return (forward + backward) / static_cast<double>(p.interests.size() + q.interests.size());
}

double proximity_factor(double meters, const MatchParams& params) {
  if (!(meters >= 0.0)) throw Error(ErrorCode::DomainError, "distance must be non-negative");
  if (meters <= params.near_radius) return 1.0;
  return std::exp(-(meters - params.near_radius) / params.decay_length);
}

RelevanceScore relevance(const Profile& monitor, const Profile& reference, double meters, const Taxonomy& t,
                         const MatchParams& params) {
  RelevanceScore s;
  s.observer_distance = meters;
  s.proximity_factor = proximity_factor(meters, params);
  s.profile_similarity = profile_similarity(monitor, reference, t);
  s.value = s.profile_similarity * s.proximity_factor;
  return s;
}

MatchClass is_match(const RelevanceScore& s, const MatchParams& params) {
  if (s.value >= params.exact_match_floor) return MatchClass::exact_match;
  if (s.value >= params.match_threshold) return MatchClass::match;
  return MatchClass::no_match;
}

namespace {

void check_candidates(const Profile& monitor, const std::vector<Candidate>& candidates, const Taxonomy& t) {
  auto check = [&](const Profile& p) {
    for (ConceptId c : p.interests) {
      if (!t.contains(c)) throw Error(ErrorCode::UnknownConcept, "interest id " + std::to_string(c.value));
    }
  };
  check(monitor);
  for (const Candidate& c : candidates) {
    check(c.profile);
    if (!(c.meters >= 0.0)) throw Error(ErrorCode::DomainError, "candidate distance must be non-negative");
  }
}

void order(std::vector<RankedCandidate>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score.value != b.score.value) return a.score.value > b.score.value;
    return a.person_id < b.person_id;
  });
}

std::vector<RankedCandidate> drop_monitor(std::vector<RankedCandidate> scored, const std::vector<Candidate>& candidates,
                                          PersonId monitor) {
  std::vector<RankedCandidate> out;
  out.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (candidates[i].profile.person_id != monitor) out.push_back(scored[i]);
  }
  return out;
}

}  // namespace

std::vector<RankedCandidate> rank_candidates_serial(const Profile& monitor, const std::vector<Candidate>& candidates,
                                                    const Taxonomy& t, const MatchParams& params) {
  check_candidates(monitor, candidates, t);
  std::vector<RankedCandidate> scored(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scored[i] = {candidates[i].profile.person_id,
                 relevance(monitor, candidates[i].profile, candidates[i].meters, t, params)};
  }
  auto out = drop_monitor(std::move(scored), candidates, monitor.person_id);
  order(out);
  return out;
}

std::vector<RankedCandidate> rank_candidates(const Profile& monitor, const std::vector<Candidate>& candidates,
                                             const Taxonomy& t, const MatchParams& params) {
  // Validation happens up front: nothing inside the parallel region throws.
  check_candidates(monitor, candidates, t);
  std::vector<RankedCandidate> scored(candidates.size());
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const Candidate& c = candidates[static_cast<std::size_t>(i)];
    scored[static_cast<std::size_t>(i)] = {c.profile.person_id, relevance(monitor, c.profile, c.meters, t, params)};
  }
  auto out = drop_monitor(std::move(scored), candidates, monitor.person_id);
  order(out);
  return out;
}

}  // namespace mym::matchmaking
