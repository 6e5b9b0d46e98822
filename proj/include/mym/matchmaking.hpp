#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mym/ontology.hpp"

namespace mym::matchmaking {

using ontology::ConceptId;
using ontology::Taxonomy;

using PersonId = std::uint64_t;

enum class Gender { female, male, unspecified };
enum class MotionState { still, walking, vehicle };

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

/// Context that changes while the device moves. Only location enters the
/// relevance score; the rest is carried along with the profile.
struct DynamicContext {
  std::optional<std::string> activity;
  std::optional<double> orientation;  // degrees, [0, 360)
  std::optional<MotionState> motion_state;
  std::optional<std::string> terminal;
  std::optional<Position> location;

  friend bool operator==(const DynamicContext&, const DynamicContext&) = default;
};

struct Profile {
  PersonId person_id = 0;
  std::string name;
  int age = 0;
  Gender gender = Gender::unspecified;
  std::set<ConceptId> interests;
  DynamicContext context;

  friend bool operator==(const Profile&, const Profile&) = default;
};

/// Throws InvalidParams / UnknownConcept when the profile breaks its invariants
/// against `t`.
void validate(const Profile& p, const Taxonomy& t);

struct MatchParams {
  double match_threshold = 0.75;
  double near_radius = 10.0;     // meters
  double decay_length = 100.0;   // meters
  double exact_match_floor = 0.9999;

  void validate() const;
};

struct RelevanceScore {
  double value = 0.0;
  double profile_similarity = 0.0;
  double proximity_factor = 0.0;
  double observer_distance = 0.0;

  friend bool operator==(const RelevanceScore&, const RelevanceScore&) = default;
};

enum class MatchClass { no_match = 0, match = 1, exact_match = 2 };

const char* to_string(MatchClass c);
const char* to_string(Gender g);
const char* to_string(MotionState m);

/// Symmetric best-match average of concept similarities; 0 when either set is
/// empty.
double profile_similarity(const Profile& p, const Profile& q, const Taxonomy& t);

/// 1 inside the near radius, exponential decay beyond it.
double proximity_factor(double meters, const MatchParams& params);

RelevanceScore relevance(const Profile& monitor, const Profile& reference, double meters, const Taxonomy& t,
                         const MatchParams& params);

MatchClass is_match(const RelevanceScore& s, const MatchParams& params);

struct Candidate {
  Profile profile;
  double meters = 0.0;
};

struct RankedCandidate {
  PersonId person_id = 0;
  RelevanceScore score;

  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

/// Scores every candidate against `monitor` in parallel and orders by value
/// descending, then person_id ascending. The monitor itself is skipped.
std::vector<RankedCandidate> rank_candidates(const Profile& monitor, const std::vector<Candidate>& candidates,
                                             const Taxonomy& t, const MatchParams& params);

/// Single-threaded reference for rank_candidates; results are identical.
std::vector<RankedCandidate> rank_candidates_serial(const Profile& monitor, const std::vector<Candidate>& candidates,
                                                    const Taxonomy& t, const MatchParams& params);

}  // namespace mym::matchmaking
