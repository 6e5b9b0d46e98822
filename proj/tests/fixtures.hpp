#pragma once

#include <memory>
#include <string>

#include "mym/matchmaking.hpp"
#include "mym/ontology.hpp"

#ifndef MYM_SOURCE_DIR
#define MYM_SOURCE_DIR "."
#endif

namespace fixtures {

inline std::string source_path(const std::string& rel) { return std::string(MYM_SOURCE_DIR) + "/" + rel; }

/// root -> {Music -> {Jazz, Rock}, Sport -> {Soccer}}
struct SmallTaxonomy {
  mym::ontology::Taxonomy t{"Interest"};
  mym::ontology::ConceptId music = t.add_concept(t.root(), "Music");
  mym::ontology::ConceptId sport = t.add_concept(t.root(), "Sport");
  mym::ontology::ConceptId jazz = t.add_concept(music, "Jazz");
  mym::ontology::ConceptId rock = t.add_concept(music, "Rock");
  mym::ontology::ConceptId soccer = t.add_concept(sport, "Soccer");
};

inline mym::matchmaking::Profile profile(mym::matchmaking::PersonId id, std::set<mym::ontology::ConceptId> interests,
                                         std::string name = "") {
  mym::matchmaking::Profile p;
  p.person_id = id;
  p.name = name.empty() ? "p" + std::to_string(id) : name;
  p.interests = std::move(interests);
  return p;
}

}  // namespace fixtures
