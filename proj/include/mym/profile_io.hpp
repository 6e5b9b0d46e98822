#pragma once

#include <string>

#include <json.hpp>

#include "mym/matchmaking.hpp"

namespace mym::matchmaking {

/// Profile document form: interests are taxonomy paths such as "Music/Jazz".
/// Unknown paths raise UnknownConcept naming the label.
Profile profile_from_document(const nlohmann::json& doc, const Taxonomy& t);
Profile load_profile_file(const std::string& path, const Taxonomy& t);
nlohmann::json profile_to_document(const Profile& p, const Taxonomy& t);

/// Compact form used on the wire and in operation logs: interests are dense
/// concept ids, so both sides must share the taxonomy.
nlohmann::json profile_to_wire(const Profile& p);
Profile profile_from_wire(const nlohmann::json& j);

nlohmann::json context_to_json(const DynamicContext& c);
DynamicContext context_from_json(const nlohmann::json& j);

nlohmann::json score_to_json(const RelevanceScore& s);
RelevanceScore score_from_json(const nlohmann::json& j);

}  // namespace mym::matchmaking
