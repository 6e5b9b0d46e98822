#include "mym/profile_io.hpp"

#include <fstream>

#include "mym/error.hpp"

namespace mym::matchmaking {

using nlohmann::json;

namespace {

Gender parse_gender(const std::string& s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "unspecified") return Gender::unspecified;
  throw Error(ErrorCode::ParseError, "unknown gender '" + s + "'");
}

MotionState parse_motion(const std::string& s) {
  if (s == "still") return MotionState::still;
  if (s == "walking") return MotionState::walking;
  if (s == "vehicle") return MotionState::vehicle;
  throw Error(ErrorCode::ParseError, "unknown motion_state '" + s + "'");
}

void fill_common(Profile& p, const json& j) {
  p.person_id = j.value("person_id", PersonId{0});
  p.name = j.at("name").get<std::string>();
  p.age = j.value("age", 0);
  p.gender = parse_gender(j.value("gender", std::string("unspecified")));
  if (j.contains("context") && !j.at("context").is_null()) p.context = context_from_json(j.at("context"));
}

void write_common(json& j, const Profile& p) {
  j["person_id"] = p.person_id;
  j["name"] = p.name;
  j["age"] = p.age;
  j["gender"] = to_string(p.gender);
  j["context"] = context_to_json(p.context);
}

}  // namespace

json context_to_json(const DynamicContext& c) {
  json j = json::object();
  if (c.activity) j["activity"] = *c.activity;
  if (c.orientation) j["orientation"] = *c.orientation;
  if (c.motion_state) j["motion_state"] = to_string(*c.motion_state);
  if (c.terminal) j["terminal"] = *c.terminal;
  if (c.location) j["location"] = json::array({c.location->x, c.location->y});
  return j;
}

DynamicContext context_from_json(const json& j) {
  DynamicContext c;
  if (j.contains("activity")) c.activity = j.at("activity").get<std::string>();
  if (j.contains("orientation")) c.orientation = j.at("orientation").get<double>();
  if (j.contains("motion_state")) c.motion_state = parse_motion(j.at("motion_state").get<std::string>());
  if (j.contains("terminal")) c.terminal = j.at("terminal").get<std::string>();
  if (j.contains("location") && !j.at("location").is_null()) {
    const auto& loc = j.at("location");
    if (!loc.is_array() || loc.size() != 2) throw Error(ErrorCode::ParseError, "location must be [x, y]");
    c.location = Position{loc[0].get<double>(), loc[1].get<double>()};
  }
  return c;
}

Profile profile_from_document(const json& doc, const Taxonomy& t) {
  Profile p;
  try {
    fill_common(p, doc);
    for (const auto& label : doc.at("interests")) {
      const auto path = label.get<std::string>();
      auto c = t.try_resolve(path);
      if (!c) throw Error(ErrorCode::UnknownConcept, "unknown interest label '" + path + "'");
      p.interests.insert(*c);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("profile document: ") + e.what());
  }
  validate(p, t);
  return p;
}

Profile load_profile_file(const std::string& path, const Taxonomy& t) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open profile file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return profile_from_document(doc, t);
}

json profile_to_document(const Profile& p, const Taxonomy& t) {
  json j;
  write_common(j, p);
  json interests = json::array();
  for (ConceptId c : p.interests) interests.push_back(t.path(c));
  j["interests"] = std::move(interests);
  return j;
}

json profile_to_wire(const Profile& p) {
  json j;
  write_common(j, p);
  json interests = json::array();
  for (ConceptId c : p.interests) interests.push_back(c.value);
  j["interests"] = std::move(interests);
  return j;
}

Profile profile_from_wire(const json& j) {
  Profile p;
  try {
    fill_common(p, j);
    for (const auto& id : j.at("interests")) p.interests.insert(ConceptId{id.get<std::uint32_t>()});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("profile payload: ") + e.what());
  }
  return p;
}

json score_to_json(const RelevanceScore& s) {
  return json{{"value", s.value},
              {"profile_similarity", s.profile_similarity},
              {"proximity_factor", s.proximity_factor},
              {"observer_distance", s.observer_distance}};
}

RelevanceScore score_from_json(const json& j) {
  return RelevanceScore{j.at("value").get<double>(), j.at("profile_similarity").get<double>(),
                        j.at("proximity_factor").get<double>(), j.at("observer_distance").get<double>()};
}

}  // namespace mym::matchmaking
