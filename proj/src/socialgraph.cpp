#include "mym/socialgraph.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include "mym/error.hpp"
#include "mym/profile_io.hpp"

namespace mym::socialgraph {

using nlohmann::json;

const char* to_string(Role r) { return r == Role::super ? "super" : "basic"; }

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::friend_of: return "friend";
    case EdgeKind::like: return "like";
    case EdgeKind::membership: return "membership";
    case EdgeKind::tag: return "tag";
    case EdgeKind::bookmark: return "bookmark";
  }
  return "friend";
}

const char* to_string(ContentKind k) {
  switch (k) {
    case ContentKind::post: return "post";
    case ContentKind::blog: return "blog";
    case ContentKind::comment: return "comment";
  }
  return "post";
}

namespace {

Role parse_role(const std::string& s) {
  if (s == "basic") return Role::basic;
  if (s == "super") return Role::super;
  throw Error(ErrorCode::ParseError, "unknown role '" + s + "'");
}

ContentKind parse_content_kind(const std::string& s) {
  if (s == "post") return ContentKind::post;
  if (s == "blog") return ContentKind::blog;
  if (s == "comment") return ContentKind::comment;
  throw Error(ErrorCode::ParseError, "unknown content kind '" + s + "'");
}

std::string id_str(std::uint64_t v) { return std::to_string(v); }

}  // namespace

SocialGraph::SocialGraph(GraphParams params) : params_(params) {}

void SocialGraph::advance_clock(SimTime now) { now_ = std::max(now_, now); }

void SocialGraph::record(json op) {
  const std::uint64_t seq = log_.empty() ? 1 : log_.back().seq + 1;
  log_.push_back(OpRecord{seq, now_, std::move(op)});
}

Prosumer& SocialGraph::active_prosumer(ProsumerId p) {
  auto it = prosumers_.find(p);
  if (it == prosumers_.end()) throw Error(ErrorCode::UnknownProsumer, "prosumer " + id_str(p.value));
  if (!it->second.active) throw Error(ErrorCode::ProsumerBanned, "prosumer " + id_str(p.value) + " is banned");
  return it->second;
}

ContentNode& SocialGraph::existing_content(ContentId c) {
  auto it = contents_.find(c);
  if (it == contents_.end()) throw Error(ErrorCode::UnknownContent, "content " + id_str(c.value));
  return it->second;
}

const Prosumer& SocialGraph::prosumer(ProsumerId p) const {
  auto it = prosumers_.find(p);
  if (it == prosumers_.end()) throw Error(ErrorCode::UnknownProsumer, "prosumer " + id_str(p.value));
  return it->second;
}

const ContentNode& SocialGraph::content(ContentId c) const {
  auto it = contents_.find(c);
  if (it == contents_.end()) throw Error(ErrorCode::UnknownContent, "content " + id_str(c.value));
  return it->second;
}

const Group& SocialGraph::group(GroupId g) const {
  auto it = groups_.find(g);
  if (it == groups_.end()) throw Error(ErrorCode::UnknownGroup, "group " + id_str(g.value));
  return it->second;
}

std::optional<ProsumerId> SocialGraph::find_prosumer(PersonId person) const {
  auto it = by_person_.find(person);
  if (it == by_person_.end()) return std::nullopt;
  return it->second;
}

std::optional<GroupId> SocialGraph::find_group(const std::string& name) const {
  auto it = group_names_.find(name);
  if (it == group_names_.end()) return std::nullopt;
  return it->second;
}

EdgeId SocialGraph::add_edge(EdgeKind kind, ProsumerId src, std::uint64_t dst, std::optional<ConceptId> concept_id) {
  const EdgeKey key{kind, src.value, dst, concept_id ? concept_id->value : 0};
  if (edge_index_.count(key)) {
    throw Error(ErrorCode::DuplicateEdge, std::string(to_string(kind)) + " edge " + id_str(src.value) + "->" +
                                              id_str(dst) + " already exists");
  }
  const EdgeId id{next_edge_++};
  edges_.emplace(id, SocialEdge{kind, src, dst, concept_id, now_});
  edge_index_.emplace(key, id);
  return id;
}

ProsumerId SocialGraph::incarnate(const Profile& profile, Role role) {
  if (by_person_.count(profile.person_id)) {
    throw Error(ErrorCode::AlreadyIncarnated, "person " + id_str(profile.person_id));
  }
  if (profile.name.empty()) throw Error(ErrorCode::InvalidParams, "profile name is empty");
  const ProsumerId id{next_prosumer_++};
  prosumers_.emplace(id, Prosumer{id, profile, role, true});
  by_person_.emplace(profile.person_id, id);
  friends_[id];
  record(json{{"op", "incarnate"}, {"profile", matchmaking::profile_to_wire(profile)}, {"role", to_string(role)},
              {"result", id.value}});
  return id;
}

EdgeId SocialGraph::befriend(ProsumerId a, ProsumerId b) {
  if (a == b) throw Error(ErrorCode::SelfFriendship, "prosumer " + id_str(a.value) + " cannot befriend itself");
  active_prosumer(a);
  active_prosumer(b);
  const ProsumerId lo = std::min(a, b);
  const ProsumerId hi = std::max(a, b);
  const EdgeId id = add_edge(EdgeKind::friend_of, lo, hi.value, std::nullopt);
  friends_[lo].insert(hi);
  friends_[hi].insert(lo);
  record(json{{"op", "befriend"}, {"a", a.value}, {"b", b.value}, {"result", id.value}});
  return id;
}

EdgeId SocialGraph::content_edge(EdgeKind kind, ProsumerId p, ContentId c, std::optional<ConceptId> concept_id) {
  active_prosumer(p);
  existing_content(c);
  return add_edge(kind, p, c.value, concept_id);
}

EdgeId SocialGraph::like(ProsumerId p, ContentId c) {
  const EdgeId id = content_edge(EdgeKind::like, p, c, std::nullopt);
  record(json{{"op", "like"}, {"prosumer", p.value}, {"content", c.value}, {"result", id.value}});
  return id;
}

EdgeId SocialGraph::bookmark(ProsumerId p, ContentId c) {
  const EdgeId id = content_edge(EdgeKind::bookmark, p, c, std::nullopt);
  record(json{{"op", "bookmark"}, {"prosumer", p.value}, {"content", c.value}, {"result", id.value}});
  return id;
}

EdgeId SocialGraph::tag(ProsumerId p, ContentId c, ConceptId concept_id) {
  const EdgeId id = content_edge(EdgeKind::tag, p, c, concept_id);
  record(json{{"op", "tag"},
              {"prosumer", p.value},
              {"content", c.value},
              {"concept", concept_id.value},
              {"result", id.value}});
  return id;
}

int SocialGraph::vote(ProsumerId p, ContentId c, int v) {
  if (v != 1 && v != -1) throw Error(ErrorCode::DomainError, "vote must be +1 or -1");
  active_prosumer(p);
  ContentNode& node = existing_content(c);
  node.votes[p] = v;
  const int t = tally(c);
  record(json{{"op", "vote"}, {"prosumer", p.value}, {"content", c.value}, {"value", v}, {"result", t}});
  return t;
}

ContentId SocialGraph::post_content(ProsumerId author, ContentKind kind, std::string body,
                                    std::optional<ContentId> parent) {
  active_prosumer(author);
  if (body.size() > params_.body_limit) {
    throw Error(ErrorCode::BodyTooLarge,
                std::to_string(body.size()) + " bytes exceeds limit " + std::to_string(params_.body_limit));
  }
  if (kind == ContentKind::comment) {
    if (!parent) throw Error(ErrorCode::BadParent, "comment requires a parent");
    if (!contents_.count(*parent)) throw Error(ErrorCode::BadParent, "parent content " + id_str(parent->value) + " not found");
  } else if (parent) {
    throw Error(ErrorCode::BadParent, std::string(to_string(kind)) + " cannot have a parent");
  }
  const ContentId id{next_content_++};
  json op{{"op", "post_content"}, {"author", author.value}, {"kind", to_string(kind)}, {"body", body},
          {"result", id.value}};
  if (parent) {
    op["parent"] = parent->value;
    replies_[*parent].insert(id);
  }
  contents_.emplace(id, ContentNode{id, author, kind, std::move(body), parent, {}});
  record(std::move(op));
  return id;
}

GroupId SocialGraph::form_group(ProsumerId owner, std::string name) {
  active_prosumer(owner);
  if (name.empty()) throw Error(ErrorCode::InvalidParams, "group name is empty");
  if (group_names_.count(name)) throw Error(ErrorCode::DuplicateGroupName, "group '" + name + "'");
  const GroupId id{next_group_++};
  add_edge(EdgeKind::membership, owner, id.value, std::nullopt);
  groups_.emplace(id, Group{id, name, owner, {owner}});
  group_names_.emplace(name, id);
  record(json{{"op", "form_group"}, {"owner", owner.value}, {"name", name}, {"result", id.value}});
  return id;
}

EdgeId SocialGraph::join_group(ProsumerId p, GroupId g) {
  active_prosumer(p);
  auto it = groups_.find(g);
  if (it == groups_.end()) throw Error(ErrorCode::UnknownGroup, "group " + id_str(g.value));
  if (it->second.members.count(p)) {
    throw Error(ErrorCode::AlreadyMember, "prosumer " + id_str(p.value) + " in group '" + it->second.name + "'");
  }
  const EdgeId id = add_edge(EdgeKind::membership, p, g.value, std::nullopt);
  it->second.members.insert(p);
  record(json{{"op", "join_group"}, {"prosumer", p.value}, {"group", g.value}, {"result", id.value}});
  return id;
}

void SocialGraph::remove_content_tree(ContentId c) {
  std::vector<ContentId> doomed{c};
  for (std::size_t i = 0; i < doomed.size(); ++i) {
    auto r = replies_.find(doomed[i]);
    if (r == replies_.end()) continue;
    doomed.insert(doomed.end(), r->second.begin(), r->second.end());
  }
  const std::set<std::uint64_t> ids = [&] {
    std::set<std::uint64_t> s;
    for (ContentId d : doomed) s.insert(d.value);
    return s;
  }();
  for (auto it = edges_.begin(); it != edges_.end();) {
    const SocialEdge& e = it->second;
    const bool content_kind = e.kind == EdgeKind::like || e.kind == EdgeKind::bookmark || e.kind == EdgeKind::tag;
    if (content_kind && ids.count(e.dst)) {
      edge_index_.erase(EdgeKey{e.kind, e.src.value, e.dst, e.tag_concept ? e.tag_concept->value : 0});
      it = edges_.erase(it);
    } else {
      ++it;
    }
  }
  for (ContentId d : doomed) {
    const auto& node = contents_.at(d);
    if (node.parent) {
      auto r = replies_.find(*node.parent);
      if (r != replies_.end()) r->second.erase(d);
    }
    replies_.erase(d);
    contents_.erase(d);
  }
}

void SocialGraph::moderate(ProsumerId actor, const ModerationAction& action) {
  const Prosumer& who = active_prosumer(actor);
  if (who.role != Role::super) {
    throw Error(ErrorCode::NotSuperProsumer, "prosumer " + id_str(actor.value) + " is not a super prosumer");
  }
  if (const auto* rc = std::get_if<RemoveContent>(&action)) {
    if (!contents_.count(rc->content)) throw Error(ErrorCode::UnknownTarget, "content " + id_str(rc->content.value));
    remove_content_tree(rc->content);
    record(json{{"op", "moderate"}, {"actor", actor.value}, {"action", "remove_content"},
                {"target", rc->content.value}});
  } else {
    const auto& ban = std::get<Ban>(action);
    auto it = prosumers_.find(ban.prosumer);
    if (it == prosumers_.end()) throw Error(ErrorCode::UnknownTarget, "prosumer " + id_str(ban.prosumer.value));
    it->second.active = false;
    record(json{{"op", "moderate"}, {"actor", actor.value}, {"action", "ban"}, {"target", ban.prosumer.value}});
  }
}

std::set<ProsumerId> SocialGraph::neighbors(ProsumerId p) const {
  prosumer(p);
  auto it = friends_.find(p);
  return it == friends_.end() ? std::set<ProsumerId>{} : it->second;
}

std::set<ProsumerId> SocialGraph::mutual_friends(ProsumerId a, ProsumerId b) const {
  const auto na = neighbors(a);
  const auto nb = neighbors(b);
  std::set<ProsumerId> out;
  std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::inserter(out, out.end()));
  return out;
}

int SocialGraph::degree(ProsumerId p) const { return static_cast<int>(neighbors(p).size()); }

int SocialGraph::likes(ContentId c) const {
  content(c);
  int n = 0;
  for (const auto& [id, e] : edges_) n += e.kind == EdgeKind::like && e.dst == c.value;
  return n;
}

int SocialGraph::bookmarks(ContentId c) const {
  content(c);
  int n = 0;
  for (const auto& [id, e] : edges_) n += e.kind == EdgeKind::bookmark && e.dst == c.value;
  return n;
}

int SocialGraph::tally(ContentId c) const {
  int sum = 0;
  for (const auto& [p, v] : content(c).votes) sum += v;
  return sum;
}

std::size_t SocialGraph::friend_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const auto& kv) { return kv.second.kind == EdgeKind::friend_of; }));
}

void SocialGraph::write_op_log(std::ostream& out) const {
  for (const OpRecord& r : log_) {
    json line = r.op;
    line["seq"] = r.seq;
    line["t"] = r.time;
    out << line.dump() << '\n';
  }
}

void SocialGraph::apply(const json& op) {
  const std::string name = op.at("op").get<std::string>();
  auto pid = [&](const char* key) { return ProsumerId{op.at(key).get<std::uint64_t>()}; };
  auto cid = [&](const char* key) { return ContentId{op.at(key).get<std::uint64_t>()}; };
  std::uint64_t result = 0;
  bool has_result = true;
  if (name == "incarnate") {
    result = incarnate(matchmaking::profile_from_wire(op.at("profile")), parse_role(op.at("role").get<std::string>())).value;
  } else if (name == "befriend") {
    result = befriend(pid("a"), pid("b")).value;
  } else if (name == "like") {
    result = like(pid("prosumer"), cid("content")).value;
  } else if (name == "bookmark") {
    result = bookmark(pid("prosumer"), cid("content")).value;
  } else if (name == "tag") {
    result = tag(pid("prosumer"), cid("content"), ConceptId{op.at("concept").get<std::uint32_t>()}).value;
  } else if (name == "vote") {
    const int t = vote(pid("prosumer"), cid("content"), op.at("value").get<int>());
    if (t != op.at("result").get<int>()) throw Error(ErrorCode::ParseError, "vote tally diverged during replay");
    has_result = false;
  } else if (name == "post_content") {
    std::optional<ContentId> parent;
    if (op.contains("parent")) parent = cid("parent");
    result = post_content(pid("author"), parse_content_kind(op.at("kind").get<std::string>()),
                          op.at("body").get<std::string>(), parent)
                 .value;
  } else if (name == "form_group") {
    result = form_group(pid("owner"), op.at("name").get<std::string>()).value;
  } else if (name == "join_group") {
    result = join_group(pid("prosumer"), GroupId{op.at("group").get<std::uint64_t>()}).value;
  } else if (name == "moderate") {
    const std::string action = op.at("action").get<std::string>();
    const auto target = op.at("target").get<std::uint64_t>();
    if (action == "remove_content") {
      moderate(pid("actor"), RemoveContent{ContentId{target}});
    } else if (action == "ban") {
      moderate(pid("actor"), Ban{ProsumerId{target}});
    } else {
      throw Error(ErrorCode::ParseError, "unknown moderation action '" + action + "'");
    }
    has_result = false;
  } else {
    throw Error(ErrorCode::ParseError, "unknown operation '" + name + "'");
  }
  if (has_result && op.contains("result") && op.at("result").get<std::uint64_t>() != result) {
    throw Error(ErrorCode::ParseError, "operation '" + name + "' produced id " + std::to_string(result) +
                                           ", log recorded " + std::to_string(op.at("result").get<std::uint64_t>()));
  }
}

SocialGraph SocialGraph::replay(std::istream& in, GraphParams params) {
  SocialGraph g(params);
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t last_seq = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json op = json::parse(line);
      const auto seq = op.at("seq").get<std::uint64_t>();
      if (seq <= last_seq) {
        throw Error(ErrorCode::ParseError, "sequence number " + std::to_string(seq) + " does not increase");
      }
      last_seq = seq;
      g.advance_clock(op.value("t", SimTime{0}));
      g.apply(op);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return g;
}

json SocialGraph::snapshot() const {
  json prosumers = json::array();
  for (const auto& [id, p] : prosumers_) {
    prosumers.push_back(json{{"id", id.value},
                             {"profile", matchmaking::profile_to_wire(p.profile)},
                             {"role", to_string(p.role)},
                             {"active", p.active}});
  }
  json edges = json::array();
  for (const auto& [id, e] : edges_) {
    json j{{"id", id.value}, {"kind", to_string(e.kind)}, {"src", e.src.value}, {"dst", e.dst}, {"t", e.created_at}};
    if (e.tag_concept) j["concept"] = e.tag_concept->value;
    edges.push_back(std::move(j));
  }
  json contents = json::array();
  for (const auto& [id, c] : contents_) {
    json votes = json::object();
    for (const auto& [p, v] : c.votes) votes[std::to_string(p.value)] = v;
    json j{{"id", id.value}, {"author", c.author.value}, {"kind", to_string(c.kind)}, {"body", c.body}, {"votes", votes}};
    if (c.parent) j["parent"] = c.parent->value;
    contents.push_back(std::move(j));
  }
  json groups = json::array();
  for (const auto& [id, g] : groups_) {
    json members = json::array();
    for (ProsumerId m : g.members) members.push_back(m.value);
    groups.push_back(json{{"id", id.value}, {"name", g.name}, {"owner", g.owner.value}, {"members", members}});
  }
  return json{{"prosumers", prosumers}, {"edges", edges}, {"contents", contents}, {"groups", groups}};
}

std::vector<std::string> SocialGraph::check_invariants() const {
  std::vector<std::string> bad;
  std::size_t degree_sum = 0;
  for (const auto& [p, ns] : friends_) {
    degree_sum += ns.size();
    for (ProsumerId n : ns) {
      if (n == p) bad.push_back("self loop at " + id_str(p.value));
      auto back = friends_.find(n);
      if (back == friends_.end() || !back->second.count(p)) {
        bad.push_back("asymmetric friendship " + id_str(p.value) + "->" + id_str(n.value));
      }
    }
  }
  if (degree_sum != 2 * friend_edge_count()) bad.push_back("handshake identity violated");
  for (const auto& [id, e] : edges_) {
    if (!prosumers_.count(e.src)) bad.push_back("edge " + id_str(id.value) + " has dangling src");
    switch (e.kind) {
      case EdgeKind::friend_of:
        if (!prosumers_.count(ProsumerId{e.dst})) bad.push_back("edge " + id_str(id.value) + " has dangling dst");
        if (!(e.src.value < e.dst)) bad.push_back("friend edge " + id_str(id.value) + " not canonical");
        break;
      case EdgeKind::like:
      case EdgeKind::bookmark:
      case EdgeKind::tag:
        if (!contents_.count(ContentId{e.dst})) bad.push_back("edge " + id_str(id.value) + " has dangling content");
        break;
      case EdgeKind::membership:
        if (!groups_.count(GroupId{e.dst})) bad.push_back("edge " + id_str(id.value) + " has dangling group");
        break;
    }
  }
  for (const auto& [id, c] : contents_) {
    if ((c.kind == ContentKind::comment) != c.parent.has_value()) bad.push_back("content " + id_str(id.value) + " parent rule");
    if (c.parent && !contents_.count(*c.parent)) bad.push_back("content " + id_str(id.value) + " orphaned");
    if (!prosumers_.count(c.author)) bad.push_back("content " + id_str(id.value) + " has dangling author");
  }
  for (const auto& [id, g] : groups_) {
    if (!g.members.count(g.owner)) bad.push_back("group " + g.name + " owner not a member");
  }
  return bad;
}

}  // namespace mym::socialgraph
