#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mym/matchmaking.hpp"
#include "mym/types.hpp"

namespace mym::socialgraph {

using matchmaking::PersonId;
using matchmaking::Profile;
using ontology::ConceptId;

using ProsumerId = StrongId<struct ProsumerTag>;
using ContentId = StrongId<struct ContentTag>;
using GroupId = StrongId<struct GroupTag>;
using EdgeId = StrongId<struct EdgeTag>;

enum class Role { basic, super };
enum class EdgeKind { friend_of, like, membership, tag, bookmark };
enum class ContentKind { post, blog, comment };

const char* to_string(Role r);
const char* to_string(EdgeKind k);
const char* to_string(ContentKind k);

struct Prosumer {
  ProsumerId id;
  Profile profile;
  Role role = Role::basic;
  bool active = true;  // false once banned; the record stays for replay
};

/// `dst` holds a ProsumerId, ContentId or GroupId value depending on `kind`.
/// Friend edges are stored with src < dst.
struct SocialEdge {
  EdgeKind kind = EdgeKind::friend_of;
  ProsumerId src;
  std::uint64_t dst = 0;
  std::optional<ConceptId> tag_concept;
  SimTime created_at = 0;
};

struct ContentNode {
  ContentId id;
  ProsumerId author;
  ContentKind kind = ContentKind::post;
  std::string body;
  std::optional<ContentId> parent;
  std::map<ProsumerId, int> votes;
};

struct Group {
  GroupId id;
  std::string name;
  ProsumerId owner;
  std::set<ProsumerId> members;
};

struct RemoveContent {
  ContentId content;
};
struct Ban {
  ProsumerId prosumer;
};
using ModerationAction = std::variant<RemoveContent, Ban>;

struct GraphParams {
  std::size_t body_limit = 16 * 1024;
};

/// One successful mutation, in the order it was applied.
struct OpRecord {
  std::uint64_t seq = 0;
  SimTime time = 0;
  nlohmann::json op;  // {"op": name, ...arguments, "result": id}
};

class SocialGraph {
 public:
  explicit SocialGraph(GraphParams params = {});

  /// Stamps subsequent edges and log records. Time never goes backwards.
  void advance_clock(SimTime now);
  SimTime now() const noexcept { return now_; }
  const GraphParams& params() const noexcept { return params_; }

  ProsumerId incarnate(const Profile& profile, Role role = Role::basic);
  EdgeId befriend(ProsumerId a, ProsumerId b);
  EdgeId like(ProsumerId p, ContentId c);
  EdgeId bookmark(ProsumerId p, ContentId c);
  EdgeId tag(ProsumerId p, ContentId c, ConceptId concept_id);
  /// Sets p's vote (+1 or -1) on c, replacing any earlier one. Returns the tally.
  int vote(ProsumerId p, ContentId c, int v);
  ContentId post_content(ProsumerId author, ContentKind kind, std::string body,
                         std::optional<ContentId> parent = std::nullopt);
  GroupId form_group(ProsumerId owner, std::string name);
  EdgeId join_group(ProsumerId p, GroupId g);
  void moderate(ProsumerId actor, const ModerationAction& action);

  std::set<ProsumerId> neighbors(ProsumerId p) const;
  std::set<ProsumerId> mutual_friends(ProsumerId a, ProsumerId b) const;
  int degree(ProsumerId p) const;
  int likes(ContentId c) const;
  int bookmarks(ContentId c) const;
  int tally(ContentId c) const;

  std::optional<ProsumerId> find_prosumer(PersonId person) const;
  std::optional<GroupId> find_group(const std::string& name) const;
  const Prosumer& prosumer(ProsumerId p) const;
  const ContentNode& content(ContentId c) const;
  const Group& group(GroupId g) const;
  bool has_content(ContentId c) const { return contents_.count(c) != 0; }

  const std::map<ProsumerId, Prosumer>& prosumers() const noexcept { return prosumers_; }
  const std::map<EdgeId, SocialEdge>& edges() const noexcept { return edges_; }
  const std::map<ContentId, ContentNode>& contents() const noexcept { return contents_; }
  const std::map<GroupId, Group>& groups() const noexcept { return groups_; }
  std::size_t friend_edge_count() const;

  const std::vector<OpRecord>& op_log() const noexcept { return log_; }
  void write_op_log(std::ostream& out) const;

  /// Rebuilds a graph from JSON-lines produced by write_op_log. Sequence
  /// numbers must increase strictly and recorded result ids must reproduce.
  static SocialGraph replay(std::istream& in, GraphParams params = {});

  /// Canonical JSON of the whole graph state; equal snapshots mean equal graphs.
  nlohmann::json snapshot() const;

  /// Empty when the graph is consistent: friend symmetry, handshake identity,
  /// no dangling endpoints, owner membership.
  std::vector<std::string> check_invariants() const;

 private:
  using EdgeKey = std::tuple<EdgeKind, std::uint64_t, std::uint64_t, std::uint32_t>;

  Prosumer& active_prosumer(ProsumerId p);
  ContentNode& existing_content(ContentId c);
  EdgeId add_edge(EdgeKind kind, ProsumerId src, std::uint64_t dst, std::optional<ConceptId> concept_id);
  EdgeId content_edge(EdgeKind kind, ProsumerId p, ContentId c, std::optional<ConceptId> concept_id);
  void remove_content_tree(ContentId c);
  void record(nlohmann::json op);
  void apply(const nlohmann::json& op);

  GraphParams params_;
  SimTime now_ = 0;
  std::uint64_t next_prosumer_ = 1;
  std::uint64_t next_content_ = 1;
  std::uint64_t next_group_ = 1;
  std::uint64_t next_edge_ = 1;

  std::map<ProsumerId, Prosumer> prosumers_;
  std::map<PersonId, ProsumerId> by_person_;
  std::map<ContentId, ContentNode> contents_;
  std::map<ContentId, std::set<ContentId>> replies_;
  std::map<GroupId, Group> groups_;
  std::map<std::string, GroupId> group_names_;
  std::map<EdgeId, SocialEdge> edges_;
  std::map<EdgeKey, EdgeId> edge_index_;
  std::map<ProsumerId, std::set<ProsumerId>> friends_;
  std::vector<OpRecord> log_;
};

}  // namespace mym::socialgraph
