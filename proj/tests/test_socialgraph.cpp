#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mym/error.hpp"
#include "mym/socialgraph.hpp"

using namespace mym::socialgraph;
using mym::ErrorCode;

#define CHECK_ERROR(expr, errcode)           \
  do {                                       \
    try {                                    \
      (void)(expr);                          \
      FAIL("expected " #errcode);            \
    } catch (const mym::Error& e) {          \
      CHECK(e.code() == ErrorCode::errcode); \
    }                                        \
  } while (0)

namespace {

Profile person(PersonId id) { return fixtures::profile(id, {}); }

struct Crowd {
  SocialGraph g;
  std::vector<ProsumerId> p;
  explicit Crowd(int n, bool first_is_super = false) {
    for (int i = 0; i < n; ++i) {
      p.push_back(g.incarnate(person(static_cast<PersonId>(i + 1)),
                              (first_is_super && i == 0) ? Role::super : Role::basic));
    }
  }
};

int handshake_sum(const SocialGraph& g) {
  int s = 0;
  for (const auto& [id, pr] : g.prosumers()) s += g.degree(id);
  return s;
}

// Applies random operations; failures are expected and skipped.
void random_mutations(SocialGraph& g, std::mt19937_64& rng, int steps) {
  std::vector<ProsumerId> ps;
  for (const auto& [id, pr] : g.prosumers()) ps.push_back(id);
  auto pick = [&]() { return ps[rng() % ps.size()]; };
  auto any_content = [&]() -> ContentId {
    if (g.contents().empty()) return ContentId{999};
    auto it = g.contents().begin();
    std::advance(it, static_cast<long>(rng() % g.contents().size()));
    return it->first;
  };
  for (int i = 0; i < steps; ++i) {
    g.advance_clock(g.now() + 1);
    try {
      switch (rng() % 9) {
        case 0: g.befriend(pick(), pick()); break;
        case 1: g.post_content(pick(), ContentKind::post, "hello"); break;
        case 2: g.post_content(pick(), ContentKind::comment, "re", any_content()); break;
        case 3: g.like(pick(), any_content()); break;
        case 4: g.vote(pick(), any_content(), (rng() & 1) ? 1 : -1); break;
        case 5: g.bookmark(pick(), any_content()); break;
        case 6: g.tag(pick(), any_content(), mym::ontology::ConceptId{static_cast<std::uint32_t>(rng() % 4)}); break;
        case 7: g.form_group(pick(), "g" + std::to_string(rng() % 3)); break;
        case 8:
          if (rng() % 4 == 0) {
            g.moderate(ps[0], RemoveContent{any_content()});
          } else if (!g.groups().empty()) {
            g.join_group(pick(), g.groups().begin()->first);
          }
          break;
      }
    } catch (const mym::Error&) {
    }
  }
}

}  // namespace

TEST_CASE("incarnate") {
  SocialGraph g;
  const auto a = g.incarnate(person(1));
  CHECK(g.prosumers().size() == 1);
  CHECK(g.edges().empty());
  CHECK_ERROR(g.incarnate(person(1)), AlreadyIncarnated);
  g.incarnate(person(2));
  CHECK(g.prosumers().size() == 2);
  CHECK(g.edges().empty());
  CHECK(g.find_prosumer(1) == a);
  CHECK_FALSE(g.find_prosumer(3));
}

TEST_CASE("befriend") {
  Crowd c(3);
  auto [a, b, x] = std::tuple{c.p[0], c.p[1], c.p[2]};
  CHECK_ERROR(c.g.befriend(a, a), SelfFriendship);
  CHECK_ERROR(c.g.befriend(a, ProsumerId{77}), UnknownProsumer);
  c.g.befriend(b, a);
  CHECK_ERROR(c.g.befriend(a, b), DuplicateEdge);
  CHECK(c.g.mutual_friends(a, b).empty());
  CHECK(c.g.degree(a) == 1);
  CHECK(c.g.degree(b) == 1);
  CHECK(c.g.degree(x) == 0);
  const auto& e = c.g.edges().begin()->second;
  CHECK(e.kind == EdgeKind::friend_of);
  CHECK(e.src.value < e.dst);
}

TEST_CASE("mutual friends on a path") {
  Crowd c(3);
  c.g.befriend(c.p[0], c.p[2]);
  c.g.befriend(c.p[2], c.p[1]);
  CHECK(c.g.mutual_friends(c.p[0], c.p[1]) == std::set<ProsumerId>{c.p[2]});
  CHECK_ERROR(c.g.mutual_friends(c.p[0], ProsumerId{50}), UnknownProsumer);
}

TEST_CASE("likes, bookmarks, votes") {
  Crowd c(4);
  const auto post = c.g.post_content(c.p[0], ContentKind::post, "hi");
  c.g.like(c.p[1], post);
  CHECK(c.g.likes(post) == 1);
  CHECK_ERROR(c.g.like(c.p[1], post), DuplicateEdge);
  c.g.like(c.p[2], post);
  c.g.like(c.p[3], post);
  int enumerated = 0;
  for (const auto& [id, e] : c.g.edges()) enumerated += (e.kind == EdgeKind::like && e.dst == post.value);
  CHECK(c.g.likes(post) == 3);
  CHECK(enumerated == 3);
  CHECK_ERROR(c.g.like(c.p[1], ContentId{40}), UnknownContent);

  c.g.bookmark(c.p[1], post);
  CHECK(c.g.bookmarks(post) == 1);
  CHECK(c.g.likes(post) == 3);

  CHECK(c.g.vote(c.p[0], post, 1) == 1);
  CHECK(c.g.vote(c.p[0], post, -1) == -1);
  c.g.vote(c.p[1], post, 1);
  c.g.vote(c.p[2], post, 1);
  CHECK(c.g.tally(post) == 1);
  CHECK(c.g.content(post).votes.size() == 3);
  CHECK_ERROR(c.g.vote(c.p[0], ContentId{40}, 1), UnknownContent);
  CHECK_ERROR(c.g.vote(ProsumerId{40}, post, 1), UnknownProsumer);
  CHECK_THROWS_AS(c.g.vote(c.p[0], post, 2), mym::Error);
}

TEST_CASE("post_content") {
  Crowd c(1);
  const auto blog = c.g.post_content(c.p[0], ContentKind::blog, "entry");
  CHECK(c.g.contents().size() == 1);
  CHECK(c.g.likes(blog) == 0);
  CHECK(c.g.tally(blog) == 0);
  CHECK_ERROR(c.g.post_content(c.p[0], ContentKind::comment, "orphan"), BadParent);
  CHECK_ERROR(c.g.post_content(c.p[0], ContentKind::post, "x", blog), BadParent);
  CHECK_ERROR(c.g.post_content(c.p[0], ContentKind::comment, "x", ContentId{90}), BadParent);
  const std::string at_limit(c.g.params().body_limit, 'a');
  CHECK_NOTHROW(c.g.post_content(c.p[0], ContentKind::post, at_limit));
  CHECK_ERROR(c.g.post_content(c.p[0], ContentKind::post, at_limit + "a"), BodyTooLarge);
  CHECK_ERROR(c.g.post_content(ProsumerId{9}, ContentKind::post, "x"), UnknownProsumer);
}

TEST_CASE("groups") {
  Crowd c(2);
  const auto g = c.g.form_group(c.p[0], "jazz");
  CHECK(c.g.group(g).members == std::set<ProsumerId>{c.p[0]});
  CHECK(c.g.group(g).owner == c.p[0]);
  c.g.join_group(c.p[1], g);
  CHECK_ERROR(c.g.join_group(c.p[1], g), AlreadyMember);
  CHECK_ERROR(c.g.form_group(c.p[1], "jazz"), DuplicateGroupName);
  CHECK_ERROR(c.g.join_group(ProsumerId{8}, g), UnknownProsumer);
  CHECK(c.g.find_group("jazz") == g);
}

TEST_CASE("moderation") {
  Crowd c(4, true);
  const auto admin = c.p[0];
  const auto post = c.g.post_content(c.p[1], ContentKind::post, "spam");
  c.g.like(c.p[2], post);
  c.g.like(c.p[3], post);
  const auto comment = c.g.post_content(c.p[2], ContentKind::comment, "+1", post);
  c.g.like(c.p[3], comment);
  c.g.bookmark(c.p[3], post);
  c.g.tag(c.p[3], post, mym::ontology::ConceptId{1});
  const auto keep = c.g.post_content(c.p[2], ContentKind::post, "keep");
  c.g.like(c.p[1], keep);

  CHECK_ERROR(c.g.moderate(c.p[1], RemoveContent{post}), NotSuperProsumer);
  CHECK_ERROR(c.g.moderate(admin, RemoveContent{ContentId{99}}), UnknownTarget);
  CHECK_ERROR(c.g.moderate(admin, Ban{ProsumerId{99}}), UnknownTarget);

  c.g.moderate(admin, RemoveContent{post});
  CHECK_FALSE(c.g.has_content(post));
  CHECK_FALSE(c.g.has_content(comment));
  CHECK(c.g.has_content(keep));
  // Re-enumerate every remaining edge: only the like on `keep` survives.
  int content_edges = 0;
  for (const auto& [id, e] : c.g.edges()) {
    if (e.kind == EdgeKind::like || e.kind == EdgeKind::bookmark || e.kind == EdgeKind::tag) {
      ++content_edges;
      CHECK(c.g.has_content(ContentId{e.dst}));
    }
  }
  CHECK(content_edges == 1);
  CHECK(c.g.check_invariants().empty());

  c.g.moderate(admin, Ban{c.p[1]});
  CHECK_FALSE(c.g.prosumer(c.p[1]).active);
  CHECK_ERROR(c.g.post_content(c.p[1], ContentKind::post, "again"), ProsumerBanned);
  CHECK_ERROR(c.g.befriend(c.p[1], c.p[2]), ProsumerBanned);
  CHECK(c.g.prosumers().size() == 4);
}

TEST_CASE("no friend edge with fewer than two prosumers") {
  SocialGraph g;
  CHECK_ERROR(g.befriend(ProsumerId{1}, ProsumerId{1}), SelfFriendship);
  const auto a = g.incarnate(person(1));
  CHECK_ERROR(g.befriend(a, a), SelfFriendship);
  CHECK_ERROR(g.befriend(a, ProsumerId{2}), UnknownProsumer);
  CHECK(g.friend_edge_count() == 0);
}

TEST_CASE("mutual friends match brute-force intersection") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    Crowd c(n);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng() % 2) {
          c.g.befriend(c.p[i], c.p[j]);
          adj[i][j] = adj[j][i] = true;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      int deg = 0;
      for (int k = 0; k < n; ++k) deg += adj[i][k];
      REQUIRE(c.g.degree(c.p[i]) == deg);
      for (int j = 0; j < n; ++j) {
        std::set<ProsumerId> want;
        for (int k = 0; k < n; ++k) {
          if (adj[i][k] && adj[j][k]) want.insert(c.p[k]);
        }
        REQUIRE(c.g.mutual_friends(c.p[i], c.p[j]) == want);
        REQUIRE(c.g.neighbors(c.p[i]).count(c.p[j]) == c.g.neighbors(c.p[j]).count(c.p[i]));
      }
    }
  }
}

TEST_CASE("invariants hold after random mutation sequences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Crowd c(2 + static_cast<int>(rng() % 6), true);
    random_mutations(c.g, rng, 80);
    REQUIRE(handshake_sum(c.g) == 2 * static_cast<int>(c.g.friend_edge_count()));
    const auto problems = c.g.check_invariants();
    REQUIRE(problems.empty());
    for (const auto& [id, e] : c.g.edges()) {
      REQUIRE(c.g.prosumers().count(e.src));
      switch (e.kind) {
        case EdgeKind::friend_of: REQUIRE(c.g.prosumers().count(ProsumerId{e.dst})); break;
        case EdgeKind::membership: REQUIRE(c.g.groups().count(GroupId{e.dst})); break;
        default: REQUIRE(c.g.has_content(ContentId{e.dst})); break;
      }
    }
  }
}

TEST_CASE("replaying the op log reproduces the graph") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    Crowd c(2 + static_cast<int>(rng() % 6), true);
    random_mutations(c.g, rng, 100);
    if (trial % 3 == 0) c.g.moderate(c.p[0], Ban{c.p.back()});
    std::stringstream log;
    c.g.write_op_log(log);
    const auto again = SocialGraph::replay(log);
    REQUIRE(again.snapshot() == c.g.snapshot());
    REQUIRE(again.op_log().size() == c.g.op_log().size());
  }
}

TEST_CASE("replay rejects broken logs") {
  Crowd c(2);
  c.g.befriend(c.p[0], c.p[1]);
  std::stringstream log;
  c.g.write_op_log(log);
  std::string text = log.str();

  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(SocialGraph::replay(garbage), mym::Error);

  // Swap the two first lines so sequence numbers go backwards.
  std::istringstream in(text);
  std::string l1, l2, rest, line;
  std::getline(in, l1);
  std::getline(in, l2);
  while (std::getline(in, line)) rest += line + "\n";
  std::istringstream swapped(l2 + "\n" + l1 + "\n" + rest);
  CHECK_THROWS_AS(SocialGraph::replay(swapped), mym::Error);
}
