#include <doctest.h>

#include <random>
#include <sstream>

#include "mym/contentstore.hpp"
#include "mym/error.hpp"
#include "oracles.hpp"

using namespace mym::contentstore;

namespace {

StoreEntry entry(std::uint64_t id, std::size_t size, mym::SimTime t, std::optional<PeerId> dest = {},
                 std::uint64_t seq = 0) {
  StoreEntry e;
  e.entry_id = EntryId{id};
  e.payload = std::string(size, static_cast<char>('a' + id % 26));
  e.created_at = t;
  e.origin = 1;
  e.dest = dest;
  e.seq = seq;
  return e;
}

}  // namespace

TEST_CASE("put evicts least recently used") {
  ContentStore s({100, std::nullopt});
  CHECK(s.put(entry(1, 60, 0)).empty());
  const auto ev = s.put(entry(2, 50, 1));
  CHECK(ev == std::vector<EntryId>{EntryId{1}});
  CHECK_FALSE(s.contains(EntryId{1}));
  CHECK(s.contains(EntryId{2}));
  CHECK(s.used() == 50);
  CHECK(s.evictions() == 1);
}

TEST_CASE("entry larger than capacity") {
  ContentStore s({100, std::nullopt});
  try {
    s.put(entry(1, 101, 0));
    FAIL("expected EntryTooLarge");
  } catch (const mym::Error& e) {
    CHECK(e.code() == mym::ErrorCode::EntryTooLarge);
  }
  CHECK(s.put(entry(2, 100, 0)).empty());
  CHECK_THROWS_AS(s.put(entry(2, 1, 0)), mym::Error);
}

TEST_CASE("get returns bytes and refreshes recency") {
  ContentStore s({100, std::nullopt});
  auto a = entry(1, 40, 0);
  a.payload = std::string("\x00\xff\x10payload", 10) + std::string(30, 'z');
  const std::string bytes = a.payload;
  s.put(a);
  s.put(entry(2, 40, 1));
  CHECK(s.get(EntryId{1}, 5) == bytes);
  const auto ev = s.put(entry(3, 40, 6));
  CHECK(ev == std::vector<EntryId>{EntryId{2}});
  CHECK(s.contains(EntryId{1}));
  try {
    s.get(EntryId{2}, 7);
    FAIL("expected NotFound");
  } catch (const mym::Error& e) {
    CHECK(e.code() == mym::ErrorCode::NotFound);
  }
}

TEST_CASE("ties break on created_at then id") {
  ContentStore s({30, std::nullopt});
  s.put(entry(5, 10, 2));
  s.put(entry(3, 10, 2));
  s.put(entry(4, 10, 1));
  // All last_access equal to created_at: 4 (t=1) first, then 3 before 5.
  CHECK(s.put(entry(9, 30, 3)) == std::vector<EntryId>{EntryId{4}, EntryId{3}, EntryId{5}});
}

TEST_CASE("pending_for") {
  ContentStore s;
  SyncState sync;
  for (std::uint64_t i = 1; i <= 5; ++i) s.put(entry(10 + (6 - i), 4, static_cast<mym::SimTime>(i), PeerId{7}, i));
  s.put(entry(50, 4, 0, PeerId{8}, 1));
  s.put(entry(51, 4, 0));

  auto p = s.pending_for(7, sync);
  REQUIRE(p.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(p[i].seq == i + 1);

  sync.acknowledge(7, 3);
  p = s.pending_for(7, sync);
  REQUIRE(p.size() == 2);
  CHECK(p[0].seq == 4);
  CHECK(p[1].seq == 5);

  sync.acknowledge(7, 2);
  CHECK(sync.acknowledged(7) == 3);
  sync.acknowledge(7, 5);
  CHECK(s.pending_for(7, sync).empty());
  CHECK(s.pending_for(8, sync).size() == 1);
  CHECK(sync.acknowledged(99) == 0);
}

TEST_CASE("ttl expiry") {
  ContentStore s({1000, mym::SimTime{100}});
  s.put(entry(1, 10, 0));
  s.put(entry(2, 10, 50));
  CHECK(s.expire(99).empty());
  CHECK(s.expire(120) == std::vector<EntryId>{EntryId{1}});
  CHECK(s.used() == 10);
}

TEST_CASE("dump writes one line per entry") {
  ContentStore s;
  s.put(entry(2, 3, 0));
  s.put(entry(1, 3, 0));
  std::ostringstream out;
  s.dump(out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find("\"entry_id\":1") < text.find("\"entry_id\":2"));
}

TEST_CASE("randomized trace matches reference LRU") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cap = 50 + rng() % 500;
    ContentStore s({cap, std::nullopt});
    oracle::RefLru ref(cap);
    std::uint64_t next = 1;
    for (mym::SimTime t = 0; t < 400; ++t) {
      const auto now = t / 3;  // repeated timestamps exercise the tie rules
      if (rng() % 3 == 0 && next > 1) {
        const std::uint64_t id = 1 + rng() % (next - 1);
        const bool present = ref.get(id, now);
        REQUIRE(present == s.contains(EntryId{id}));
        if (present) s.get(EntryId{id}, now);
      } else {
        const std::size_t size = 1 + rng() % (cap / 2);
        const auto want = ref.put(next, size, now);
        const auto got = s.put(entry(next, size, now));
        std::vector<std::uint64_t> got_ids;
        for (auto e : got) got_ids.push_back(e.value);
        REQUIRE(got_ids == want);
        ++next;
      }
      REQUIRE(s.used() <= cap);
      REQUIRE(s.used() == ref.used());
    }
    std::set<std::uint64_t> ids;
    for (const auto& [id, e] : s.entries()) ids.insert(id.value);
    REQUIRE(ids == ref.ids());
  }
}
