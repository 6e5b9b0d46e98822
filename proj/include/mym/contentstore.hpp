#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mym/types.hpp"

namespace mym::contentstore {

using EntryId = StrongId<struct EntryTag>;
using PeerId = std::uint64_t;

/// An item held on the device. Outbound items carry the peer they are queued
/// for and their position in that peer's delivery sequence.
struct StoreEntry {
  EntryId entry_id;
  std::string payload;
  SimTime created_at = 0;
  SimTime last_access = 0;
  std::uint64_t origin = 0;
  std::optional<PeerId> dest;
  std::uint64_t seq = 0;

  std::size_t size() const noexcept { return payload.size(); }
};

/// Highest contiguous sequence acknowledged by each peer.
class SyncState {
 public:
  std::uint64_t acknowledged(PeerId peer) const;
  /// Cumulative; a smaller value than the current one is ignored.
  void acknowledge(PeerId peer, std::uint64_t seq);
  const std::map<PeerId, std::uint64_t>& peers() const noexcept { return acked_; }

 private:
  std::map<PeerId, std::uint64_t> acked_;
};

struct StoreParams {
  std::size_t capacity = 1024 * 1024;
  std::optional<SimTime> ttl;  // none: entries live until evicted
};

/// Byte-bounded store evicting the least recently accessed entry first
/// (ties: older created_at, then smaller entry_id).
class ContentStore {
 public:
  explicit ContentStore(StoreParams params = {});

  /// Inserts `entry` with last_access = created_at and returns the ids evicted
  /// to make room, in eviction order.
  std::vector<EntryId> put(StoreEntry entry);
  const std::string& get(EntryId id, SimTime now);
  bool contains(EntryId id) const { return entries_.count(id) != 0; }
  const StoreEntry* find(EntryId id) const;
  bool erase(EntryId id);

  /// Outbound entries for `peer` above its acknowledged sequence, ascending.
  std::vector<StoreEntry> pending_for(PeerId peer, const SyncState& sync) const;

  /// Drops entries older than the TTL; returns their ids.
  std::vector<EntryId> expire(SimTime now);

  std::size_t used() const noexcept { return used_; }
  std::size_t capacity() const noexcept { return params_.capacity; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t evictions() const noexcept { return evictions_; }
  const std::map<EntryId, StoreEntry>& entries() const noexcept { return entries_; }

  /// One JSON object per entry, in entry id order.
  void dump(std::ostream& out) const;

 private:
  using RecencyKey = std::tuple<SimTime, SimTime, EntryId>;
  static RecencyKey key(const StoreEntry& e) { return {e.last_access, e.created_at, e.entry_id}; }

  void remove(std::map<EntryId, StoreEntry>::iterator it);

  StoreParams params_;
  std::map<EntryId, StoreEntry> entries_;
  std::set<RecencyKey> recency_;
  std::size_t used_ = 0;
  std::uint64_t evictions_ = 0;
};

}  // namespace mym::contentstore
