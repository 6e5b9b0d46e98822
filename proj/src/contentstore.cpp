#include "mym/contentstore.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

#include "mym/error.hpp"

namespace mym::contentstore {

std::uint64_t SyncState::acknowledged(PeerId peer) const {
  auto it = acked_.find(peer);
  return it == acked_.end() ? 0 : it->second;
}

void SyncState::acknowledge(PeerId peer, std::uint64_t seq) {
  auto& v = acked_[peer];
  v = std::max(v, seq);
}

ContentStore::ContentStore(StoreParams params) : params_(params) {}

void ContentStore::remove(std::map<EntryId, StoreEntry>::iterator it) {
  recency_.erase(key(it->second));
  used_ -= it->second.size();
  entries_.erase(it);
}

std::vector<EntryId> ContentStore::put(StoreEntry entry) {
  if (entry.size() > params_.capacity) {
    throw Error(ErrorCode::EntryTooLarge, std::to_string(entry.size()) + " bytes exceeds capacity " +
                                              std::to_string(params_.capacity));
  }
  if (entries_.count(entry.entry_id)) {
    throw Error(ErrorCode::DuplicateEntry, "entry " + std::to_string(entry.entry_id.value));
  }
  std::vector<EntryId> evicted;
  while (used_ + entry.size() > params_.capacity) {
    const EntryId victim = std::get<2>(*recency_.begin());
    remove(entries_.find(victim));
    evicted.push_back(victim);
    ++evictions_;
  }
  entry.last_access = entry.created_at;
  used_ += entry.size();
  recency_.insert(key(entry));
  entries_.emplace(entry.entry_id, std::move(entry));
  return evicted;
}

const std::string& ContentStore::get(EntryId id, SimTime now) {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::NotFound, "entry " + std::to_string(id.value));
  recency_.erase(key(it->second));
  it->second.last_access = now;
  recency_.insert(key(it->second));
  return it->second.payload;
}

const StoreEntry* ContentStore::find(EntryId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

bool ContentStore::erase(EntryId id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) return false;
  remove(it);
  return true;
}

std::vector<StoreEntry> ContentStore::pending_for(PeerId peer, const SyncState& sync) const {
  const std::uint64_t acked = sync.acknowledged(peer);
  std::vector<StoreEntry> out;
  for (const auto& [id, e] : entries_) {
    if (e.dest == peer && e.seq > acked) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const StoreEntry& a, const StoreEntry& b) {
    return a.seq != b.seq ? a.seq < b.seq : a.entry_id < b.entry_id;
  });
  return out;
}

std::vector<EntryId> ContentStore::expire(SimTime now) {
  std::vector<EntryId> gone;
  if (!params_.ttl) return gone;
  for (auto it = entries_.begin(); it != entries_.end();) {
    auto next = std::next(it);
    if (now - it->second.created_at >= *params_.ttl) {
      gone.push_back(it->first);
      remove(it);
    }
    it = next;
  }
  return gone;
}

void ContentStore::dump(std::ostream& out) const {
  for (const auto& [id, e] : entries_) {
    nlohmann::json j{{"entry_id", id.value},   {"size", e.size()},     {"created_at", e.created_at},
                     {"last_access", e.last_access}, {"origin", e.origin}, {"seq", e.seq},
                     {"payload", e.payload}};
    j["dest"] = e.dest ? nlohmann::json(*e.dest) : nlohmann::json(nullptr);
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

}  // namespace mym::contentstore
