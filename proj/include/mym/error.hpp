#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mym {

enum class ErrorCode {
  // ontology
  UnknownParent,
  DuplicateSiblingLabel,
  UnknownConcept,
  InvalidLabel,
  ParseError,
  CycleOrOrphan,
  // matchmaking
  DomainError,
  InvalidParams,
  // socialgraph
  AlreadyIncarnated,
  SelfFriendship,
  UnknownProsumer,
  UnknownContent,
  UnknownGroup,
  DuplicateEdge,
  BodyTooLarge,
  BadParent,
  DuplicateGroupName,
  AlreadyMember,
  NotSuperProsumer,
  UnknownTarget,
  ProsumerBanned,
  // contentstore
  EntryTooLarge,
  DuplicateEntry,
  NotFound,
  // protocol
  DecodeError,
  InvalidFrame,
  PayloadTooLarge,
  EmptyMessage,
  EmptyInterests,
  UnknownPeer,
  // netsim
  UnknownNode,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code. Every domain failure in the
/// library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mym
