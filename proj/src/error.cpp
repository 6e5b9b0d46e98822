#include "mym/error.hpp"

namespace mym {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::DuplicateSiblingLabel: return "DuplicateSiblingLabel";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CycleOrOrphan: return "CycleOrOrphan";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::AlreadyIncarnated: return "AlreadyIncarnated";
    case ErrorCode::SelfFriendship: return "SelfFriendship";
    case ErrorCode::UnknownProsumer: return "UnknownProsumer";
    case ErrorCode::UnknownContent: return "UnknownContent";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::BodyTooLarge: return "BodyTooLarge";
    case ErrorCode::BadParent: return "BadParent";
    case ErrorCode::DuplicateGroupName: return "DuplicateGroupName";
    case ErrorCode::AlreadyMember: return "AlreadyMember";
    case ErrorCode::NotSuperProsumer: return "NotSuperProsumer";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::ProsumerBanned: return "ProsumerBanned";
    case ErrorCode::EntryTooLarge: return "EntryTooLarge";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::InvalidFrame: return "InvalidFrame";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::EmptyMessage: return "EmptyMessage";
    case ErrorCode::EmptyInterests: return "EmptyInterests";
    case ErrorCode::UnknownPeer: return "UnknownPeer";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace mym
