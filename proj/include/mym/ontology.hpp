#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mym::ontology {

/// Dense index into a Taxonomy, assigned in insertion order.
struct ConceptId {
  std::uint32_t value = 0;

  friend auto operator<=>(const ConceptId&, const ConceptId&) = default;
};

/// Rooted concept tree. Nodes are only ever appended, so ids stay stable and
/// every parent id is smaller than its children's ids.
class Taxonomy {
 public:
  explicit Taxonomy(std::string root_label);

  ConceptId root() const noexcept { return ConceptId{0}; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(ConceptId c) const noexcept { return c.value < nodes_.size(); }

  ConceptId add_concept(ConceptId parent, std::string label);

  const std::string& label(ConceptId c) const;
  std::optional<ConceptId> parent(ConceptId c) const;
  const std::vector<ConceptId>& children(ConceptId c) const;
  std::optional<ConceptId> find_child(ConceptId parent, std::string_view label) const;

  /// Root has depth 1.
  int depth(ConceptId c) const;
  ConceptId lca(ConceptId a, ConceptId b) const;
  /// Edge count of the tree path between a and b.
  int concept_distance(ConceptId a, ConceptId b) const;
  /// 2*depth(lca) / (depth(a)+depth(b)); 1 exactly when a == b.
  double concept_similarity(ConceptId a, ConceptId b) const;

  /// Slash-separated labels below the root, e.g. "Music/Jazz". The empty
  /// path names the root.
  std::string path(ConceptId c) const;
  ConceptId resolve(std::string_view path) const;
  std::optional<ConceptId> try_resolve(std::string_view path) const;

 private:
  struct Node {
    std::string label;
    std::optional<ConceptId> parent;
    int depth = 1;
    std::vector<ConceptId> children;
  };

  const Node& node(ConceptId c) const;

  std::vector<Node> nodes_;
};

/// Parses the line-oriented taxonomy document (`id<TAB>parent-or-dash<TAB>label`).
/// Blank lines and lines starting with '#' are ignored.
Taxonomy load_taxonomy(std::string_view text);
Taxonomy load_taxonomy_file(const std::string& path);

/// Inverse of load_taxonomy: ids are the dense ConceptId values.
std::string serialize_taxonomy(const Taxonomy& t);

}  // namespace mym::ontology

template <>
struct std::hash<mym::ontology::ConceptId> {
  std::size_t operator()(const mym::ontology::ConceptId& c) const noexcept {
    return std::hash<std::uint32_t>{}(c.value);
  }
};
