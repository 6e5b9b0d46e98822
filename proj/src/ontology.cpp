#include "mym/ontology.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mym/error.hpp"

namespace mym::ontology {

namespace {

void check_label(const std::string& label) {
  if (label.empty() || label.find_first_of("/\t\r\n") != std::string::npos) {
    throw Error(ErrorCode::InvalidLabel, "label '" + label + "' is empty or contains '/', tab or newline");
  }
}

}  // namespace

Taxonomy::Taxonomy(std::string root_label) {
  check_label(root_label);
  nodes_.push_back(Node{std::move(root_label), std::nullopt, 1, {}});
}

const Taxonomy::Node& Taxonomy::node(ConceptId c) const {
  if (!contains(c)) {
    throw Error(ErrorCode::UnknownConcept, "concept id " + std::to_string(c.value));
  }
  return nodes_[c.value];
}

ConceptId Taxonomy::add_concept(ConceptId parent, std::string label) {
  if (!contains(parent)) {
    throw Error(ErrorCode::UnknownParent, "parent id " + std::to_string(parent.value));
  }
  check_label(label);
  if (find_child(parent, label)) {
    throw Error(ErrorCode::DuplicateSiblingLabel, "'" + label + "' under " + path(parent));
  }
  const ConceptId id{static_cast<std::uint32_t>(nodes_.size())};
  const int d = nodes_[parent.value].depth + 1;
  nodes_.push_back(Node{std::move(label), parent, d, {}});
  nodes_[parent.value].children.push_back(id);
  return id;
}

const std::string& Taxonomy::label(ConceptId c) const { return node(c).label; }

std::optional<ConceptId> Taxonomy::parent(ConceptId c) const { return node(c).parent; }

const std::vector<ConceptId>& Taxonomy::children(ConceptId c) const { return node(c).children; }

std::optional<ConceptId> Taxonomy::find_child(ConceptId parent, std::string_view label) const {
  for (ConceptId child : node(parent).children) {
    if (nodes_[child.value].label == label) return child;
  }
  return std::nullopt;
}

int Taxonomy::depth(ConceptId c) const { return node(c).depth; }

ConceptId Taxonomy::lca(ConceptId a, ConceptId b) const {
  const Node* na = &node(a);
  const Node* nb = &node(b);
  while (na->depth > nb->depth) {
    a = *na->parent;
    na = &nodes_[a.value];
  }
  while (nb->depth > na->depth) {
    b = *nb->parent;
    nb = &nodes_[b.value];
  }
  while (a != b) {
    a = *na->parent;
    b = *nb->parent;
    na = &nodes_[a.value];
    nb = &nodes_[b.value];
  }
  return a;
}

int Taxonomy::concept_distance(ConceptId a, ConceptId b) const {
  const ConceptId common = lca(a, b);
  return depth(a) + depth(b) - 2 * depth(common);
}

double Taxonomy::concept_similarity(ConceptId a, ConceptId b) const {
  const ConceptId common = lca(a, b);
  return 2.0 * depth(common) / static_cast<double>(depth(a) + depth(b));
}

std::string Taxonomy::path(ConceptId c) const {
  std::vector<const std::string*> parts;
  for (const Node* n = &node(c); n->parent; n = &nodes_[n->parent->value]) {
    parts.push_back(&n->label);
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += '/';
    out += **it;
  }
  return out;
}

std::optional<ConceptId> Taxonomy::try_resolve(std::string_view path) const {
  ConceptId cur = root();
  while (!path.empty()) {
    const auto slash = path.find('/');
    const std::string_view part = path.substr(0, slash);
    auto next = find_child(cur, part);
    if (!next) return std::nullopt;
    cur = *next;
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
    if (path.empty()) return std::nullopt;  // trailing slash
  }
  return cur;
}

ConceptId Taxonomy::resolve(std::string_view path) const {
  if (auto c = try_resolve(path)) return *c;
  throw Error(ErrorCode::UnknownConcept, "no concept at path '" + std::string(path) + "'");
}

namespace {

struct RawLine {
  std::size_t line_no;
  std::uint64_t id;
  std::optional<std::uint64_t> parent;
  std::string label;
};

std::uint64_t parse_id(std::string_view field, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad id '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

Taxonomy load_taxonomy(std::string_view text) {
  std::vector<RawLine> lines;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    RawLine raw{line_no, parse_id(line.substr(0, t1), line_no), std::nullopt,
                std::string(line.substr(t2 + 1))};
    const std::string_view parent = line.substr(t1 + 1, t2 - t1 - 1);
    if (parent != "-") raw.parent = parse_id(parent, line_no);
    if (raw.label.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty label");
    }
    if (lines.empty() && raw.parent) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": first node must be the root (parent '-')");
    }
    if (!lines.empty() && !raw.parent) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": second root");
    }
    lines.push_back(std::move(raw));
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "line 1: document has no root");

  std::map<std::uint64_t, std::size_t> by_file_id;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!by_file_id.emplace(lines[i].id, i).second) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lines[i].line_no) + ": duplicate id " + std::to_string(lines[i].id));
    }
  }

  Taxonomy t(lines.front().label);
  std::map<std::uint64_t, ConceptId> assigned{{lines.front().id, t.root()}};
  std::vector<const RawLine*> pending;
  for (std::size_t i = 1; i < lines.size(); ++i) pending.push_back(&lines[i]);

  // Children may precede their parent in the file; attach in passes until no
  // progress. Anything left is unreachable from the root.
  while (!pending.empty()) {
    std::vector<const RawLine*> next;
    for (const RawLine* raw : pending) {
      auto parent = assigned.find(*raw->parent);
      if (parent == assigned.end()) {
        next.push_back(raw);
        continue;
      }
      try {
        assigned.emplace(raw->id, t.add_concept(parent->second, raw->label));
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(raw->line_no) + ": " + e.what());
      }
    }
    if (next.size() == pending.size()) {
      throw Error(ErrorCode::CycleOrOrphan, "line " + std::to_string(next.front()->line_no) + ": node " +
                                                std::to_string(next.front()->id) +
                                                " has a missing parent or lies on a cycle");
    }
    pending = std::move(next);
  }
  return t;
}

Taxonomy load_taxonomy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open taxonomy file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_taxonomy(ss.str());
}

std::string serialize_taxonomy(const Taxonomy& t) {
  std::string out;
  for (std::uint32_t i = 0; i < t.size(); ++i) {
    const ConceptId c{i};
    out += std::to_string(i);
    out += '\t';
    if (auto p = t.parent(c)) {
      out += std::to_string(p->value);
    } else {
      out += '-';
    }
    out += '\t';
    out += t.label(c);
    out += '\n';
  }
  return out;
}

}  // namespace mym::ontology
