#pragma once

// Running a derived grammar: lexing, chart parsing into a packed forest,
// constraint-driven disambiguation and instance graph construction.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcc/asm.hpp"
#include "mcc/csm.hpp"
#include "mcc/diagnostics.hpp"

namespace mcc {

struct TokenInstance {
  std::string name;
  std::string text;
  SourceSpan span;
};

/// Maximal munch over token and skip patterns. Ties on length go to skip
/// patterns, then to the lower priority value, then to the earlier token.
/// Unmatched characters are reported and skipped one at a time.
std::pair<std::vector<TokenInstance>, Diagnostics> lex(const Grammar& grammar, std::string_view input,
                                                       std::string_view file_name = "");

inline constexpr std::size_t kTokenDerivation = static_cast<std::size_t>(-1);

struct Derivation {
  /// Index into Grammar::productions, or kTokenDerivation for a start
  /// symbol that is itself a token.
  std::size_t production = kTokenDerivation;
  /// Non-negative values are forest node indices; a negative value v stands
  /// for token index -v - 1.
  std::vector<std::int64_t> children;
};

struct ForestNode {
  std::string symbol;
  std::size_t begin = 0;  // token indices, half-open
  std::size_t end = 0;
  std::vector<Derivation> derivations;
};

struct ParseForest {
  std::vector<ForestNode> nodes;
  std::optional<std::size_t> root;
  std::vector<TokenInstance> tokens;

  static std::int64_t token_child(std::size_t token_index) { return -static_cast<std::int64_t>(token_index) - 1; }
  static std::size_t token_of(std::int64_t child) { return static_cast<std::size_t>(-child - 1); }
};

/// Earley recognition followed by forest extraction. `start` defaults to
/// the grammar's start symbol.
std::pair<ParseForest, Diagnostics> parse(const Grammar& grammar, std::vector<TokenInstance> tokens,
                                          std::optional<std::string> start = std::nullopt);

/// Number of distinct derivation trees in the forest, saturating at
/// UINT64_MAX. Cyclic derivations are not counted.
std::uint64_t count_trees(const ParseForest& forest);

/// Resolved derivation tree. Token leaves have production kTokenDerivation
/// and carry their token index.
struct ParseTree {
  std::size_t production = kTokenDerivation;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::optional<std::size_t> token;
  std::vector<ParseTree> children;

  bool operator==(const ParseTree&) const = default;
};

/// Every tree in the forest, up to `limit`.
std::vector<ParseTree> enumerate_trees(const ParseForest& forest, std::size_t limit = 10000);

/// Bracketed rendering with element names, e.g. `Add(Lit Mul(Lit Lit))`.
std::string render_tree(const ParseTree& tree, const Grammar& grammar, const ParseForest& forest);

/// Picks one tree: fewest precedence violations, then fewest associativity
/// violations, then the composition policy. Residual ambiguity and
/// non-associative nesting are errors.
std::pair<std::optional<ParseTree>, Diagnostics> disambiguate(const ParseForest& forest, const Grammar& grammar);

// Instance graphs -----------------------------------------------------------

struct TokenValue {
  std::string token;
  std::string text;
  bool operator==(const TokenValue&) const = default;
};

struct NodeRef {
  std::size_t id = 0;
  bool operator==(const NodeRef&) const = default;
};

struct ReferenceValue {
  std::string text;
  std::string target_element;
  std::optional<std::size_t> resolved;
  SourceSpan span;
  bool operator==(const ReferenceValue& o) const {
    return text == o.text && target_element == o.target_element && resolved == o.resolved;
  }
};

using InstanceValue = std::variant<NodeRef, TokenValue, ReferenceValue>;

struct MemberSlot {
  enum class Kind { single, optional, list };
  std::string name;
  Kind kind = Kind::single;
  std::vector<InstanceValue> values;
  bool operator==(const MemberSlot&) const = default;
};

struct Instance {
  std::size_t id = 0;
  std::string element;
  SourceSpan span;
  std::vector<MemberSlot> members;
  /// Identifier text when the element has an ID member.
  std::optional<std::string> id_text;

  const MemberSlot* slot(std::string_view name) const;
};

struct ReferenceEdge {
  std::size_t from = 0;
  std::string member;
  std::size_t to = 0;
  bool operator==(const ReferenceEdge&) const = default;
};

struct InstanceGraph {
  std::vector<Instance> nodes;  // pre-order; nodes[i].id == i
  std::vector<ReferenceEdge> edges;
  std::vector<std::size_t> roots;
};

InstanceGraph build_instances(const ParseTree& tree, const ParseForest& forest, const Grammar& grammar,
                              const Model& model);

/// Links reference slots to the unique instance of a compatible element
/// whose ID text matches, in one global namespace.
std::pair<InstanceGraph, Diagnostics> resolve_references(InstanceGraph graph, const Model& model);

nlohmann::ordered_json graph_to_json(const InstanceGraph& graph);

/// Token texts of the instance tree joined by single spaces.
std::string unparse_tokens(const ParseTree& tree, const ParseForest& forest);

}  // namespace mcc
