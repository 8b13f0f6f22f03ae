#pragma once

// Concrete syntax model: token specifications and context-free productions
// derived from a model and its merged constraint set.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcc/asm.hpp"
#include "mcc/constraints.hpp"
#include "mcc/diagnostics.hpp"

namespace mcc {

inline constexpr std::int64_t kLiteralTokenPriority = 0;
inline constexpr std::int64_t kPatternTokenPriority = 10;

struct TokenSpec {
  /// Token element name, or the quoted text for literal delimiters.
  std::string name;
  /// Pattern text; for literals, the literal text itself.
  std::string pattern;
  /// Lower values win ties between matches of equal length.
  std::int64_t priority = kPatternTokenPriority;
  bool is_literal = false;

  bool operator==(const TokenSpec&) const = default;
};

/// What a right-hand-side symbol contributes to the instance being built.
struct SymbolRole {
  enum class Kind { Delimiter, Member, Inner };
  Kind kind = Kind::Delimiter;
  std::string member;  // Member roles only

  bool operator==(const SymbolRole&) const = default;
};

struct Provenance {
  enum class Kind { Composite, Alternative, MemberWrapper, List, Helper };
  Kind kind = Kind::Composite;
  std::string element;
  std::string member;   // MemberWrapper, List
  std::string variant;  // Alternative

  bool operator==(const Provenance&) const = default;
};

const char* to_string(Provenance::Kind kind);

struct Production {
  std::string lhs;
  std::vector<std::string> rhs;
  Provenance provenance;
  std::vector<SymbolRole> roles;  // parallel to rhs

  bool operator==(const Production&) const = default;
};

/// Effective shape of a member in the concrete syntax.
struct GrammarMember {
  std::string target;  // empty for token value members
  std::size_t min = 1;
  std::size_t max = 1;
  bool is_id = false;
  bool is_reference = false;

  bool operator==(const GrammarMember&) const = default;
};

struct Grammar {
  std::string start;
  std::vector<TokenSpec> tokens;
  std::vector<std::string> skip_patterns;
  std::vector<Production> productions;

  // Disambiguation metadata.
  std::set<ElementPair> precedes;
  std::map<std::string, std::string> associativity;
  std::map<std::string, std::string> composition;
  std::map<std::string, std::int64_t> priority;

  /// Keyed by (element, member).
  std::map<std::pair<std::string, std::string>, GrammarMember> members;

  bool is_terminal(std::string_view symbol) const;
  bool is_nonterminal(std::string_view symbol) const;
  const TokenSpec* token(std::string_view name) const;
  const GrammarMember* member(const std::string& element, const std::string& member) const;
  bool binds_tighter(const std::string& a, const std::string& b) const { return precedes.count({a, b}) > 0; }
};

/// Builds the grammar. `start` defaults to the first declared element.
std::pair<Grammar, Diagnostics> derive_grammar(const Model& model, const CanonicalConstraintSet& set,
                                               std::optional<std::string> start = std::nullopt);

enum class GrammarFormat { ebnf, json };

/// Throws std::invalid_argument for unknown format names.
GrammarFormat grammar_format_from_string(std::string_view name);

std::string export_grammar(const Grammar& grammar, GrammarFormat format);
std::string export_ebnf(const Grammar& grammar);
nlohmann::ordered_json grammar_to_json(const Grammar& grammar);

/// Symbols appearing on right-hand sides that are neither tokens nor
/// nonterminals. Empty for a well-formed grammar.
std::vector<std::string> undefined_symbols(const Grammar& grammar);

}  // namespace mcc
