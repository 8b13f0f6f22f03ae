#pragma once

// Abstract syntax model: language elements, their members and the inline
// annotation defaults, read from the textual `.asm` model format.

#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/constraint_value.hpp"
#include "mcc/diagnostics.hpp"

namespace mcc {

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

enum class ElementKind { composite, alternative, token };

const char* to_string(ElementKind kind);

struct AnnotationConstraint {
  ConstraintKind kind = ConstraintKind::Pattern;
  ConstraintValue value;
  SourceSpan span;

  bool operator==(const AnnotationConstraint& other) const {
    return kind == other.kind && value == other.value;
  }
};

struct MemberDef {
  std::string name;
  /// Target element. Empty for the value members of a token element, which
  /// store matched text instead of an element instance.
  std::string target;
  std::size_t min = 1;
  std::size_t max = 1;
  bool is_id = false;
  bool is_reference = false;
  std::vector<AnnotationConstraint> default_constraints;
  SourceSpan span;

  bool is_value() const { return target.empty(); }
  bool repeats() const { return max > 1; }
  bool operator==(const MemberDef& other) const;
};

struct ElementDef {
  std::string name;
  ElementKind kind = ElementKind::composite;
  std::vector<MemberDef> members;
  std::vector<std::string> variants;
  std::vector<AnnotationConstraint> default_constraints;
  SourceSpan span;

  const MemberDef* find_member(std::string_view member) const;
  bool operator==(const ElementDef& other) const;
};

struct Model {
  std::string name;
  std::vector<ElementDef> elements;
  std::vector<std::string> skip_patterns;

  const ElementDef* find(std::string_view element) const;
  /// Declaration index, or nullopt.
  std::optional<std::size_t> index_of(std::string_view element) const;
  bool operator==(const Model& other) const;
};

/// Dotted name as written in mapping files: `Element` or `Element.member`.
struct ElementPath {
  std::vector<std::string> segments;

  std::string str() const;
  bool operator==(const ElementPath&) const = default;
  auto operator<=>(const ElementPath&) const = default;
};

struct PathTarget {
  enum class Kind { element, member, missing };
  Kind kind = Kind::missing;
  const ElementDef* element = nullptr;
  const MemberDef* member = nullptr;
  /// For missing targets, the longest prefix of the path that did resolve.
  std::vector<std::string> resolved_prefix;
};

/// Parses the model format. Throws ParseError on syntax errors and on
/// duplicate element or member names.
Model parse_model(std::string_view source, std::string_view file_name = "");

/// Invariant violations as error diagnostics; empty iff well-formed.
Diagnostics validate_model(const Model& model);

/// Throws std::invalid_argument for empty paths and paths deeper than
/// `Element.member`.
PathTarget resolve_path(const Model& model, const ElementPath& path);

/// Canonical text form; parse_model(render_model(m)) == m.
std::string render_model(const Model& model);

// Queries used across the pipeline.

/// `name` itself plus every element reachable from it through alternative
/// variants.
std::set<std::string> subtypes_of(const Model& model, std::string_view name);

/// The value member that stores a token's matched text: the single member,
/// or the one named by @Value. nullptr when the token has no members.
const MemberDef* value_member_of(const Model& model, const ElementDef& token);

/// The token element used to write identifiers of `element` (through its ID
/// member). For alternatives, every variant must agree. nullopt otherwise.
std::optional<std::string> id_token_of(const Model& model, std::string_view element);

std::string multiplicity_suffix(std::size_t min, std::size_t max);

/// Escapes `"` and `\` for double-quoted output.
std::string quote(std::string_view text);

}  // namespace mcc
