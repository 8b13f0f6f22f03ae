#pragma once

// Canonical constraint sets: the comparable normal form of an ASM-CSM
// mapping, produced by lowering mapping documents and annotation defaults.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcc/asm.hpp"
#include "mcc/constraint_value.hpp"
#include "mcc/diagnostics.hpp"
#include "mcc/dsl.hpp"

namespace mcc {

struct ConstraintKey {
  std::string element;
  std::string member;  // empty for element-level constraints
  ConstraintKind kind = ConstraintKind::Pattern;

  /// `Element.member[kind]`
  std::string str() const;
  /// `Element` or `Element.member`
  std::string target() const;
  auto operator<=>(const ConstraintKey&) const = default;
  bool operator==(const ConstraintKey&) const = default;
};

using ElementPair = std::pair<std::string, std::string>;

struct CanonicalConstraintSet {
  std::map<ConstraintKey, ConstraintValue> entries;
  /// (a, b): a takes precedence over (binds tighter than) b.
  std::set<ElementPair> precedes;
  /// Where each entry came from. Not part of equality.
  std::map<ConstraintKey, SourceSpan> origins;

  const ConstraintValue* find(const std::string& element, const std::string& member, ConstraintKind kind) const;
  const ConstraintValue* find(const std::string& element, ConstraintKind kind) const {
    return find(element, "", kind);
  }
  bool empty() const { return entries.empty() && precedes.empty(); }

  bool operator==(const CanonicalConstraintSet& other) const {
    return entries == other.entries && precedes == other.precedes;
  }
};

/// Inline model annotations as a constraint set (the defaults every mapping
/// starts from).
CanonicalConstraintSet defaults_from_model(const Model& model);

/// Lowers a mapping document against a model. Constraints on unknown
/// elements or members are reported as warnings and ignored.
std::pair<CanonicalConstraintSet, Diagnostics> lower(const MappingDocument& doc, const Model& model);

/// Later sets override earlier entries key by key; precedes relations are
/// unioned and re-closed. A cycle in the result is an error.
std::pair<CanonicalConstraintSet, Diagnostics> merge(const CanonicalConstraintSet& defaults,
                                                     const std::vector<CanonicalConstraintSet>& overrides);

Diagnostics check_consistency(const CanonicalConstraintSet& set, const Model& model);

/// Idempotent normal form: drops entries that restate the model, expands
/// priorities into precedes pairs among variants of the same alternative
/// and closes precedes transitively.
CanonicalConstraintSet canonicalize(const CanonicalConstraintSet& set, const Model& model);

bool equivalent(const CanonicalConstraintSet& a, const CanonicalConstraintSet& b);

/// Human-readable list of keys that differ between two sets.
std::vector<std::string> describe_differences(const CanonicalConstraintSet& a, const CanonicalConstraintSet& b);

std::set<ElementPair> transitive_closure(const std::set<ElementPair>& pairs);
/// Elements along one cycle of the relation, or empty when acyclic.
std::vector<std::string> find_cycle(const std::set<ElementPair>& pairs);

/// Stable JSON: entries grouped by target then constraint keyword, both
/// sorted; precedes as a sorted list of pairs.
nlohmann::json to_json(const CanonicalConstraintSet& set);

// Effective member properties once constraints are applied over the model.
struct EffectiveMember {
  std::size_t min = 1;
  std::size_t max = 1;
  bool is_id = false;
  bool is_reference = false;
};

EffectiveMember effective_member(const CanonicalConstraintSet& set, const ElementDef& element,
                                 const MemberDef& member);

/// Member order of the concrete syntax: MemberOrder if present, declaration
/// order otherwise.
std::vector<const MemberDef*> effective_order(const CanonicalConstraintSet& set, const ElementDef& element);

}  // namespace mcc
