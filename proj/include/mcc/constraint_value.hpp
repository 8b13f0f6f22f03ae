#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcc {

/// Closed vocabulary of constraints. `Precedes` and `MemberOrder` are only
/// produced by lowering mapping documents; they have no annotation spelling.
enum class ConstraintKind {
  Pattern,
  Value,
  Prefix,
  Suffix,
  Separator,
  Optional,
  Minimum,
  Maximum,
  Associativity,
  Composition,
  Priority,
  ID,
  Reference,
  Precedes,
  MemberOrder,
};

/// Lowercase spelling used by mapping files (`[prefix]`) and JSON output.
std::string_view keyword_of(ConstraintKind kind);
/// Capitalized spelling used by model annotations (`@Prefix`).
std::string_view annotation_name_of(ConstraintKind kind);

std::optional<ConstraintKind> kind_from_keyword(std::string_view keyword);
std::optional<ConstraintKind> kind_from_annotation(std::string_view name);

// Strong types so that a pattern and a keyword never compare equal.
struct PatternText {
  std::string text;
  bool operator==(const PatternText&) const = default;
  auto operator<=>(const PatternText&) const = default;
};
struct Literals {
  std::vector<std::string> values;
  bool operator==(const Literals&) const = default;
  auto operator<=>(const Literals&) const = default;
};
struct Keyword {
  std::string word;
  bool operator==(const Keyword&) const = default;
  auto operator<=>(const Keyword&) const = default;
};
struct NameList {
  std::vector<std::string> names;
  bool operator==(const NameList&) const = default;
  auto operator<=>(const NameList&) const = default;
};
struct Unbounded {
  bool operator==(const Unbounded&) const = default;
  auto operator<=>(const Unbounded&) const = default;
};

using ConstraintValue = std::variant<PatternText, Literals, std::int64_t, bool, Keyword, NameList, Unbounded>;

/// Whether `value` has the shape `kind` requires. Returns an explanation
/// when it does not.
std::optional<std::string> shape_error(ConstraintKind kind, const ConstraintValue& value);

std::string to_display(const ConstraintValue& value);
nlohmann::json to_json(const ConstraintValue& value);

}  // namespace mcc
