#include "mcc/constraint_value.hpp"

#include <array>
#include <utility>

namespace mcc {
namespace {

struct KindNames {
  ConstraintKind kind;
  std::string_view keyword;
  std::string_view annotation;
};

constexpr std::array<KindNames, 15> kKindNames{{
    {ConstraintKind::Pattern, "pattern", "Pattern"},
    {ConstraintKind::Value, "value", "Value"},
    {ConstraintKind::Prefix, "prefix", "Prefix"},
    {ConstraintKind::Suffix, "suffix", "Suffix"},
    {ConstraintKind::Separator, "separator", "Separator"},
    {ConstraintKind::Optional, "optional", "Optional"},
    {ConstraintKind::Minimum, "minimum", "Minimum"},
    {ConstraintKind::Maximum, "maximum", "Maximum"},
    {ConstraintKind::Associativity, "associativity", "Associativity"},
    {ConstraintKind::Composition, "composition", "Composition"},
    {ConstraintKind::Priority, "priority", "Priority"},
    {ConstraintKind::ID, "id", "ID"},
    {ConstraintKind::Reference, "reference", "Reference"},
    {ConstraintKind::Precedes, "precedes", ""},
    {ConstraintKind::MemberOrder, "memberorder", ""},
}};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view keyword_of(ConstraintKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.keyword;
  return "";
}

std::string_view annotation_name_of(ConstraintKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.annotation;
  return "";
}

std::optional<ConstraintKind> kind_from_keyword(std::string_view keyword) {
  // memberorder is internal and not accepted from mapping files.
  for (const auto& k : kKindNames)
    if (k.keyword == keyword && k.kind != ConstraintKind::MemberOrder) return k.kind;
  return std::nullopt;
}

std::optional<ConstraintKind> kind_from_annotation(std::string_view name) {
  for (const auto& k : kKindNames)
    if (!k.annotation.empty() && k.annotation == name) return k.kind;
  return std::nullopt;
}

std::optional<std::string> shape_error(ConstraintKind kind, const ConstraintValue& value) {
  switch (kind) {
    case ConstraintKind::Pattern:
      if (!std::holds_alternative<PatternText>(value)) return "expects a pattern string";
      return std::nullopt;
    case ConstraintKind::Value:
      if (!std::holds_alternative<Keyword>(value)) return "expects a member name";
      return std::nullopt;
    case ConstraintKind::Prefix:
    case ConstraintKind::Suffix:
    case ConstraintKind::Separator: {
      const auto* lits = std::get_if<Literals>(&value);
      if (lits == nullptr || lits->values.empty()) return "expects one or more literal strings";
      for (const auto& v : lits->values)
        if (v.empty()) return "delimiters may not be empty";
      return std::nullopt;
    }
    case ConstraintKind::Optional:
    case ConstraintKind::ID:
    case ConstraintKind::Reference:
      if (!std::holds_alternative<bool>(value)) return "expects true or false";
      return std::nullopt;
    case ConstraintKind::Minimum:
    case ConstraintKind::Priority: {
      const auto* n = std::get_if<std::int64_t>(&value);
      if (n == nullptr || *n < 0) return "expects a non-negative integer";
      return std::nullopt;
    }
    case ConstraintKind::Maximum: {
      if (std::holds_alternative<Unbounded>(value)) return std::nullopt;
      const auto* n = std::get_if<std::int64_t>(&value);
      if (n == nullptr || *n < 1) return "expects a positive integer or *";
      return std::nullopt;
    }
    case ConstraintKind::Associativity: {
      const auto* k = std::get_if<Keyword>(&value);
      if (k == nullptr || (k->word != "left" && k->word != "right" && k->word != "non"))
        return "expects one of left, right, non";
      return std::nullopt;
    }
    case ConstraintKind::Composition: {
      const auto* k = std::get_if<Keyword>(&value);
      if (k == nullptr || (k->word != "eager" && k->word != "lazy")) return "expects one of eager, lazy";
      return std::nullopt;
    }
    case ConstraintKind::Precedes:
    case ConstraintKind::MemberOrder:
      if (!std::holds_alternative<NameList>(value)) return "expects a list of names";
      return std::nullopt;
  }
  return "unknown constraint kind";
}

std::string to_display(const ConstraintValue& value) {
  return std::visit(overloaded{
                        [](const PatternText& p) { return "\"" + p.text + "\""; },
                        [](const Literals& l) {
                          std::string out;
                          for (std::size_t i = 0; i < l.values.size(); ++i) {
                            if (i) out += " | ";
                            out += "\"" + l.values[i] + "\"";
                          }
                          return out;
                        },
                        [](std::int64_t n) { return std::to_string(n); },
                        [](bool b) { return std::string(b ? "true" : "false"); },
                        [](const Keyword& k) { return k.word; },
                        [](const NameList& n) {
                          std::string out;
                          for (std::size_t i = 0; i < n.names.size(); ++i) {
                            if (i) out += " ";
                            out += n.names[i];
                          }
                          return out;
                        },
                        [](const Unbounded&) { return std::string("*"); },
                    },
                    value);
}

nlohmann::json to_json(const ConstraintValue& value) {
  return std::visit(overloaded{
                        [](const PatternText& p) { return nlohmann::json(p.text); },
                        [](const Literals& l) { return nlohmann::json(l.values); },
                        [](std::int64_t n) { return nlohmann::json(n); },
                        [](bool b) { return nlohmann::json(b); },
                        [](const Keyword& k) { return nlohmann::json(k.word); },
                        [](const NameList& n) { return nlohmann::json(n.names); },
                        [](const Unbounded&) { return nlohmann::json("*"); },
                    },
                    value);
}

}  // namespace mcc
