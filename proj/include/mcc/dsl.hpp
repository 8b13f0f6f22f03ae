#pragma once

// Mapping files: the constraint language that maps an abstract syntax model
// onto a concrete syntax, in property-like, grammar-like or mixed style.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcc/asm.hpp"
#include "mcc/constraint_value.hpp"
#include "mcc/diagnostics.hpp"

namespace mcc {

enum class DslTokenKind {
  identifier,
  integer,
  literal,  // quoted; text holds the unescaped content
  dot,
  lbracket,
  rbracket,
  colon,
  star,
  question,
  plus,
  lparen,
  rparen,
  pipe,
  less,
};

const char* to_string(DslTokenKind kind);

struct DslToken {
  DslTokenKind kind = DslTokenKind::identifier;
  std::string text;
  SourceSpan span;
  /// Inserted by lenient_repair rather than read from the source.
  bool synthetic = false;
};

struct ConstraintSpec {
  enum class Kind {
    Sequence,
    Alternation,
    Precedence,
    Closure,
    Optional,
    Positive,
    Parenthesized,
    PatternLiteral,
    ElementRef,
    BooleanValue,
    IntegerValue,
  };

  Kind kind = Kind::PatternLiteral;
  /// Items of Sequence/Alternation/Precedence; the single operand of the
  /// postfix and parenthesized forms.
  std::vector<ConstraintSpec> children;
  std::string text;  // PatternLiteral
  ElementPath path;  // ElementRef
  bool boolean = false;
  std::int64_t integer = 0;
  SourceSpan span;

  static ConstraintSpec literal(std::string text);
  static ConstraintSpec ref(ElementPath path);
  static ConstraintSpec boolean_value(bool value);
  static ConstraintSpec integer_value(std::int64_t value);
  static ConstraintSpec unary(Kind kind, ConstraintSpec inner);
  static ConstraintSpec nary(Kind kind, std::vector<ConstraintSpec> items);

  const ConstraintSpec& inner() const { return children.front(); }
  bool is_postfix() const { return kind == Kind::Closure || kind == Kind::Optional || kind == Kind::Positive; }

  /// Structural equality; spans are ignored.
  bool operator==(const ConstraintSpec& other) const;
};

const char* to_string(ConstraintSpec::Kind kind);

struct ConstraintDefinition {
  ElementPath target;
  std::optional<ConstraintKind> constraint_id;
  std::optional<ConstraintSpec> constraint;
  SourceSpan span;

  bool operator==(const ConstraintDefinition& other) const {
    return target == other.target && constraint_id == other.constraint_id && constraint == other.constraint;
  }
};

struct MappingDocument {
  std::vector<ConstraintDefinition> definitions;
  std::string source_name;

  bool operator==(const MappingDocument& other) const { return definitions == other.definitions; }
};

enum class RepairMode { strict, lenient };

/// Lexes a mapping file. Whitespace and `#` comments are skipped; quoted
/// literals have their escapes resolved. Unterminated quotes and illegal
/// characters are reported and skipped.
std::pair<std::vector<DslToken>, Diagnostics> tokenize_mapping(std::string_view source,
                                                               std::string_view file_name = "");

/// In lenient mode, inserts the `:` missing between a definition head
/// (`Target` or `Target[id]`) and a following literal, with one warning per
/// insertion. Strict mode returns the tokens unchanged.
std::pair<std::vector<DslToken>, Diagnostics> lenient_repair(std::vector<DslToken> tokens,
                                                             RepairMode mode = RepairMode::lenient);

/// Groups tokens into definitions. A newline ends a definition unless
/// brackets are still open, the line ends in a binary operator, the next
/// line is indented past the definition's first column, or the next line
/// does not start with a name.
std::vector<std::pair<std::size_t, std::size_t>> split_definitions(const std::vector<DslToken>& tokens);

std::pair<MappingDocument, Diagnostics> parse_mapping(std::string_view source, RepairMode mode = RepairMode::lenient,
                                                      std::string_view file_name = "");

/// Parses already-lexed tokens (after any repair).
std::pair<MappingDocument, Diagnostics> parse_mapping_tokens(const std::vector<DslToken>& tokens,
                                                             std::string_view file_name = "");

/// Applies lenient colon repair at the text level, returning the repaired
/// source. Used when a generated parser reads mapping files.
std::pair<std::string, Diagnostics> repair_mapping_text(std::string_view source, std::string_view file_name = "");

std::string render_spec(const ConstraintSpec& spec);
std::string render_definition(const ConstraintDefinition& definition);
std::string render_mapping(const MappingDocument& document);

/// Resolves the escapes accepted inside quoted literals: a backslash before
/// one of  [ ] ( ) * ? + | < . " \  yields that character; any other
/// backslash is kept.
std::string unescape_literal(std::string_view raw);

}  // namespace mcc
