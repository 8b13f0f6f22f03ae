#include "mcc/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mcc {

const char* to_string(DslTokenKind kind) {
  switch (kind) {
    case DslTokenKind::identifier:
      return "identifier";
    case DslTokenKind::integer:
      return "integer";
    case DslTokenKind::literal:
      return "literal";
    case DslTokenKind::dot:
      return "'.'";
    case DslTokenKind::lbracket:
      return "'['";
    case DslTokenKind::rbracket:
      return "']'";
    case DslTokenKind::colon:
      return "':'";
    case DslTokenKind::star:
      return "'*'";
    case DslTokenKind::question:
      return "'?'";
    case DslTokenKind::plus:
      return "'+'";
    case DslTokenKind::lparen:
      return "'('";
    case DslTokenKind::rparen:
      return "')'";
    case DslTokenKind::pipe:
      return "'|'";
    case DslTokenKind::less:
      return "'<'";
  }
  return "?";
}

const char* to_string(ConstraintSpec::Kind kind) {
  using K = ConstraintSpec::Kind;
  switch (kind) {
    case K::Sequence:
      return "Sequence";
    case K::Alternation:
      return "Alternation";
    case K::Precedence:
      return "Precedence";
    case K::Closure:
      return "Closure";
    case K::Optional:
      return "Optional";
    case K::Positive:
      return "Positive";
    case K::Parenthesized:
      return "Parenthesized";
    case K::PatternLiteral:
      return "PatternLiteral";
    case K::ElementRef:
      return "ElementRef";
    case K::BooleanValue:
      return "BooleanValue";
    case K::IntegerValue:
      return "IntegerValue";
  }
  return "?";
}

ConstraintSpec ConstraintSpec::literal(std::string text) {
  ConstraintSpec s;
  s.kind = Kind::PatternLiteral;
  s.text = std::move(text);
  return s;
}

ConstraintSpec ConstraintSpec::ref(ElementPath path) {
  ConstraintSpec s;
  s.kind = Kind::ElementRef;
  s.path = std::move(path);
  return s;
}

ConstraintSpec ConstraintSpec::boolean_value(bool value) {
  ConstraintSpec s;
  s.kind = Kind::BooleanValue;
  s.boolean = value;
  return s;
}

ConstraintSpec ConstraintSpec::integer_value(std::int64_t value) {
  ConstraintSpec s;
  s.kind = Kind::IntegerValue;
  s.integer = value;
  return s;
}

ConstraintSpec ConstraintSpec::unary(Kind kind, ConstraintSpec inner) {
  ConstraintSpec s;
  s.kind = kind;
  s.children.push_back(std::move(inner));
  return s;
}

ConstraintSpec ConstraintSpec::nary(Kind kind, std::vector<ConstraintSpec> items) {
  ConstraintSpec s;
  s.kind = kind;
  s.children = std::move(items);
  return s;
}

bool ConstraintSpec::operator==(const ConstraintSpec& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::PatternLiteral:
      return text == other.text;
    case Kind::ElementRef:
      return path == other.path;
    case Kind::BooleanValue:
      return boolean == other.boolean;
    case Kind::IntegerValue:
      return integer == other.integer;
    default:
      return children == other.children;
  }
}

std::string unescape_literal(std::string_view raw) {
  static constexpr std::string_view kEscapable = "[]()*?+|<.\"\\";
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 1 < raw.size() && kEscapable.find(raw[i + 1]) != std::string_view::npos) {
      out += raw[++i];
    } else {
      out += raw[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer

std::pair<std::vector<DslToken>, Diagnostics> tokenize_mapping(std::string_view source, std::string_view file_name) {
  std::vector<DslToken> tokens;
  Diagnostics diags;
  std::size_t pos = 0, line = 1, line_start = 0;

  auto span_at = [&](std::size_t offset) {
    SourceSpan s;
    s.file = std::string(file_name);
    s.offset = offset;
    s.line = line;
    s.column = offset - line_start + 1;
    return s;
  };

  while (pos < source.size()) {
    char c = source[pos];
    if (c == '\n') {
      ++pos;
      ++line;
      line_start = pos;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
      continue;
    }
    if (c == '#') {
      while (pos < source.size() && source[pos] != '\n') ++pos;
      continue;
    }
    DslToken tok;
    tok.span = span_at(pos);
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < source.size() && (std::isalnum(static_cast<unsigned char>(source[pos])) || source[pos] == '_'))
        ++pos;
      tok.kind = DslTokenKind::identifier;
      tok.text = std::string(source.substr(start, pos - start));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < source.size() && std::isdigit(static_cast<unsigned char>(source[pos]))) ++pos;
      tok.kind = DslTokenKind::integer;
      tok.text = std::string(source.substr(start, pos - start));
    } else if (c == '"') {
      std::size_t start = ++pos;
      bool closed = false;
      while (pos < source.size() && source[pos] != '\n') {
        if (source[pos] == '\\' && pos + 1 < source.size() && source[pos + 1] != '\n') {
          pos += 2;
          continue;
        }
        if (source[pos] == '"') {
          closed = true;
          break;
        }
        ++pos;
      }
      if (!closed) {
        diags.push_back(make_error("unterminated-literal", "unterminated quoted literal", tok.span));
        continue;
      }
      tok.kind = DslTokenKind::literal;
      tok.text = unescape_literal(source.substr(start, pos - start));
      ++pos;
    } else {
      static constexpr std::string_view kPunct = ".[]:*?+()|<";
      static constexpr DslTokenKind kKinds[] = {
          DslTokenKind::dot,      DslTokenKind::lbracket, DslTokenKind::rbracket, DslTokenKind::colon,
          DslTokenKind::star,     DslTokenKind::question, DslTokenKind::plus,     DslTokenKind::lparen,
          DslTokenKind::rparen,   DslTokenKind::pipe,     DslTokenKind::less,
      };
      auto at = kPunct.find(c);
      if (at == std::string_view::npos) {
        diags.push_back(make_error("illegal-character", std::string("illegal character '") + c + "'", tok.span));
        ++pos;
        continue;
      }
      tok.kind = kKinds[at];
      tok.text = std::string(1, c);
      ++pos;
    }
    tok.span.length = pos - tok.span.offset;
    tokens.push_back(std::move(tok));
  }
  return {std::move(tokens), std::move(diags)};
}

// ---------------------------------------------------------------------------
// Definition boundaries and colon repair

std::vector<std::pair<std::size_t, std::size_t>> split_definitions(const std::vector<DslToken>& tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > start && tokens[i].span.line > tokens[i - 1].span.line) {
      auto prev = tokens[i - 1].kind;
      bool open_operator = prev == DslTokenKind::less || prev == DslTokenKind::pipe || prev == DslTokenKind::colon ||
                           prev == DslTokenKind::dot || prev == DslTokenKind::lbracket;
      bool indented = tokens[i].span.column > tokens[start].span.column;
      // Definitions always begin with a target name.
      bool continues = tokens[i].kind != DslTokenKind::identifier;
      if (depth <= 0 && !open_operator && !indented && !continues) {
        groups.emplace_back(start, i);
        start = i;
        depth = 0;
      }
    }
    switch (tokens[i].kind) {
      case DslTokenKind::lparen:
      case DslTokenKind::lbracket:
        ++depth;
        break;
      case DslTokenKind::rparen:
      case DslTokenKind::rbracket:
        --depth;
        break;
      default:
        break;
    }
  }
  if (start < tokens.size()) groups.emplace_back(start, tokens.size());
  return groups;
}

std::pair<std::vector<DslToken>, Diagnostics> lenient_repair(std::vector<DslToken> tokens, RepairMode mode) {
  if (mode == RepairMode::strict) return {std::move(tokens), {}};
  Diagnostics diags;
  std::vector<std::size_t> insert_before;
  for (auto [begin, end] : split_definitions(tokens)) {
    std::size_t i = begin;
    auto is = [&](std::size_t k, DslTokenKind kind) { return k < end && tokens[k].kind == kind; };
    if (!is(i, DslTokenKind::identifier)) continue;
    ++i;
    while (is(i, DslTokenKind::dot) && is(i + 1, DslTokenKind::identifier)) i += 2;
    if (is(i, DslTokenKind::lbracket) && is(i + 1, DslTokenKind::identifier) && is(i + 2, DslTokenKind::rbracket))
      i += 3;
    if (is(i, DslTokenKind::literal)) insert_before.push_back(i);
  }
  for (auto it = insert_before.rbegin(); it != insert_before.rend(); ++it) {
    DslToken colon;
    colon.kind = DslTokenKind::colon;
    colon.text = ":";
    colon.span = tokens[*it].span;
    colon.span.length = 0;
    colon.synthetic = true;
    diags.push_back(make_warning("missing-colon", "missing ':' before constraint; inserted", colon.span));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(*it), std::move(colon));
  }
  std::reverse(diags.begin(), diags.end());
  return {std::move(tokens), std::move(diags)};
}

std::pair<std::string, Diagnostics> repair_mapping_text(std::string_view source, std::string_view file_name) {
  auto [tokens, lex_diags] = tokenize_mapping(source, file_name);
  auto [repaired, diags] = lenient_repair(std::move(tokens), RepairMode::lenient);
  std::string text(source);
  for (auto it = repaired.rbegin(); it != repaired.rend(); ++it)
    if (it->synthetic) text.insert(it->span.offset, ": ");
  append(lex_diags, diags);
  return {std::move(text), std::move(lex_diags)};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct SyntaxError {
  std::string message;
  SourceSpan where;
};

class DefinitionParser {
 public:
  DefinitionParser(const std::vector<DslToken>& tokens, std::size_t begin, std::size_t end)
      : toks_(tokens), pos_(begin), end_(end) {}

  ConstraintDefinition parse(Diagnostics& diags, bool& keep) {
    ConstraintDefinition def;
    def.span = toks_[pos_].span;
    def.target = parse_path();
    if (at(DslTokenKind::lbracket)) {
      ++pos_;
      const DslToken& id = expect(DslTokenKind::identifier, "constraint id");
      auto kind = kind_from_keyword(id.text);
      if (!kind) {
        diags.push_back(make_warning("unknown-constraint-id",
                                     "unknown constraint id '" + id.text + "'; definition ignored", id.span));
        keep = false;
      }
      def.constraint_id = kind;
      expect(DslTokenKind::rbracket, "']'");
    }
    if (at(DslTokenKind::colon)) {
      ++pos_;
      def.constraint = parse_alternation();
    }
    if (pos_ < end_) throw SyntaxError{"unexpected " + describe(toks_[pos_]), toks_[pos_].span};
    if (!def.constraint_id && !def.constraint && keep) {
      diags.push_back(make_error("empty-definition",
                                 "definition of " + def.target.str() + " has neither a constraint id nor a constraint",
                                 def.span));
      keep = false;
    }
    const auto& last = toks_[end_ - 1].span;
    def.span.length = last.offset + last.length - def.span.offset;
    return def;
  }

 private:
  static std::string describe(const DslToken& t) {
    if (t.kind == DslTokenKind::identifier || t.kind == DslTokenKind::integer) return "'" + t.text + "'";
    if (t.kind == DslTokenKind::literal) return "literal " + quote(t.text);
    return to_string(t.kind);
  }

  bool at(DslTokenKind kind) const { return pos_ < end_ && toks_[pos_].kind == kind; }

  const DslToken& expect(DslTokenKind kind, const char* what) {
    if (!at(kind)) {
      if (pos_ >= end_) throw SyntaxError{std::string("expected ") + what + " at end of definition", end_span()};
      throw SyntaxError{std::string("expected ") + what + ", found " + describe(toks_[pos_]), toks_[pos_].span};
    }
    return toks_[pos_++];
  }

  SourceSpan end_span() const {
    SourceSpan s = toks_[end_ - 1].span;
    s.offset += s.length;
    s.column += s.length;
    s.length = 0;
    return s;
  }

  ElementPath parse_path() {
    ElementPath path;
    path.segments.push_back(expect(DslTokenKind::identifier, "element name").text);
    while (at(DslTokenKind::dot)) {
      ++pos_;
      path.segments.push_back(expect(DslTokenKind::identifier, "member name").text);
    }
    return path;
  }

  bool starts_atom() const {
    return at(DslTokenKind::literal) || at(DslTokenKind::integer) || at(DslTokenKind::identifier) ||
           at(DslTokenKind::lparen);
  }

  ConstraintSpec parse_alternation() {
    SourceSpan start = current_span();
    std::vector<ConstraintSpec> items{parse_precedence()};
    while (at(DslTokenKind::pipe)) {
      ++pos_;
      items.push_back(parse_precedence());
    }
    return collapse(ConstraintSpec::Kind::Alternation, std::move(items), start);
  }

  ConstraintSpec parse_precedence() {
    SourceSpan start = current_span();
    std::vector<ConstraintSpec> items{parse_sequence()};
    while (at(DslTokenKind::less)) {
      ++pos_;
      items.push_back(parse_sequence());
    }
    return collapse(ConstraintSpec::Kind::Precedence, std::move(items), start);
  }

  ConstraintSpec parse_sequence() {
    SourceSpan start = current_span();
    std::vector<ConstraintSpec> items;
    if (!starts_atom()) {
      if (pos_ >= end_) throw SyntaxError{"expected a constraint at end of definition", end_span()};
      throw SyntaxError{"expected a constraint, found " + describe(toks_[pos_]), toks_[pos_].span};
    }
    while (starts_atom()) items.push_back(parse_postfix());
    return collapse(ConstraintSpec::Kind::Sequence, std::move(items), start);
  }

  ConstraintSpec parse_postfix() {
    ConstraintSpec spec = parse_atom();
    for (;;) {
      ConstraintSpec::Kind kind;
      if (at(DslTokenKind::star))
        kind = ConstraintSpec::Kind::Closure;
      else if (at(DslTokenKind::question))
        kind = ConstraintSpec::Kind::Optional;
      else if (at(DslTokenKind::plus))
        kind = ConstraintSpec::Kind::Positive;
      else
        return spec;
      SourceSpan span = spec.span;
      ++pos_;
      spec = ConstraintSpec::unary(kind, std::move(spec));
      spec.span = span;
    }
  }

  ConstraintSpec parse_atom() {
    const DslToken& t = toks_[pos_];
    ConstraintSpec spec;
    switch (t.kind) {
      case DslTokenKind::literal:
        ++pos_;
        spec = ConstraintSpec::literal(t.text);
        break;
      case DslTokenKind::integer:
        ++pos_;
        spec = ConstraintSpec::integer_value(std::stoll(t.text));
        break;
      case DslTokenKind::identifier:
        if ((t.text == "true" || t.text == "false") &&
            !(pos_ + 1 < end_ && toks_[pos_ + 1].kind == DslTokenKind::dot)) {
          ++pos_;
          spec = ConstraintSpec::boolean_value(t.text == "true");
        } else {
          spec = ConstraintSpec::ref(parse_path());
        }
        break;
      case DslTokenKind::lparen: {
        ++pos_;
        ConstraintSpec inner = parse_alternation();
        expect(DslTokenKind::rparen, "')'");
        spec = ConstraintSpec::unary(ConstraintSpec::Kind::Parenthesized, std::move(inner));
        break;
      }
      default:
        throw SyntaxError{"expected a constraint, found " + describe(t), t.span};
    }
    spec.span = t.span;
    return spec;
  }

  SourceSpan current_span() const { return pos_ < end_ ? toks_[pos_].span : end_span(); }

  static ConstraintSpec collapse(ConstraintSpec::Kind kind, std::vector<ConstraintSpec> items, SourceSpan span) {
    if (items.size() == 1) return std::move(items.front());
    ConstraintSpec s = ConstraintSpec::nary(kind, std::move(items));
    s.span = span;
    return s;
  }

  const std::vector<DslToken>& toks_;
  std::size_t pos_;
  std::size_t end_;
};

}  // namespace

std::pair<MappingDocument, Diagnostics> parse_mapping_tokens(const std::vector<DslToken>& tokens,
                                                             std::string_view file_name) {
  MappingDocument doc;
  doc.source_name = std::string(file_name);
  Diagnostics diags;
  for (auto [begin, end] : split_definitions(tokens)) {
    DefinitionParser parser(tokens, begin, end);
    try {
      bool keep = true;
      ConstraintDefinition def = parser.parse(diags, keep);
      if (keep) doc.definitions.push_back(std::move(def));
    } catch (const SyntaxError& e) {
      diags.push_back(make_error("syntax", e.message, e.where));
    }
  }
  return {std::move(doc), std::move(diags)};
}

std::pair<MappingDocument, Diagnostics> parse_mapping(std::string_view source, RepairMode mode,
                                                      std::string_view file_name) {
  auto [tokens, diags] = tokenize_mapping(source, file_name);
  auto [repaired, repair_diags] = lenient_repair(std::move(tokens), mode);
  append(diags, repair_diags);
  auto [doc, parse_diags] = parse_mapping_tokens(repaired, file_name);
  append(diags, parse_diags);
  return {std::move(doc), std::move(diags)};
}

// ---------------------------------------------------------------------------
// Printer

std::string render_spec(const ConstraintSpec& spec) {
  using K = ConstraintSpec::Kind;
  auto join = [&](const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < spec.children.size(); ++i) {
      if (i) out += sep;
      out += render_spec(spec.children[i]);
    }
    return out;
  };
  switch (spec.kind) {
    case K::Sequence:
      return join(" ");
    case K::Alternation:
      return join(" | ");
    case K::Precedence:
      return join(" < ");
    case K::Closure:
      return render_spec(spec.inner()) + "*";
    case K::Optional:
      return render_spec(spec.inner()) + "?";
    case K::Positive:
      return render_spec(spec.inner()) + "+";
    case K::Parenthesized:
      return "(" + render_spec(spec.inner()) + ")";
    case K::PatternLiteral:
      return quote(spec.text);
    case K::ElementRef:
      return spec.path.str();
    case K::BooleanValue:
      return spec.boolean ? "true" : "false";
    case K::IntegerValue:
      return std::to_string(spec.integer);
  }
  return "";
}

std::string render_definition(const ConstraintDefinition& definition) {
  std::string out = definition.target.str();
  if (definition.constraint_id) out += "[" + std::string(keyword_of(*definition.constraint_id)) + "]";
  if (definition.constraint) out += ": " + render_spec(*definition.constraint);
  return out;
}

std::string render_mapping(const MappingDocument& document) {
  std::string out;
  for (const auto& def : document.definitions) out += render_definition(def) + "\n";
  return out;
}

}  // namespace mcc
