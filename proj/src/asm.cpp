#include "mcc/asm.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mcc {

const char* to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::composite:
      return "composite";
    case ElementKind::alternative:
      return "alternative";
    case ElementKind::token:
      return "token";
  }
  return "composite";
}

bool MemberDef::operator==(const MemberDef& other) const {
  return name == other.name && target == other.target && min == other.min && max == other.max &&
         is_id == other.is_id && is_reference == other.is_reference &&
         default_constraints == other.default_constraints;
}

const MemberDef* ElementDef::find_member(std::string_view member) const {
  for (const auto& m : members)
    if (m.name == member) return &m;
  return nullptr;
}

bool ElementDef::operator==(const ElementDef& other) const {
  return name == other.name && kind == other.kind && members == other.members && variants == other.variants &&
         default_constraints == other.default_constraints;
}

const ElementDef* Model::find(std::string_view element) const {
  for (const auto& e : elements)
    if (e.name == element) return &e;
  return nullptr;
}

std::optional<std::size_t> Model::index_of(std::string_view element) const {
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i].name == element) return i;
  return std::nullopt;
}

bool Model::operator==(const Model& other) const {
  return name == other.name && elements == other.elements && skip_patterns == other.skip_patterns;
}

std::string ElementPath::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out += '.';
    out += segments[i];
  }
  return out;
}

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string multiplicity_suffix(std::size_t min, std::size_t max) {
  if (min == 1 && max == 1) return "";
  if (min == 0 && max == 1) return "?";
  if (min == 0 && max == kUnbounded) return "*";
  if (min == 1 && max == kUnbounded) return "+";
  if (max == kUnbounded) return "{" + std::to_string(min) + ",*}";
  if (min == max) return "{" + std::to_string(min) + "}";
  return "{" + std::to_string(min) + "," + std::to_string(max) + "}";
}

namespace {

// ---------------------------------------------------------------------------
// Model file lexer

enum class Tok { ident, string, integer, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourceSpan span;
};

class ModelLexer {
 public:
  ModelLexer(std::string_view source, std::string_view file) : src_(source), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      Token t;
      t.span = here();
      if (pos_ >= src_.size()) {
        t.kind = Tok::end;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
        t.kind = Tok::ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        t.kind = Tok::integer;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (c == '"') {
        t.kind = Tok::string;
        t.text = read_string();
      } else if (std::string_view("{}():?*+,=|@").find(c) != std::string_view::npos) {
        t.kind = Tok::punct;
        t.text = std::string(1, c);
        advance();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", t.span);
      }
      t.span.length = pos_ - t.span.offset;
      out.push_back(std::move(t));
    }
  }

 private:
  SourceSpan here() const {
    SourceSpan s;
    s.file = std::string(file_);
    s.offset = pos_;
    s.line = line_;
    s.column = pos_ - line_start_ + 1;
    return s;
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  // Only \" and \\ are escapes; any other backslash is kept verbatim so
  // that pattern escapes such as \n survive.
  std::string read_string() {
    SourceSpan start = here();
    advance();
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\n') break;
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '"' || src_[pos_ + 1] == '\\')) {
        advance();
      }
      out += src_[pos_];
      advance();
    }
    if (pos_ >= src_.size() || src_[pos_] != '"') throw ParseError("unterminated string", start);
    advance();
    return out;
  }

  std::string_view src_;
  std::string_view file_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

// ---------------------------------------------------------------------------
// Model file parser

class ModelParser {
 public:
  explicit ModelParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Model run() {
    Model model;
    expect_word("language");
    model.name = expect(Tok::ident, "language name").text;
    while (peek().kind != Tok::end) {
      const Token& t = peek();
      if (is_word("skip")) {
        next();
        model.skip_patterns.push_back(expect(Tok::string, "skip pattern").text);
      } else if (is_word("token")) {
        add_element(model, parse_token());
      } else if (is_word("element")) {
        add_element(model, parse_element());
      } else {
        throw ParseError("expected 'skip', 'token' or 'element', found '" + t.text + "'", t.span);
      }
    }
    return model;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  bool is_word(std::string_view w) const { return peek().kind == Tok::ident && peek().text == w; }
  bool is_punct(char c) const { return peek().kind == Tok::punct && peek().text[0] == c; }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw ParseError(std::string("expected ") + what + describe_found(), peek().span);
    return next();
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) throw ParseError("expected '" + std::string(w) + "'" + describe_found(), peek().span);
    next();
  }
  void expect_punct(char c) {
    if (!is_punct(c)) throw ParseError(std::string("expected '") + c + "'" + describe_found(), peek().span);
    next();
  }
  std::string describe_found() const {
    if (peek().kind == Tok::end) return ", found end of file";
    return ", found '" + peek().text + "'";
  }

  static void add_element(Model& model, ElementDef element) {
    if (const auto* prior = model.find(element.name))
      throw ParseError("duplicate element " + element.name + " (first declared at line " +
                           std::to_string(prior->span.line) + ")",
                       element.span);
    model.elements.push_back(std::move(element));
  }

  static void add_member(ElementDef& element, MemberDef member) {
    if (element.find_member(member.name))
      throw ParseError("duplicate member " + element.name + "." + member.name, member.span);
    element.members.push_back(std::move(member));
  }

  ElementDef parse_token() {
    ElementDef e;
    e.span = next().span;
    e.kind = ElementKind::token;
    e.name = expect(Tok::ident, "token name").text;
    parse_annotations(e.default_constraints);
    if (is_punct('{')) {
      next();
      while (!is_punct('}')) {
        MemberDef m;
        m.span = peek().span;
        m.name = expect(Tok::ident, "value member name").text;
        if (is_punct(':')) throw ParseError("token members store matched text and take no type", peek().span);
        parse_annotations(m.default_constraints);
        add_member(e, std::move(m));
      }
      next();
      parse_annotations(e.default_constraints);
    }
    return e;
  }

  ElementDef parse_element() {
    ElementDef e;
    e.span = next().span;
    e.name = expect(Tok::ident, "element name").text;
    parse_annotations(e.default_constraints);
    if (is_punct('=')) {
      next();
      e.kind = ElementKind::alternative;
      e.variants.push_back(expect(Tok::ident, "variant element name").text);
      while (is_punct('|')) {
        next();
        e.variants.push_back(expect(Tok::ident, "variant element name").text);
      }
      return e;
    }
    e.kind = ElementKind::composite;
    expect_punct('{');
    while (!is_punct('}')) add_member(e, parse_member());
    next();
    return e;
  }

  MemberDef parse_member() {
    MemberDef m;
    m.span = peek().span;
    // `id` and `ref` are modifiers only when another name follows them.
    while ((is_word("id") || is_word("ref")) && peek(1).kind == Tok::ident) {
      if (next().text == "id")
        m.is_id = true;
      else
        m.is_reference = true;
    }
    m.name = expect(Tok::ident, "member name").text;
    expect_punct(':');
    m.target = expect(Tok::ident, "member type").text;
    parse_multiplicity(m);
    parse_annotations(m.default_constraints);
    return m;
  }

  void parse_multiplicity(MemberDef& m) {
    if (is_punct('?')) {
      next();
      m.min = 0;
      m.max = 1;
    } else if (is_punct('*')) {
      next();
      m.min = 0;
      m.max = kUnbounded;
    } else if (is_punct('+')) {
      next();
      m.min = 1;
      m.max = kUnbounded;
    } else if (is_punct('{')) {
      next();
      m.min = std::stoull(expect(Tok::integer, "minimum").text);
      if (is_punct(',')) {
        next();
        if (is_punct('*')) {
          next();
          m.max = kUnbounded;
        } else {
          m.max = std::stoull(expect(Tok::integer, "maximum or *").text);
        }
      } else {
        m.max = m.min;
      }
      expect_punct('}');
    }
  }

  struct Arg {
    Token token;
    bool star = false;
  };

  void parse_annotations(std::vector<AnnotationConstraint>& into) {
    while (is_punct('@')) {
      SourceSpan at = next().span;
      const Token& name = expect(Tok::ident, "annotation name");
      auto kind = kind_from_annotation(name.text);
      if (!kind) throw ParseError("unknown annotation @" + name.text, name.span);
      std::vector<Arg> args;
      if (is_punct('(')) {
        next();
        if (!is_punct(')')) {
          for (;;) {
            if (is_punct('*')) {
              args.push_back({next(), true});
            } else if (peek().kind == Tok::ident || peek().kind == Tok::string || peek().kind == Tok::integer) {
              args.push_back({next(), false});
            } else {
              throw ParseError("expected annotation argument" + describe_found(), peek().span);
            }
            if (!is_punct(',')) break;
            next();
          }
        }
        expect_punct(')');
      }
      AnnotationConstraint a;
      a.kind = *kind;
      a.span = at;
      a.value = convert(*kind, args, at);
      if (auto err = shape_error(*kind, a.value)) throw ParseError("@" + name.text + " " + *err, at);
      into.push_back(std::move(a));
    }
  }

  static ConstraintValue convert(ConstraintKind kind, const std::vector<Arg>& args, const SourceSpan& at) {
    auto single = [&]() -> const Arg& {
      if (args.size() != 1)
        throw ParseError("@" + std::string(annotation_name_of(kind)) + " takes exactly one argument", at);
      return args.front();
    };
    switch (kind) {
      case ConstraintKind::Pattern: {
        const Arg& a = single();
        if (a.token.kind != Tok::string) throw ParseError("@Pattern expects a string", at);
        return PatternText{a.token.text};
      }
      case ConstraintKind::Value:
      case ConstraintKind::Associativity:
      case ConstraintKind::Composition: {
        const Arg& a = single();
        if (a.star || a.token.kind == Tok::integer) throw ParseError("expected a name", at);
        return Keyword{a.token.text};
      }
      case ConstraintKind::Prefix:
      case ConstraintKind::Suffix:
      case ConstraintKind::Separator: {
        Literals lits;
        for (const auto& a : args) {
          if (a.token.kind != Tok::string || a.star) throw ParseError("delimiters must be strings", at);
          lits.values.push_back(a.token.text);
        }
        return lits;
      }
      case ConstraintKind::Optional:
      case ConstraintKind::ID:
      case ConstraintKind::Reference: {
        if (args.empty()) return true;
        const Arg& a = single();
        if (a.token.kind == Tok::ident && (a.token.text == "true" || a.token.text == "false"))
          return a.token.text == "true";
        throw ParseError("expected true or false", at);
      }
      case ConstraintKind::Minimum:
      case ConstraintKind::Priority:
      case ConstraintKind::Maximum: {
        const Arg& a = single();
        if (a.star && kind == ConstraintKind::Maximum) return Unbounded{};
        if (a.token.kind != Tok::integer) throw ParseError("expected an integer", at);
        return static_cast<std::int64_t>(std::stoll(a.token.text));
      }
      case ConstraintKind::Precedes:
      case ConstraintKind::MemberOrder:
        break;
    }
    throw ParseError("annotation has no model spelling", at);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void render_annotations(std::ostringstream& out, const std::vector<AnnotationConstraint>& list) {
  for (const auto& a : list) {
    out << " @" << annotation_name_of(a.kind);
    std::visit(
        [&](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, PatternText>) {
            out << '(' << quote(v.text) << ')';
          } else if constexpr (std::is_same_v<V, Literals>) {
            out << '(';
            for (std::size_t i = 0; i < v.values.size(); ++i) out << (i ? ", " : "") << quote(v.values[i]);
            out << ')';
          } else if constexpr (std::is_same_v<V, std::int64_t>) {
            out << '(' << v << ')';
          } else if constexpr (std::is_same_v<V, bool>) {
            if (!v) out << "(false)";
          } else if constexpr (std::is_same_v<V, Keyword>) {
            out << '(' << v.word << ')';
          } else if constexpr (std::is_same_v<V, Unbounded>) {
            out << "(*)";
          }
        },
        a.value);
  }
}

}  // namespace

Model parse_model(std::string_view source, std::string_view file_name) {
  ModelLexer lexer(source, file_name);
  ModelParser parser(lexer.run());
  return parser.run();
}

const MemberDef* value_member_of(const Model&, const ElementDef& token) {
  if (token.members.empty()) return nullptr;
  for (const auto& a : token.default_constraints)
    if (a.kind == ConstraintKind::Value)
      if (const auto* k = std::get_if<Keyword>(&a.value)) return token.find_member(k->word);
  if (token.members.size() == 1) return &token.members.front();
  return nullptr;
}

std::set<std::string> subtypes_of(const Model& model, std::string_view name) {
  std::set<std::string> out;
  std::vector<std::string> work{std::string(name)};
  while (!work.empty()) {
    std::string cur = work.back();
    work.pop_back();
    if (!out.insert(cur).second) continue;
    if (const auto* e = model.find(cur); e && e->kind == ElementKind::alternative)
      for (const auto& v : e->variants) work.push_back(v);
  }
  return out;
}

std::optional<std::string> id_token_of(const Model& model, std::string_view element) {
  std::optional<std::string> found;
  for (const auto& name : subtypes_of(model, element)) {
    const auto* e = model.find(name);
    if (e == nullptr) return std::nullopt;
    if (e->kind != ElementKind::composite) continue;
    const MemberDef* id = nullptr;
    for (const auto& m : e->members)
      if (m.is_id) {
        if (id) return std::nullopt;
        id = &m;
      }
    if (id == nullptr) return std::nullopt;
    if (found && *found != id->target) return std::nullopt;
    found = id->target;
  }
  return found;
}

Diagnostics validate_model(const Model& model) {
  Diagnostics out;
  auto error = [&](std::string code, std::string message, const SourceSpan& where) {
    out.push_back(make_error(std::move(code), std::move(message), where));
  };

  std::map<std::string, const ElementDef*> seen;
  for (const auto& e : model.elements) {
    if (!seen.emplace(e.name, &e).second) error("duplicate-element", "duplicate element " + e.name, e.span);
  }

  for (const auto& e : model.elements) {
    std::set<std::string> member_names;
    for (const auto& m : e.members)
      if (!member_names.insert(m.name).second)
        error("duplicate-member", "duplicate member " + e.name + "." + m.name, m.span);

    switch (e.kind) {
      case ElementKind::token: {
        if (!e.variants.empty()) error("token-shape", "token " + e.name + " cannot have variants", e.span);
        for (const auto& m : e.members)
          if (!m.is_value())
            error("token-shape", "token " + e.name + " cannot have element-typed member " + m.name, m.span);
        if (e.members.size() > 1 && !value_member_of(model, e))
          error("value-member", "token " + e.name + " has several members; @Value must name the one storing text",
                e.span);
        for (const auto& a : e.default_constraints)
          if (a.kind == ConstraintKind::Value)
            if (const auto* k = std::get_if<Keyword>(&a.value); k && !e.find_member(k->word))
              error("value-member", "@Value names unknown member " + e.name + "." + k->word, a.span);
        break;
      }
      case ElementKind::alternative:
        if (!e.members.empty()) error("alternative-shape", "alternative " + e.name + " cannot have members", e.span);
        if (e.variants.empty()) error("empty-alternative", "alternative " + e.name + " has no variants", e.span);
        for (const auto& v : e.variants)
          if (!model.find(v)) error("unknown-element", "unknown element " + v, e.span);
        break;
      case ElementKind::composite:
        if (!e.variants.empty()) error("composite-shape", "composite " + e.name + " cannot have variants", e.span);
        break;
    }

    for (const auto& m : e.members) {
      if (m.is_value()) {
        if (e.kind != ElementKind::token)
          error("member-type", "member " + e.name + "." + m.name + " has no type", m.span);
        continue;
      }
      const auto* target = model.find(m.target);
      if (!target) {
        error("unknown-element", "unknown element " + m.target, m.span);
        continue;
      }
      if (m.max == 0 || m.min > m.max)
        error("multiplicity", "member " + e.name + "." + m.name + " has invalid multiplicity", m.span);
      if (m.is_id && m.is_reference)
        error("id-reference", "member " + e.name + "." + m.name + " cannot be both id and ref", m.span);
      if (m.is_id && target->kind != ElementKind::token)
        error("id-target", "id member " + e.name + "." + m.name + " must target a token element", m.span);
      if (m.is_reference && !id_token_of(model, m.target))
        error("reference-target",
              "ref member " + e.name + "." + m.name + " targets " + m.target + ", which has no single id member",
              m.span);
    }
  }

  // Alternatives that only lead back to themselves never derive anything.
  for (const auto& e : model.elements) {
    if (e.kind != ElementKind::alternative) continue;
    std::set<std::string> visiting;
    std::function<bool(const std::string&)> cyclic = [&](const std::string& name) {
      const auto* cur = model.find(name);
      if (!cur || cur->kind != ElementKind::alternative) return false;
      if (name == e.name && !visiting.empty()) return true;
      if (!visiting.insert(name).second) return false;
      for (const auto& v : cur->variants)
        if (cyclic(v)) return true;
      return false;
    };
    if (cyclic(e.name)) error("cyclic-alternative", "alternative " + e.name + " is its own variant", e.span);
  }
  return out;
}

PathTarget resolve_path(const Model& model, const ElementPath& path) {
  if (path.segments.empty()) throw std::invalid_argument("empty path");
  if (path.segments.size() > 2) throw std::invalid_argument("nested paths unsupported: " + path.str());
  PathTarget out;
  const auto* element = model.find(path.segments[0]);
  if (!element) return out;
  out.element = element;
  if (path.segments.size() == 1) {
    out.kind = PathTarget::Kind::element;
    return out;
  }
  const auto* member = element->find_member(path.segments[1]);
  if (!member) {
    out.resolved_prefix = {element->name};
    return out;
  }
  out.kind = PathTarget::Kind::member;
  out.member = member;
  return out;
}

std::string render_model(const Model& model) {
  std::ostringstream out;
  out << "language " << model.name << "\n";
  if (!model.skip_patterns.empty()) out << "\n";
  for (const auto& s : model.skip_patterns) out << "skip " << quote(s) << "\n";
  for (const auto& e : model.elements) {
    out << "\n";
    switch (e.kind) {
      case ElementKind::token:
        out << "token " << e.name;
        render_annotations(out, e.default_constraints);
        if (!e.members.empty()) {
          out << " {";
          for (const auto& m : e.members) {
            out << ' ' << m.name;
            render_annotations(out, m.default_constraints);
          }
          out << " }";
        }
        out << "\n";
        break;
      case ElementKind::alternative:
        out << "element " << e.name;
        render_annotations(out, e.default_constraints);
        out << " =";
        for (std::size_t i = 0; i < e.variants.size(); ++i) out << (i ? " | " : " ") << e.variants[i];
        out << "\n";
        break;
      case ElementKind::composite:
        out << "element " << e.name;
        render_annotations(out, e.default_constraints);
        out << " {\n";
        for (const auto& m : e.members) {
          out << "  ";
          if (m.is_id) out << "id ";
          if (m.is_reference) out << "ref ";
          out << m.name << ": " << m.target << multiplicity_suffix(m.min, m.max);
          render_annotations(out, m.default_constraints);
          out << "\n";
        }
        out << "}\n";
        break;
    }
  }
  return out.str();
}

}  // namespace mcc
