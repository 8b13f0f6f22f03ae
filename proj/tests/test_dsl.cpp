#include <doctest.h>

#include <random>

#include "mcc/dsl.hpp"
#include "support.hpp"

using namespace mcc;
using K = ConstraintSpec::Kind;

namespace {

ConstraintSpec ref(std::initializer_list<std::string> segments) { return ConstraintSpec::ref(ElementPath{segments}); }

}  // namespace

TEST_CASE("tokenizer resolves literal escapes and skips comments") {
  auto [toks, diags] = tokenize_mapping("A.b[separator]: \"\\|\"  # trailing\n");
  CHECK(diags.empty());
  REQUIRE(toks.size() == 8);
  CHECK(toks[0].kind == DslTokenKind::identifier);
  CHECK(toks[1].kind == DslTokenKind::dot);
  CHECK(toks[3].kind == DslTokenKind::lbracket);
  CHECK(toks[6].kind == DslTokenKind::colon);
  CHECK(toks[7].kind == DslTokenKind::literal);
  CHECK(toks[7].text == "|");
  CHECK(toks[7].span.column == 17);
}

TEST_CASE("tokenizer reports bad input and keeps going") {
  auto [toks, diags] = tokenize_mapping("A: \"open\nB: $ C\n");
  CHECK(count_code(diags, "unterminated-literal") == 1);
  CHECK(count_code(diags, "illegal-character") == 1);
  CHECK(toks.back().text == "C");
}

TEST_CASE("unescape keeps unknown escapes") {
  CHECK(unescape_literal("\\[") == "[");
  CHECK(unescape_literal("\\\\") == "\\");
  CHECK(unescape_literal("\\\"") == "\"");
  CHECK(unescape_literal("[0-9]+") == "[0-9]+");
  CHECK(unescape_literal("a\\nb") == "a\\nb");
  CHECK(unescape_literal("\\d\\<") == "\\d<");
}

TEST_CASE("property-like definitions") {
  auto [doc, diags] = parse_mapping("Element.name[separator]: \".\"\nA[optional]: true\nA.b[maximum]: 3\n");
  CHECK(diags.empty());
  REQUIRE(doc.definitions.size() == 3);
  const auto& d = doc.definitions[0];
  CHECK(d.target.str() == "Element.name");
  CHECK(d.constraint_id == ConstraintKind::Separator);
  CHECK(*d.constraint == ConstraintSpec::literal("."));
  CHECK(*doc.definitions[1].constraint == ConstraintSpec::boolean_value(true));
  CHECK(*doc.definitions[2].constraint == ConstraintSpec::integer_value(3));
}

TEST_CASE("grammar-like definitions and operator structure") {
  auto [doc, diags] = parse_mapping("ConstraintDefinition: target (\"[\" constraintID \"]\")? (\":\" constraint)?\n");
  CHECK(diags.empty());
  REQUIRE(doc.definitions.size() == 1);
  const ConstraintSpec& c = *doc.definitions[0].constraint;
  REQUIRE(c.kind == K::Sequence);
  REQUIRE(c.children.size() == 3);
  CHECK(c.children[0] == ref({"target"}));
  CHECK(c.children[1].kind == K::Optional);
  CHECK(c.children[1].inner().kind == K::Parenthesized);
  CHECK(c.children[1].inner().inner().children[1] == ref({"constraintID"}));
}

TEST_CASE("precedence chains bind tighter than alternation") {
  auto [doc, diags] = parse_mapping("E: A < B | C < D\n");
  CHECK(diags.empty());
  const ConstraintSpec& c = *doc.definitions.at(0).constraint;
  REQUIRE(c.kind == K::Alternation);
  REQUIRE(c.children.size() == 2);
  CHECK(c.children[0].kind == K::Precedence);
  CHECK(c.children[1].kind == K::Precedence);
  auto seq = parse_mapping("E: a b < c d*\n").first.definitions.at(0).constraint;
  REQUIRE(seq->kind == K::Precedence);
  CHECK(seq->children[0].kind == K::Sequence);
  CHECK(seq->children[1].children[1].kind == K::Closure);
}

TEST_CASE("indented continuation lines belong to the previous definition") {
  auto [doc, diags] = parse_mapping("S[precedes]: A\n             B\nT: x\n");
  CHECK(diags.empty());
  REQUIRE(doc.definitions.size() == 2);
  const ConstraintSpec& c = *doc.definitions[0].constraint;
  REQUIRE(c.kind == K::Sequence);
  CHECK(c.children == std::vector<ConstraintSpec>{ref({"A"}), ref({"B"})});
}

TEST_CASE("a trailing operator continues the definition") {
  auto [doc, diags] = parse_mapping("E: A <\nB\n");
  CHECK(diags.empty());
  REQUIRE(doc.definitions.size() == 1);
  CHECK(doc.definitions[0].constraint->kind == K::Precedence);
}

TEST_CASE("missing colon: lenient repairs, strict rejects") {
  std::string text = "A.b[prefix] \"(\"\nC \"x\"\n";
  auto [lenient, ld] = parse_mapping(text, RepairMode::lenient);
  CHECK(count_code(ld, "missing-colon") == 2);
  CHECK_FALSE(has_errors(ld));
  CHECK(lenient.definitions.size() == 2);
  auto [strict, sd] = parse_mapping(text, RepairMode::strict);
  CHECK(has_errors(sd));
  CHECK(count_code(sd, "missing-colon") == 0);
}

TEST_CASE("unknown constraint ids are dropped with a warning") {
  auto [doc, diags] = parse_mapping("A[colour]: \"x\"\nB: c\n");
  CHECK(count_code(diags, "unknown-constraint-id") == 1);
  CHECK_FALSE(has_errors(diags));
  CHECK(doc.definitions.size() == 1);
}

TEST_CASE("syntax errors carry a location") {
  auto [doc, diags] = parse_mapping("A: (b\nC: d\n", RepairMode::strict, "bad.mcd");
  REQUIRE(has_errors(diags));
  CHECK(diags.front().location.file == "bad.mcd");
  CHECK(diags.front().location.line >= 1);
}

TEST_CASE("bundled mappings") {
  SUBCASE("the property-like mapping has 17 definitions and two repaired colons") {
    auto [doc, diags] = parse_mapping(support::read_fixture("property.mcd"));
    CHECK(doc.definitions.size() == 17);
    CHECK(count_code(diags, "missing-colon") == 2);
    CHECK(diags.size() == 2);
  }
  SUBCASE("grammar-like and mixed mappings parse without diagnostics") {
    for (const char* f : {"grammar.mcd", "mixed.mcd"}) {
      CAPTURE(f);
      auto [doc, diags] = parse_mapping(support::read_fixture(f), RepairMode::strict);
      CHECK(diags.empty());
      CHECK_FALSE(doc.definitions.empty());
    }
  }
  SUBCASE("the verbatim property-like mapping differs only in the Positive key") {
    auto fixed = support::fixture_mapping("property.mcd");
    auto verbatim = support::fixture_mapping("property_verbatim.mcd");
    REQUIRE(fixed.definitions.size() == verbatim.definitions.size());
    std::vector<std::size_t> differing;
    for (std::size_t i = 0; i < fixed.definitions.size(); ++i)
      if (!(fixed.definitions[i] == verbatim.definitions[i])) differing.push_back(i);
    REQUIRE(differing.size() == 1);
    const auto& a = fixed.definitions[differing[0]];
    const auto& b = verbatim.definitions[differing[0]];
    CHECK(a.target.str() == "PositiveClauseSpecification");
    CHECK(a.constraint_id == ConstraintKind::Suffix);
    CHECK(b.constraint_id == ConstraintKind::Prefix);
    CHECK(a.constraint == b.constraint);
  }
}

TEST_CASE("rendered mappings reparse to the same document") {
  for (const char* f : {"property.mcd", "grammar.mcd", "mixed.mcd", "arith.mcd"}) {
    CAPTURE(f);
    auto doc = support::fixture_mapping(f);
    std::string text = render_mapping(doc);
    auto [again, diags] = parse_mapping(text, RepairMode::strict);
    CHECK(diags.empty());
    CHECK(again == doc);
    CHECK(render_mapping(again) == text);
  }
}

TEST_CASE("rendering adds parentheses only where needed") {
  auto doc = parse_mapping("E: (a b)* (c | d) e\n").first;
  CHECK(render_mapping(doc) == "E: (a b)* (c | d) e\n");
  auto quoted = parse_mapping("E: \"\\\"\" x\n").first;
  CHECK(parse_mapping(render_mapping(quoted)).first == quoted);
}

namespace {

std::string random_expression(std::mt19937& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  if (depth == 0 || pick(4) == 0) {
    static const char* atoms[] = {"a", "b.c", "\"x\"", "\"\\|\"", "true", "3"};
    std::string atom = atoms[pick(6)];
    static const char* postfix[] = {"", "", "*", "?", "+"};
    return atom + postfix[pick(5)];
  }
  std::string left = random_expression(rng, depth - 1);
  std::string right = random_expression(rng, depth - 1);
  switch (pick(5)) {
    case 0: return left + " | " + right;
    case 1: return left + " < " + right;
    case 2: return "(" + left + ")" + (pick(2) ? "*" : "");
    default: return left + " " + right;
  }
}

void check_strata(const ConstraintSpec& c) {
  for (const auto& child : c.children) {
    switch (c.kind) {
      case K::Precedence:
        CHECK(child.kind != K::Alternation);
        CHECK(child.kind != K::Precedence);
        break;
      case K::Sequence:
        CHECK(child.kind != K::Alternation);
        CHECK(child.kind != K::Precedence);
        CHECK(child.kind != K::Sequence);
        break;
      case K::Alternation:
        CHECK(child.kind != K::Alternation);
        break;
      case K::Closure:
      case K::Optional:
      case K::Positive:
        CHECK((child.kind == K::ElementRef || child.kind == K::PatternLiteral || child.kind == K::Parenthesized ||
               child.kind == K::BooleanValue || child.kind == K::IntegerValue));
        break;
      default:
        break;
    }
    check_strata(child);
  }
}

}  // namespace

TEST_CASE("operator strata hold over a generated corpus") {
  std::mt19937 rng(4242);
  for (int i = 0; i < 500; ++i) {
    std::string text = "E: " + random_expression(rng, 4) + "\n";
    CAPTURE(text);
    auto [doc, diags] = parse_mapping(text, RepairMode::strict);
    REQUIRE(diags.empty());
    REQUIRE(doc.definitions.size() == 1);
    const ConstraintSpec& c = *doc.definitions[0].constraint;
    check_strata(c);
    auto again = parse_mapping("E: " + render_spec(c) + "\n", RepairMode::strict).first;
    CHECK(again == doc);
  }
}
