#include <doctest.h>

#include <random>

#include "mcc/constraints.hpp"
#include "generators.hpp"
#include "support.hpp"

using namespace mcc;

namespace {

const Model& meta() {
  static const Model m = support::fixture_model("metamodel.asm");
  return m;
}

CanonicalConstraintSet lowered(const std::string& fixture) {
  Diagnostics d;
  auto set = lowered_set(support::fixture_mapping(fixture), meta(), d);
  REQUIRE_FALSE(has_errors(d));
  return set;
}

std::pair<CanonicalConstraintSet, Diagnostics> lower_text(const std::string& text, const Model& model) {
  auto [doc, parse_diags] = parse_mapping(text);
  auto [set, diags] = lower(doc, model);
  append(diags, parse_diags);
  return {set, diags};
}

Model with_member_bounds(const std::string& element, const std::string& member, std::size_t min) {
  Model m = meta();
  for (auto& e : m.elements)
    if (e.name == element)
      for (auto& md : e.members)
        if (md.name == member) md.min = min;
  return m;
}

}  // namespace

TEST_CASE("the three mapping styles lower to the same set") {
  auto a = lowered("property.mcd");
  auto b = lowered("grammar.mcd");
  auto c = lowered("mixed.mcd");
  CHECK(to_json(a) == to_json(b));
  CHECK(to_json(b) == to_json(c));
  CHECK(describe_differences(a, c).empty());
  CHECK(equivalent(a, b));
}

TEST_CASE("the verbatim property-like mapping differs in exactly one key") {
  Diagnostics d;
  auto verbatim = lowered_set(support::fixture_mapping("property_verbatim.mcd"), meta(), d);
  auto diff = describe_differences(verbatim, lowered("grammar.mcd"));
  REQUIRE(diff.size() == 2);
  CHECK(diff[0].find("PositiveClauseSpecification") != std::string::npos);
}

TEST_CASE("lowered entries match a hand extraction") {
  auto set = lowered("grammar.mcd");
  CHECK(*set.find("ConstraintDefinition", "constraintID", ConstraintKind::Prefix) == ConstraintValue(Literals{{"["}}));
  CHECK(*set.find("ConstraintDefinition", "constraintID", ConstraintKind::Suffix) == ConstraintValue(Literals{{"]"}}));
  CHECK(*set.find("ConstraintDefinition", "constraint", ConstraintKind::Prefix) == ConstraintValue(Literals{{":"}}));
  CHECK(*set.find("Element", "name", ConstraintKind::Separator) == ConstraintValue(Literals{{"."}}));
  CHECK(*set.find("AlternationSpecification", "constraints", ConstraintKind::Separator) ==
        ConstraintValue(Literals{{"|"}}));
  CHECK(*set.find("PrecedenceSpecification", "constraints", ConstraintKind::Separator) ==
        ConstraintValue(Literals{{"<"}}));
  CHECK(*set.find("ClausureSpecification", ConstraintKind::Suffix) == ConstraintValue(Literals{{"*"}}));
  CHECK(*set.find("ParenthesizedSpecification", ConstraintKind::Prefix) == ConstraintValue(Literals{{"("}}));
  CHECK(*set.find("ParenthesizedSpecification", ConstraintKind::Suffix) == ConstraintValue(Literals{{")"}}));
  CHECK(*set.find("Identifier", ConstraintKind::Pattern) == ConstraintValue(PatternText{"[a-zA-Z][a-zA-Z0-9_]*"}));
  CHECK(*set.find("Boolean", ConstraintKind::Pattern) == ConstraintValue(PatternText{"true|false"}));
  CHECK(set.find("SequenceSpecification", "constraints", ConstraintKind::Separator) == nullptr);
}

TEST_CASE("precedes is closed transitively") {
  const std::set<ElementPair> expected{{"SequenceSpecification", "AlternationSpecification"},
                                       {"SequenceSpecification", "PrecedenceSpecification"},
                                       {"PrecedenceSpecification", "AlternationSpecification"}};
  CHECK(lowered("property.mcd").precedes == expected);
  CHECK(lowered("grammar.mcd").precedes == expected);
  CHECK(transitive_closure({{"a", "b"}, {"b", "c"}, {"c", "d"}}).size() == 6);
  CHECK(find_cycle({{"a", "b"}, {"b", "c"}}).empty());
  CHECK(find_cycle({{"a", "b"}, {"b", "a"}}).size() >= 2);
}

TEST_CASE("merge overrides key by key and rejects cycles") {
  CanonicalConstraintSet base;
  base.entries[{"A", "", ConstraintKind::Prefix}] = Literals{{"("}};
  base.entries[{"A", "", ConstraintKind::Suffix}] = Literals{{")"}};
  base.precedes = {{"X", "Y"}};
  CanonicalConstraintSet over;
  over.entries[{"A", "", ConstraintKind::Prefix}] = Literals{{"["}};
  over.precedes = {{"Y", "Z"}};
  auto [merged, diags] = merge(base, {over});
  CHECK(diags.empty());
  CHECK(*merged.find("A", ConstraintKind::Prefix) == ConstraintValue(Literals{{"["}}));
  CHECK(*merged.find("A", ConstraintKind::Suffix) == ConstraintValue(Literals{{")"}}));
  CHECK(merged.precedes.count({"X", "Z"}) == 1);

  CanonicalConstraintSet back;
  back.precedes = {{"Z", "X"}};
  auto [cyclic, cdiags] = merge(merged, {back});
  CHECK(count_code(cdiags, "precedes-cycle") == 1);
}

TEST_CASE("optionality markers agree with the meta-model") {
  auto outcome = check_mappings(meta(), {{"grammar.mcd", support::read_fixture("grammar.mcd")}});
  CHECK(count_code(outcome.diagnostics, "multiplicity-conflict") == 0);
  CHECK_FALSE(has_errors(outcome.diagnostics));
  for (const char* member : {"constraintID", "constraint"}) {
    CAPTURE(member);
    Model flipped = with_member_bounds("ConstraintDefinition", member, 1);
    auto bad = check_mappings(flipped, {{"grammar.mcd", support::read_fixture("grammar.mcd")}});
    CHECK(count_code(bad.diagnostics, "multiplicity-conflict") == 1);
    CHECK(count(bad.diagnostics, Severity::error) == 1);
  }
}

TEST_CASE("constraints on unknown members are reported and ignored") {
  auto [base, base_diags] = lower(support::fixture_mapping("grammar.mcd"), meta());
  auto doc = support::fixture_mapping("grammar.mcd");
  auto extra = parse_mapping("Element.nonexistent[separator]: \",\"\n").first;
  doc.definitions.push_back(extra.definitions.at(0));
  auto [set, diags] = lower(doc, meta());
  CHECK(count(diags, Severity::warning) == count(base_diags, Severity::warning) + 1);
  CHECK(count_code(diags, "unknown-target") == 1);
  CHECK_FALSE(has_errors(diags));
  CHECK(set == base);
}

TEST_CASE("lowering diagnostics") {
  Model arith = support::fixture_model("arith.asm");
  SUBCASE("duplicate constraint keeps the last") {
    auto [set, d] = lower_text("Add[prefix]: \"a\"\nAdd[prefix]: \"b\"\n", arith);
    CHECK(count_code(d, "duplicate-constraint") == 1);
    CHECK(*set.find("Add", ConstraintKind::Prefix) == ConstraintValue(Literals{{"b"}}));
  }
  SUBCASE("nested paths") {
    auto [set, d] = lower_text("Add.left.x[prefix]: \"a\"\n", arith);
    CHECK(count_code(d, "nested-path") == 1);
    CHECK(set.empty());
  }
  SUBCASE("precedes on a member") {
    auto [set, d] = lower_text("Add.left[precedes]: Mul\n", arith);
    CHECK(count_code(d, "precedes-member") == 1);
  }
  SUBCASE("not a variant") {
    auto [set, d] = lower_text("Expr: Add < Expr\n", arith);
    CHECK(count_code(d, "not-a-variant") == 1);
  }
  SUBCASE("constraint value shape") {
    auto [set, d] = lower_text("Add[associativity]: 3\n", arith);
    CHECK(count_code(d, "constraint-value") == 1);
  }
}

TEST_CASE("priorities become precedes pairs") {
  Model m = parse_model(
      "language P\nelement E = A | B | C\nelement A @Priority(1) { x: T }\nelement B @Priority(2) { x: T }\n"
      "element C @Priority(2) { x: T }\ntoken T @Pattern(\"t\")\n");
  auto set = canonicalize(defaults_from_model(m), m);
  CHECK(set.precedes == std::set<ElementPair>{{"A", "B"}, {"A", "C"}});
  CHECK(set.find("A", ConstraintKind::Priority) != nullptr);
}

TEST_CASE("canonicalize drops entries that restate the model") {
  Model refs = support::fixture_model("refs.asm");
  auto [set, d] = lower_text("Decl.name[id]: true\nProgram.items[minimum]: 0\nDecl[prefix]: \"def\"\n", refs);
  auto canon = canonicalize(set, refs);
  CHECK(canon.find("Decl", "name", ConstraintKind::ID) == nullptr);
  CHECK(canon.find("Program", "items", ConstraintKind::Minimum) == nullptr);
  CHECK(canon.find("Decl", ConstraintKind::Prefix) != nullptr);
}

TEST_CASE("effective members and order") {
  Model arith = support::fixture_model("arith.asm");
  auto [set, d] = lower_text("Add: right \"+\" left\n", arith);
  const ElementDef& add = *arith.find("Add");
  auto order = effective_order(set, add);
  REQUIRE(order.size() == 2);
  CHECK(order[0]->name == "right");
  auto eff = effective_member(set, add, add.members[0]);
  CHECK(eff.min == 1);
  CHECK(eff.max == 1);
}

TEST_CASE("json form is stable and sorted") {
  auto j = to_json(lowered("grammar.mcd"));
  CHECK(j.dump() == to_json(lowered("mixed.mcd")).dump());
  REQUIRE(j.contains("precedes"));
  CHECK(j["precedes"].size() == 3);
}

TEST_CASE("canonicalize is idempotent on random mappings") {
  std::mt19937 rng(7);
  int lowered_cleanly = 0;
  for (int i = 0; i < 100; ++i) {
    const Model& model = i % 2 ? meta() : support::fixture_model("arith.asm");
    std::string text = generators::random_mapping(rng, model);
    CAPTURE(text);
    auto [set, d] = lower_text(text, model);
    auto once = canonicalize(set, model);
    auto twice = canonicalize(once, model);
    CHECK(to_json(once) == to_json(twice));
    if (!has_errors(d)) ++lowered_cleanly;
  }
  CHECK(lowered_cleanly > 50);
}

namespace {

std::vector<CanonicalConstraintSet> random_sets(std::mt19937& rng, std::size_t n) {
  std::vector<CanonicalConstraintSet> out;
  while (out.size() < n) {
    auto [set, diags] = lower_text(generators::random_mapping(rng, meta()), meta());
    if (!has_errors(diags)) out.push_back(canonicalize(set, meta()));
  }
  return out;
}

}  // namespace

TEST_CASE("equivalent is an equivalence relation") {
  std::mt19937 rng(7);
  auto sets = random_sets(rng, 12);
  sets.push_back(sets[3]);
  sets.push_back(lowered("property.mcd"));
  sets.push_back(lowered("grammar.mcd"));
  for (const auto& a : sets) {
    CHECK(equivalent(a, a));
    for (const auto& b : sets) {
      CHECK(equivalent(a, b) == equivalent(b, a));
      CHECK(equivalent(a, b) == describe_differences(a, b).empty());
      for (const auto& c : sets)
        if (equivalent(a, b) && equivalent(b, c)) CHECK(equivalent(a, c));
    }
  }
}

TEST_CASE("merging is associative over the override list") {
  std::mt19937 rng(11);
  int compared = 0;
  for (int i = 0; i < 120; ++i) {
    auto s = random_sets(rng, 3);
    auto base = defaults_from_model(meta());
    auto [all, d1] = merge(base, {s[0], s[1], s[2]});
    auto [first, d2] = merge(base, {s[0]});
    auto [stepwise, d3] = merge(first, {s[1], s[2]});
    auto [tail, d4] = merge(s[1], {s[2]});
    auto [grouped, d5] = merge(base, {s[0], tail});
    if (has_errors(d1)) continue;
    ++compared;
    CHECK(all == stepwise);
    CHECK(all == grouped);
  }
  CHECK(compared >= 20);
}

TEST_CASE("lowering is deterministic") {
  std::mt19937 rng(13);
  for (int i = 0; i < 50; ++i) {
    std::string text = generators::random_mapping(rng, meta());
    auto a = lower_text(text, meta());
    auto b = lower_text(text, meta());
    CHECK(to_json(a.first).dump() == to_json(b.first).dump());
    CHECK(render_text(a.second) == render_text(b.second));
  }
}
