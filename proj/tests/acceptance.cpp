// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arith_oracle.hpp"
#include "generators.hpp"
#include "mcc/selfhost.hpp"
#include "support.hpp"

using namespace mcc;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (passed) detail = what;
    passed = false;
  }
};

const Model& meta() {
  static const Model m = support::fixture_model("metamodel.asm");
  return m;
}

SourceText fixture_source(const std::string& name) { return {name, support::read_fixture(name)}; }

CanonicalConstraintSet bootstrap_set(const std::string& fixture, Outcome& o) {
  Diagnostics d;
  auto set = lowered_set(support::fixture_mapping(fixture), meta(), d);
  o.require(!has_errors(d), fixture + ": " + render_text(d));
  return set;
}

Outcome triple_equivalence() {
  Outcome o;
  auto a = to_json(bootstrap_set("property.mcd", o)).dump();
  auto b = to_json(bootstrap_set("grammar.mcd", o)).dump();
  auto c = to_json(bootstrap_set("mixed.mcd", o)).dump();
  o.require(a == b, "property-like and grammar-like differ");
  o.require(b == c, "grammar-like and mixed differ");
  o.require(a == c, "property-like and mixed differ");
  return o;
}

Outcome selfhosting_fixpoint() {
  Outcome o;
  auto built = build_grammar(meta(), {fixture_source("grammar.mcd")});
  o.require(built.grammar.has_value(), "no grammar from the grammar-like mapping");
  if (!built.grammar) return o;
  for (const char* f : {"property.mcd", "grammar.mcd", "mixed.mcd"}) {
    Diagnostics d;
    auto doc = parse_mapping_selfhosted(meta(), *built.grammar, fixture_source(f), d);
    o.require(doc.has_value(), std::string(f) + " does not parse: " + render_text(d));
    if (!doc) continue;
    Diagnostics ld;
    auto hosted = lowered_set(*doc, meta(), ld);
    auto boot = bootstrap_set(f, o);
    auto diff = describe_differences(hosted, boot);
    o.require(diff.empty() && to_json(hosted) == to_json(boot),
              std::string(f) + ": " + (diff.empty() ? std::string("json differs") : diff.front()));
  }
  return o;
}

Outcome precedes_closure() {
  Outcome o;
  const std::set<ElementPair> expected{{"SequenceSpecification", "AlternationSpecification"},
                                       {"SequenceSpecification", "PrecedenceSpecification"},
                                       {"PrecedenceSpecification", "AlternationSpecification"}};
  auto property = bootstrap_set("property.mcd", o).precedes;
  auto grammar_like = bootstrap_set("grammar.mcd", o).precedes;
  o.require(property == expected, "property-like pairs differ from the expected set");
  o.require(property == transitive_closure(grammar_like),
            "property-like pairs differ from the closure of the grammar-like chain");
  return o;
}

Outcome consistency_checking() {
  Outcome o;
  auto clean = build_grammar(meta(), {fixture_source("grammar.mcd")});
  o.require(count_code(clean.diagnostics, "multiplicity-conflict") == 0, "conflicts against the meta-model");
  o.require(clean.grammar.has_value(), "no grammar");
  for (const char* member : {"constraintID", "constraint"}) {
    Model flipped = meta();
    for (auto& e : flipped.elements)
      if (e.name == "ConstraintDefinition")
        for (auto& m : e.members)
          if (m.name == member) m.min = 1;
    auto built = build_grammar(flipped, {fixture_source("grammar.mcd")});
    std::size_t conflicts = count_code(built.diagnostics, "multiplicity-conflict");
    o.require(conflicts == 1 && count(built.diagnostics, Severity::error) == 1,
              std::string(member) + " mandatory: " + std::to_string(conflicts) + " conflicts");
  }
  return o;
}

Outcome ignore_and_report() {
  Outcome o;
  std::string base = support::read_fixture("grammar.mcd");
  auto before = check_mappings(meta(), {{"grammar.mcd", base}});
  auto after = check_mappings(meta(), {{"grammar.mcd", base + "Element.nonexistent[separator]: \",\"\n"}});
  o.require(count(after.diagnostics, Severity::warning) == 1, "expected exactly one warning");
  o.require(count(after.diagnostics, Severity::error) == 0, "expected no errors");
  o.require(after.set == before.set && to_json(after.set) == to_json(before.set), "canonical set changed");
  return o;
}

Outcome disambiguation_oracle() {
  Outcome o;
  Grammar g = support::arith_grammar();
  const std::size_t catalan[] = {1, 1, 2, 5, 14};
  for (const auto& c : oracle::all_cases(5)) {
    auto verdict = oracle::judge(c.operands, c.ops);
    o.require(verdict.survivors.size() == 1, c.input + ": oracle leaves " + std::to_string(verdict.survivors.size()));
    ParseForest forest = support::forest_of(g, c.input);
    std::uint64_t trees = count_trees(forest);
    o.require(trees == verdict.total && trees == catalan[c.operands.size() - 1],
              c.input + ": forest has " + std::to_string(trees) + " trees");
    auto [tree, diags] = disambiguate(forest, g);
    o.require(tree && diags.empty(), c.input + ": " + render_text(diags));
    if (!tree || verdict.survivors.empty()) continue;
    std::string chosen = render_tree(*tree, g, forest);
    o.require(chosen == verdict.survivors.front(), c.input + ": chose " + chosen);
  }
  return o;
}

Outcome reference_resolution() {
  Outcome o;
  Model refs = support::fixture_model("refs.asm");
  Grammar g = support::grammar_for(refs);
  auto ok = parse_input(refs, g, fixture_source("refs_ok.txt"));
  o.require(ok.graph && ok.graph->nodes.size() == 3, "expected 3 nodes");
  o.require(ok.graph && ok.graph->edges.size() == 1, "expected one cross edge");
  o.require(!has_errors(ok.diagnostics), render_text(ok.diagnostics));
  auto dup = parse_input(refs, g, fixture_source("refs_dup.txt"));
  o.require(count(dup.diagnostics, Severity::error) == 1 && count_code(dup.diagnostics, "duplicate-id") == 1,
            "duplicate id: " + render_text(dup.diagnostics));
  auto unknown = parse_input(refs, g, fixture_source("refs_unknown.txt"));
  o.require(count(unknown.diagnostics, Severity::error) == 1 &&
                count_code(unknown.diagnostics, "unresolved-reference") == 1,
            "unknown id: " + render_text(unknown.diagnostics));
  return o;
}

Outcome round_trips() {
  Outcome o;
  for (const char* f : {"metamodel.asm", "arith.asm", "refs.asm"}) {
    Model m = support::fixture_model(f);
    o.require(parse_model(render_model(m)) == m, std::string(f) + " does not round-trip");
  }
  for (const char* f : {"property.mcd", "grammar.mcd", "mixed.mcd", "arith.mcd"}) {
    MappingDocument doc = support::fixture_mapping(f);
    auto [again, diags] = parse_mapping(render_mapping(doc), RepairMode::strict);
    o.require(again == doc && diags.empty(), std::string(f) + " does not round-trip");
  }
  std::mt19937 rng(1);
  Model arith = support::fixture_model("arith.asm");
  for (int i = 0; i < 100; ++i) {
    Model m = generators::random_model(rng);
    o.require(parse_model(render_model(m)) == m, "random model " + std::to_string(i) + " does not round-trip");
    const Model& target = i % 2 ? meta() : arith;
    std::string text = generators::random_mapping(rng, target);
    MappingDocument doc = parse_mapping(text).first;
    o.require(parse_mapping(render_mapping(doc), RepairMode::strict).first == doc,
              "random mapping " + std::to_string(i) + " does not round-trip");
    auto [set, diags] = lower(doc, target);
    auto once = canonicalize(set, target);
    o.require(to_json(canonicalize(once, target)) == to_json(once),
              "canonicalize is not idempotent on:\n" + text);
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"self-hosting triple equivalence", triple_equivalence},
      {"self-hosting fixpoint", selfhosting_fixpoint},
      {"precedes closure", precedes_closure},
      {"consistency checking", consistency_checking},
      {"ignore-and-report", ignore_and_report},
      {"disambiguation oracle", disambiguation_oracle},
      {"reference resolution", reference_resolution},
      {"round-trip invariants", round_trips},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    if (ms > 5000) o.require(false, "took " + std::to_string(ms) + " ms");
    std::cout << (o.passed ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].name << " (" << ms << " ms)";
    if (!o.passed) std::cout << ": " << o.detail;
    std::cout << "\n";
    failed += o.passed ? 0 : 1;
  }
  return failed;
}
