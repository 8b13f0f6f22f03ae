#include "mcc/selfhost.hpp"

#include <filesystem>
#include <map>
#include <sstream>

namespace mcc {

namespace {

class GraphReader {
 public:
  GraphReader(const InstanceGraph& g, Diagnostics& diags) : g_(g), diags_(diags) {}

  MappingDocument document() {
    MappingDocument doc;
    for (std::size_t root : g_.roots) {
      const Instance& n = g_.nodes[root];
      if (n.element == "Mapping") {
        if (const auto* defs = n.slot("definitions"))
          for (const auto& v : defs->values)
            if (auto d = definition(v)) doc.definitions.push_back(std::move(*d));
      } else if (n.element == "ConstraintDefinition") {
        if (auto d = definition(NodeRef{root})) doc.definitions.push_back(std::move(*d));
      } else {
        fail("expected a Mapping, found " + n.element, n.span);
      }
    }
    return doc;
  }

 private:
  const InstanceGraph& g_;
  Diagnostics& diags_;

  void fail(const std::string& message, const SourceSpan& where) {
    diags_.push_back(make_error("selfhost", message, where));
  }

  const Instance* node(const InstanceValue& v) const {
    const auto* ref = std::get_if<NodeRef>(&v);
    return ref ? &g_.nodes[ref->id] : nullptr;
  }

  static const InstanceValue* single(const Instance& n, const char* member) {
    const auto* s = n.slot(member);
    return s && !s->values.empty() ? &s->values.front() : nullptr;
  }

  std::optional<ElementPath> path(const Instance& n) {
    ElementPath p;
    if (const auto* names = n.slot("name"))
      for (const auto& v : names->values)
        if (const auto* t = std::get_if<TokenValue>(&v)) p.segments.push_back(t->text);
    if (p.segments.empty()) {
      fail("element without a name", n.span);
      return std::nullopt;
    }
    return p;
  }

  std::optional<ConstraintDefinition> definition(const InstanceValue& v) {
    const Instance* n = node(v);
    if (!n || n->element != "ConstraintDefinition") {
      fail("expected a ConstraintDefinition", n ? n->span : SourceSpan{});
      return std::nullopt;
    }
    ConstraintDefinition def;
    def.span = n->span;
    const InstanceValue* target = single(*n, "target");
    const Instance* element = target ? node(*target) : nullptr;
    if (!element) {
      fail("definition without a target", n->span);
      return std::nullopt;
    }
    auto p = path(*element);
    if (!p) return std::nullopt;
    def.target = std::move(*p);
    if (const InstanceValue* id = single(*n, "constraintID")) {
      const auto* t = std::get_if<TokenValue>(id);
      auto kind = t ? kind_from_keyword(t->text) : std::nullopt;
      if (!kind) {
        diags_.push_back(make_warning("unknown-constraint-id",
                                      "unknown constraint '" + (t ? t->text : std::string("?")) + "'; definition dropped",
                                      n->span));
        return std::nullopt;
      }
      def.constraint_id = kind;
    }
    if (const InstanceValue* c = single(*n, "constraint")) {
      auto spec = specification(*c);
      if (!spec) return std::nullopt;
      def.constraint = std::move(*spec);
    }
    if (!def.constraint_id && !def.constraint) {
      fail("definition of " + def.target.str() + " has neither a constraint id nor a constraint", n->span);
      return std::nullopt;
    }
    return def;
  }

  std::optional<ConstraintSpec> specification(const InstanceValue& v) {
    using K = ConstraintSpec::Kind;
    if (const auto* t = std::get_if<TokenValue>(&v)) {
      if (t->token == "PatternSpecification") {
        std::string_view raw = t->text;
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') raw = raw.substr(1, raw.size() - 2);
        return ConstraintSpec::literal(unescape_literal(raw));
      }
      if (t->token == "Boolean") return ConstraintSpec::boolean_value(t->text == "true");
      if (t->token == "Integer") {
        try {
          return ConstraintSpec::integer_value(std::stoll(t->text));
        } catch (const std::out_of_range&) {
          fail("integer out of range: " + t->text, {});
          return std::nullopt;
        }
      }
      fail("unexpected token " + t->token + " in a constraint", {});
      return std::nullopt;
    }
    const Instance* n = node(v);
    if (!n) {
      fail("unexpected reference in a constraint", {});
      return std::nullopt;
    }
    static const std::map<std::string, K> kNary{{"SequenceSpecification", K::Sequence},
                                                {"AlternationSpecification", K::Alternation},
                                                {"PrecedenceSpecification", K::Precedence}};
    static const std::map<std::string, K> kUnary{{"ClausureSpecification", K::Closure},
                                                 {"OptionalSpecification", K::Optional},
                                                 {"PositiveClauseSpecification", K::Positive},
                                                 {"ParenthesizedSpecification", K::Parenthesized}};
    std::optional<ConstraintSpec> out;
    if (auto it = kNary.find(n->element); it != kNary.end()) {
      std::vector<ConstraintSpec> items;
      if (const auto* s = n->slot("constraints"))
        for (const auto& item : s->values) {
          auto spec = specification(item);
          if (!spec) return std::nullopt;
          items.push_back(std::move(*spec));
        }
      out = ConstraintSpec::nary(it->second, std::move(items));
    } else if (auto it = kUnary.find(n->element); it != kUnary.end()) {
      const InstanceValue* inner = single(*n, "constraint");
      auto spec = inner ? specification(*inner) : std::nullopt;
      if (!spec) return std::nullopt;
      out = ConstraintSpec::unary(it->second, std::move(*spec));
    } else if (n->element == "Element") {
      auto p = path(*n);
      if (!p) return std::nullopt;
      out = ConstraintSpec::ref(std::move(*p));
    } else {
      fail("unexpected " + n->element + " in a constraint", n->span);
      return std::nullopt;
    }
    out->span = n->span;
    return out;
  }
};

}  // namespace

MappingDocument mapping_from_graph(const InstanceGraph& graph, Diagnostics& diags) {
  return GraphReader(graph, diags).document();
}

std::optional<MappingDocument> parse_mapping_selfhosted(const Model& meta_model, const Grammar& meta_grammar,
                                                        const SourceText& source, Diagnostics& diags, bool strict) {
  SourceText text = source;
  if (!strict) {
    auto [repaired, repair_diags] = repair_mapping_text(source.text, source.name);
    append(diags, repair_diags);
    text.text = std::move(repaired);
  }
  ParseOutcome parsed = parse_input(meta_model, meta_grammar, text);
  append(diags, parsed.diagnostics);
  if (!parsed.graph || has_errors(parsed.diagnostics)) return std::nullopt;
  Diagnostics read_diags;
  MappingDocument doc = mapping_from_graph(*parsed.graph, read_diags);
  bool ok = !has_errors(read_diags);
  append(diags, read_diags);
  if (!ok) return std::nullopt;
  doc.source_name = source.name;
  return doc;
}

bool SelftestReport::passed() const { return !steps.empty() && first_failure() == nullptr; }

const SelftestStep* SelftestReport::first_failure() const {
  for (const auto& s : steps)
    if (!s.passed) return &s;
  return nullptr;
}

std::string SelftestReport::render() const {
  std::ostringstream out;
  for (const auto& s : steps) {
    out << (s.passed ? "PASS " : "FAIL ") << s.name << "\n";
    if (!s.detail.empty()) {
      std::istringstream lines(s.detail);
      std::string line;
      while (std::getline(lines, line)) out << "     " << line << "\n";
    }
  }
  return out.str();
}

namespace {

std::string error_text(const Diagnostics& diags) {
  Diagnostics errors;
  for (const auto& d : diags)
    if (d.severity == Severity::error) errors.push_back(d);
  return render_text(errors);
}

}  // namespace

SelftestReport run_selftest(const std::string& fixture_dir) {
  SelftestReport report;
  auto step = [&](std::string name, bool passed, std::string detail = {}) {
    report.steps.push_back(SelftestStep{std::move(name), passed, passed ? std::string() : std::move(detail)});
    return passed;
  };
  namespace fs = std::filesystem;
  auto path = [&](const char* file) { return (fs::path(fixture_dir) / file).string(); };

  auto meta_source = read_source(path("metamodel.asm"));
  if (!step("read meta-model", meta_source.has_value(), "cannot open " + path("metamodel.asm"))) return report;
  Diagnostics diags;
  auto meta = load_model(*meta_source, diags);
  if (!step("load meta-model", meta.has_value(), error_text(diags))) return report;

  const char* names[] = {"property.mcd", "grammar.mcd", "mixed.mcd"};
  std::vector<SourceText> sources;
  for (const char* n : names) {
    auto s = read_source(path(n));
    if (!step(std::string("read ") + n, s.has_value(), "cannot open " + path(n))) return report;
    s->name = n;
    sources.push_back(std::move(*s));
  }

  // bootstrap parser
  std::vector<MappingDocument> docs;
  for (const auto& s : sources) {
    auto [doc, d] = parse_mapping(s.text, RepairMode::lenient, s.name);
    if (!step("bootstrap parse " + s.name, !has_errors(d), error_text(d))) return report;
    docs.push_back(std::move(doc));
  }

  // lowering, consistency and pairwise equivalence
  std::vector<CanonicalConstraintSet> sets;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Diagnostics d;
    CanonicalConstraintSet lowered = lowered_set(docs[i], *meta, d);
    auto [merged, merge_diags] = merge(defaults_from_model(*meta), {lowered});
    append(d, merge_diags);
    append(d, check_consistency(canonicalize(merged, *meta), *meta));
    if (!step("consistency " + sources[i].name, !has_errors(d), error_text(d))) return report;
    sets.push_back(std::move(lowered));
  }
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      auto diff = describe_differences(sets[i], sets[j]);
      std::string detail;
      for (const auto& line : diff) detail += line + "\n";
      if (!step("equivalence " + sources[i].name + " = " + sources[j].name, diff.empty(), detail)) return report;
    }

  // generated parser
  Diagnostics gdiags;
  auto grammar_set = lowered_set(docs[1], *meta, gdiags);
  auto [merged, merge_diags] = merge(defaults_from_model(*meta), {grammar_set});
  append(gdiags, merge_diags);
  auto [grammar, grammar_diags] = derive_grammar(*meta, canonicalize(merged, *meta));
  append(gdiags, grammar_diags);
  if (!step("generate parser from " + sources[1].name, !has_errors(gdiags), error_text(gdiags))) return report;

  for (std::size_t i = 0; i < sources.size(); ++i) {
    Diagnostics d;
    auto doc = parse_mapping_selfhosted(*meta, grammar, sources[i], d);
    if (!step("self-hosted parse " + sources[i].name, doc.has_value(), error_text(d))) return report;
    std::string detail;
    if (!(*doc == docs[i])) {
      detail = "self-hosted:\n" + render_mapping(*doc) + "bootstrap:\n" + render_mapping(docs[i]);
    }
    if (!step("same document " + sources[i].name, detail.empty(), detail)) return report;
    Diagnostics ld;
    auto set = lowered_set(*doc, *meta, ld);
    auto diff = describe_differences(set, sets[i]);
    std::string diff_text;
    for (const auto& line : diff) diff_text += line + "\n";
    if (!step("same constraints " + sources[i].name, diff.empty(), diff_text)) return report;
  }
  return report;
}

}  // namespace mcc
