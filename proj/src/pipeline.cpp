#include "mcc/pipeline.hpp"

#include <fstream>
#include <sstream>

namespace mcc {

std::optional<SourceText> read_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream text;
  text << in.rdbuf();
  return SourceText{path, text.str()};
}

std::optional<Model> load_model(const SourceText& source, Diagnostics& diags) {
  try {
    Model model = parse_model(source.text, source.name);
    auto problems = validate_model(model);
    bool ok = !has_errors(problems);
    append(diags, problems);
    if (!ok) return std::nullopt;
    return model;
  } catch (const ParseError& e) {
    diags.push_back(make_error("model-syntax", e.what(), e.where()));
    return std::nullopt;
  }
}

CanonicalConstraintSet lowered_set(const MappingDocument& doc, const Model& model, Diagnostics& diags) {
  auto [set, lower_diags] = lower(doc, model);
  append(diags, lower_diags);
  auto [merged, merge_diags] = merge({}, {set});
  append(diags, merge_diags);
  return canonicalize(merged, model);
}

CheckOutcome check_mappings(const Model& model, const std::vector<SourceText>& mappings, RepairMode mode) {
  CheckOutcome out;
  std::vector<CanonicalConstraintSet> sets;
  for (const auto& m : mappings) {
    auto [doc, parse_diags] = parse_mapping(m.text, mode, m.name);
    append(out.diagnostics, parse_diags);
    auto [set, lower_diags] = lower(doc, model);
    append(out.diagnostics, lower_diags);
    sets.push_back(std::move(set));
    out.documents.push_back(std::move(doc));
  }
  auto [merged, merge_diags] = merge(defaults_from_model(model), sets);
  append(out.diagnostics, merge_diags);
  out.set = canonicalize(merged, model);
  append(out.diagnostics, check_consistency(out.set, model));
  return out;
}

GrammarOutcome build_grammar(const Model& model, const std::vector<SourceText>& mappings, RepairMode mode,
                             std::optional<std::string> start) {
  GrammarOutcome out;
  CheckOutcome checked = check_mappings(model, mappings, mode);
  out.set = std::move(checked.set);
  out.diagnostics = std::move(checked.diagnostics);
  if (has_errors(out.diagnostics)) return out;
  auto [grammar, diags] = derive_grammar(model, out.set, std::move(start));
  append(out.diagnostics, diags);
  if (!has_errors(diags)) out.grammar = std::move(grammar);
  return out;
}

ParseOutcome parse_input(const Model& model, const Grammar& grammar, const SourceText& input,
                         std::optional<std::string> start) {
  ParseOutcome out;
  auto [tokens, lex_diags] = lex(grammar, input.text, input.name);
  append(out.diagnostics, lex_diags);
  out.tokens = tokens;
  auto [forest, parse_diags] = parse(grammar, std::move(tokens), std::move(start));
  append(out.diagnostics, parse_diags);
  if (!forest.root) return out;
  out.derivations = count_trees(forest);
  auto [tree, dis_diags] = disambiguate(forest, grammar);
  append(out.diagnostics, dis_diags);
  if (!tree) return out;
  out.tree = tree;
  out.tree_text = render_tree(*tree, grammar, forest);
  auto [graph, ref_diags] = resolve_references(build_instances(*tree, forest, grammar, model), model);
  append(out.diagnostics, ref_diags);
  out.graph = std::move(graph);
  return out;
}

}  // namespace mcc
