#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcc/pipeline.hpp"

#ifndef MCC_FIXTURE_DIR
#error "MCC_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace support {

inline std::string fixture_path(const std::string& name) { return std::string(MCC_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline mcc::Model fixture_model(const std::string& name) { return mcc::parse_model(read_fixture(name), name); }

inline mcc::MappingDocument fixture_mapping(const std::string& name) {
  return mcc::parse_mapping(read_fixture(name), mcc::RepairMode::lenient, name).first;
}

/// Grammar for a model plus mapping texts; throws when the pipeline reports
/// errors so that tests fail loudly.
inline mcc::Grammar grammar_for(const mcc::Model& model, const std::vector<std::string>& mappings = {}) {
  std::vector<mcc::SourceText> sources;
  for (std::size_t i = 0; i < mappings.size(); ++i) sources.push_back({"mapping" + std::to_string(i), mappings[i]});
  auto built = mcc::build_grammar(model, sources);
  if (!built.grammar) throw std::runtime_error(mcc::render_text(built.diagnostics));
  return *built.grammar;
}

inline mcc::Grammar arith_grammar() {
  static const mcc::Grammar g = grammar_for(fixture_model("arith.asm"), {read_fixture("arith.mcd")});
  return g;
}

inline mcc::Grammar meta_grammar() {
  static const mcc::Grammar g = grammar_for(fixture_model("metamodel.asm"), {read_fixture("grammar.mcd")});
  return g;
}

inline mcc::ParseForest forest_of(const mcc::Grammar& g, const std::string& input) {
  auto [tokens, lex_diags] = mcc::lex(g, input);
  if (mcc::has_errors(lex_diags)) throw std::runtime_error(mcc::render_text(lex_diags));
  return mcc::parse(g, std::move(tokens)).first;
}

}  // namespace support
