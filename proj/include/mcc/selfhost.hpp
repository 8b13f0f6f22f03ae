#pragma once

// The mapping language described by itself: converting instance graphs of
// the meta-model back into mapping documents, and the self-hosting suite.

#include <optional>
#include <string>
#include <vector>

#include "mcc/dsl.hpp"
#include "mcc/engine.hpp"
#include "mcc/pipeline.hpp"

namespace mcc {

/// Reads a graph produced by a parser generated from the meta-model. Unknown
/// constraint keywords are reported and their definitions dropped.
MappingDocument mapping_from_graph(const InstanceGraph& graph, Diagnostics& diags);

/// Parses mapping text with a parser generated from the meta-model.
/// Missing colons are repaired at the text level first unless `strict`.
std::optional<MappingDocument> parse_mapping_selfhosted(const Model& meta_model, const Grammar& meta_grammar,
                                                        const SourceText& source, Diagnostics& diags,
                                                        bool strict = false);

struct SelftestStep {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestStep> steps;

  bool passed() const;
  /// First failing step, or nullptr.
  const SelftestStep* first_failure() const;
  std::string render() const;
};

/// Runs the bundled suite against `metamodel.asm`, `property.mcd`, `grammar.mcd`
/// and `mixed.mcd` in `fixture_dir`. Stops at the first failing step.
SelftestReport run_selftest(const std::string& fixture_dir);

}  // namespace mcc
