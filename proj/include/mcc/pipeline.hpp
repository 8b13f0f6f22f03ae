#pragma once

// End-to-end wiring: model and mapping files in, constraint sets, grammars
// and instance graphs out. Every stage reports through Diagnostics.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcc/asm.hpp"
#include "mcc/constraints.hpp"
#include "mcc/csm.hpp"
#include "mcc/diagnostics.hpp"
#include "mcc/dsl.hpp"
#include "mcc/engine.hpp"

namespace mcc {

struct SourceText {
  std::string name;
  std::string text;
};

/// Reads a file; nullopt when it cannot be opened.
std::optional<SourceText> read_source(const std::string& path);

/// Parses and validates a model. Syntax errors become diagnostics.
std::optional<Model> load_model(const SourceText& source, Diagnostics& diags);

struct CheckOutcome {
  std::vector<MappingDocument> documents;
  /// Merged over the model defaults and canonicalized.
  CanonicalConstraintSet set;
  Diagnostics diagnostics;
};

/// Parses, lowers and merges mapping files in override order, then checks
/// the result against the model.
CheckOutcome check_mappings(const Model& model, const std::vector<SourceText>& mappings,
                            RepairMode mode = RepairMode::lenient);

/// Canonical set of a single lowered document (no model defaults).
CanonicalConstraintSet lowered_set(const MappingDocument& doc, const Model& model, Diagnostics& diags);

struct GrammarOutcome {
  std::optional<Grammar> grammar;
  CanonicalConstraintSet set;
  Diagnostics diagnostics;
};

GrammarOutcome build_grammar(const Model& model, const std::vector<SourceText>& mappings,
                             RepairMode mode = RepairMode::lenient, std::optional<std::string> start = std::nullopt);

struct ParseOutcome {
  std::vector<TokenInstance> tokens;
  std::uint64_t derivations = 0;
  std::optional<ParseTree> tree;
  /// Bracketed rendering of the chosen tree.
  std::string tree_text;
  std::optional<InstanceGraph> graph;
  Diagnostics diagnostics;
};

/// Lex, parse, disambiguate, build instances and resolve references.
ParseOutcome parse_input(const Model& model, const Grammar& grammar, const SourceText& input,
                         std::optional<std::string> start = std::nullopt);

}  // namespace mcc
