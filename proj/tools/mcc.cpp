#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcc/pipeline.hpp"
#include "mcc/selfhost.hpp"

#ifndef MCC_FIXTURE_DIR
#define MCC_FIXTURE_DIR "fixtures"
#endif

namespace {

constexpr int kClean = 0;
constexpr int kErrors = 1;
constexpr int kUsage = 2;

struct IoError {
  std::string path;
};

bool use_color() {
  const char* v = std::getenv("MCC_COLOR");
  if (!v) return false;
  std::string s(v);
  return !(s.empty() || s == "0" || s == "never" || s == "false");
}

void report(const mcc::Diagnostics& diags) {
  if (!diags.empty()) std::cerr << mcc::render_text(diags, use_color());
}

mcc::SourceText read_or_throw(const std::string& path) {
  auto s = mcc::read_source(path);
  if (!s) throw IoError{path};
  return *s;
}

std::vector<mcc::SourceText> read_all(const std::vector<std::string>& paths) {
  std::vector<mcc::SourceText> out;
  for (const auto& p : paths) out.push_back(read_or_throw(p));
  return out;
}

mcc::RepairMode repair_mode(bool strict) { return strict ? mcc::RepairMode::strict : mcc::RepairMode::lenient; }

int cmd_check(const std::string& model_path, const std::vector<std::string>& mapping_paths, bool strict,
              const std::string& format) {
  auto model_source = read_or_throw(model_path);
  auto mappings = read_all(mapping_paths);
  mcc::Diagnostics diags;
  auto model = mcc::load_model(model_source, diags);
  if (model) mcc::append(diags, mcc::check_mappings(*model, mappings, repair_mode(strict)).diagnostics);
  if (format == "json")
    std::cout << mcc::render_json(diags) << "\n";
  else
    report(diags);
  return mcc::has_errors(diags) ? kErrors : kClean;
}

int cmd_grammar(const std::string& model_path, const std::vector<std::string>& mapping_paths, bool strict,
                const std::string& format, const std::optional<std::string>& start) {
  auto fmt = mcc::grammar_format_from_string(format);
  auto model_source = read_or_throw(model_path);
  auto mappings = read_all(mapping_paths);
  mcc::Diagnostics diags;
  auto model = mcc::load_model(model_source, diags);
  if (!model) {
    report(diags);
    return kErrors;
  }
  auto built = mcc::build_grammar(*model, mappings, repair_mode(strict), start);
  mcc::append(diags, built.diagnostics);
  report(diags);
  if (!built.grammar) return kErrors;
  std::cout << mcc::export_grammar(*built.grammar, fmt);
  return kClean;
}

int cmd_parse(std::vector<std::string> files, bool strict, const std::string& format,
              const std::optional<std::string>& start, bool mapping_input) {
  std::string input_path = files.back();
  files.pop_back();
  std::string model_path = files.front();
  files.erase(files.begin());
  auto model_source = read_or_throw(model_path);
  auto mappings = read_all(files);
  auto input = read_or_throw(input_path);

  mcc::Diagnostics diags;
  auto model = mcc::load_model(model_source, diags);
  if (!model) {
    report(diags);
    return kErrors;
  }
  auto built = mcc::build_grammar(*model, mappings, repair_mode(strict), start);
  mcc::append(diags, built.diagnostics);
  if (!built.grammar) {
    report(diags);
    return kErrors;
  }
  if (mapping_input && !strict) {
    auto [repaired, repair_diags] = mcc::repair_mapping_text(input.text, input.name);
    mcc::append(diags, repair_diags);
    input.text = std::move(repaired);
  }
  auto parsed = mcc::parse_input(*model, *built.grammar, input, start);
  mcc::append(diags, parsed.diagnostics);
  report(diags);
  if (parsed.graph) {
    if (format == "tree")
      std::cout << parsed.tree_text << "\n";
    else
      std::cout << mcc::graph_to_json(*parsed.graph).dump(2) << "\n";
  }
  return mcc::has_errors(diags) || !parsed.graph ? kErrors : kClean;
}

int cmd_selftest(const std::string& fixtures) {
  auto report_text = mcc::run_selftest(fixtures);
  std::cout << report_text.render();
  if (const auto* failure = report_text.first_failure()) {
    std::cerr << "selftest failed: " << failure->name << "\n";
    return kErrors;
  }
  return kClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-driven parser generator: check mappings, derive grammars, parse inputs"};
  app.require_subcommand(1);

  std::string model_path;
  std::vector<std::string> mappings;
  std::vector<std::string> files;
  bool strict = false;
  bool mapping_input = false;
  std::string check_format = "text";
  std::string grammar_format = "ebnf";
  std::string parse_format = "json";
  std::optional<std::string> start;
  std::string fixtures = MCC_FIXTURE_DIR;

  auto* check = app.add_subcommand("check", "Validate a model and its mapping files");
  check->add_option("model", model_path, "Model file")->required();
  check->add_option("mappings", mappings, "Mapping files, later ones override earlier ones");
  check->add_flag("--strict", strict, "Reject definitions with a missing ':'");
  check->add_option("--format", check_format, "Diagnostics format")->check(CLI::IsMember({"text", "json"}))->default_val("text");

  auto* grammar = app.add_subcommand("grammar", "Print the derived grammar");
  grammar->add_option("model", model_path, "Model file")->required();
  grammar->add_option("mappings", mappings, "Mapping files");
  grammar->add_flag("--strict", strict, "Reject definitions with a missing ':'");
  grammar->add_option("--format", grammar_format, "Output format")->check(CLI::IsMember({"ebnf", "json"}))->default_val("ebnf");
  grammar->add_option("--start", start, "Start element");

  auto* parse = app.add_subcommand("parse", "Parse an input file into an instance graph");
  parse->add_option("files", files, "Model file, mapping files, then the input file")->required()->expected(2, -1);
  parse->add_flag("--strict", strict, "No lenient repairs");
  parse->add_flag("--mapping-input", mapping_input, "Input is a mapping file; repair missing ':' unless --strict");
  parse->add_option("--format", parse_format, "Output format")->check(CLI::IsMember({"json", "tree"}))->default_val("json");
  parse->add_option("--start", start, "Start element");

  auto* selftest = app.add_subcommand("selftest", "Run the bundled self-hosting suite");
  selftest->add_option("--fixtures", fixtures, "Directory with metamodel.asm and property.mcd, grammar.mcd and mixed.mcd");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check) return cmd_check(model_path, mappings, strict, check_format);
    if (*grammar) return cmd_grammar(model_path, mappings, strict, grammar_format, start);
    if (*parse) return cmd_parse(files, strict, parse_format, start, mapping_input);
    if (*selftest) return cmd_selftest(fixtures);
  } catch (const IoError& e) {
    std::cerr << "mcc: cannot read " << e.path << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mcc: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
