#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcc/pipeline.hpp"
#include "mcc/selfhost.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Named = std::vector<std::pair<std::string, std::string>>;

std::vector<mcc::SourceText> sources(const Named& named) {
  std::vector<mcc::SourceText> out;
  for (const auto& [name, text] : named) out.push_back({name, text});
  return out;
}

mcc::RepairMode mode(bool strict) { return strict ? mcc::RepairMode::strict : mcc::RepairMode::lenient; }

json diagnostics(const mcc::Diagnostics& d) { return json::parse(mcc::render_json(d)); }

std::optional<mcc::Model> model_of(const std::string& text, mcc::Diagnostics& diags) {
  return mcc::load_model({"<model>", text}, diags);
}

std::string check(const std::string& model_text, const Named& mappings, bool strict) {
  mcc::Diagnostics diags;
  json out;
  if (auto model = model_of(model_text, diags)) {
    auto outcome = mcc::check_mappings(*model, sources(mappings), mode(strict));
    mcc::append(diags, outcome.diagnostics);
    out["constraints"] = mcc::to_json(outcome.set);
  }
  out["ok"] = !mcc::has_errors(diags);
  out["diagnostics"] = diagnostics(diags);
  return out.dump();
}

std::string grammar(const std::string& model_text, const Named& mappings, const std::string& format,
                    std::optional<std::string> start, bool strict) {
  auto fmt = mcc::grammar_format_from_string(format);
  mcc::Diagnostics diags;
  json out;
  if (auto model = model_of(model_text, diags)) {
    auto built = mcc::build_grammar(*model, sources(mappings), mode(strict), start);
    mcc::append(diags, built.diagnostics);
    if (built.grammar) out["grammar"] = mcc::export_grammar(*built.grammar, fmt);
  }
  out["ok"] = out.contains("grammar") && !mcc::has_errors(diags);
  out["diagnostics"] = diagnostics(diags);
  return out.dump();
}

std::string parse(const std::string& model_text, const Named& mappings, const std::string& input,
                  std::optional<std::string> start, bool strict) {
  mcc::Diagnostics diags;
  json out;
  if (auto model = model_of(model_text, diags)) {
    auto built = mcc::build_grammar(*model, sources(mappings), mode(strict), start);
    mcc::append(diags, built.diagnostics);
    if (built.grammar) {
      auto parsed = mcc::parse_input(*model, *built.grammar, {"<input>", input}, start);
      mcc::append(diags, parsed.diagnostics);
      out["derivations"] = parsed.derivations;
      if (parsed.tree) out["tree"] = parsed.tree_text;
      if (parsed.graph) out["graph"] = mcc::graph_to_json(*parsed.graph);
    }
  }
  out["ok"] = out.contains("graph") && !mcc::has_errors(diags);
  out["diagnostics"] = diagnostics(diags);
  return out.dump();
}

py::tuple selftest(const std::string& fixtures) {
  auto report = mcc::run_selftest(fixtures);
  return py::make_tuple(report.passed(), report.render());
}

}  // namespace

PYBIND11_MODULE(_mcc, m) {
  m.doc() = "Model-driven parser generator core";
  m.def("check", &check, py::arg("model"), py::arg("mappings"), py::arg("strict") = false);
  m.def("grammar", &grammar, py::arg("model"), py::arg("mappings"), py::arg("format") = "ebnf",
        py::arg("start") = py::none(), py::arg("strict") = false);
  m.def("parse", &parse, py::arg("model"), py::arg("mappings"), py::arg("input"), py::arg("start") = py::none(),
        py::arg("strict") = false);
  m.def("selftest", &selftest, py::arg("fixtures"));
  m.attr("FIXTURE_DIR") = MCC_FIXTURE_DIR;
}
