#include "mcc/diagnostics.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mcc {

const char* to_string(Severity severity) {
  switch (severity) {
    case Severity::error:
      return "error";
    case Severity::warning:
      return "warning";
    case Severity::info:
      return "info";
  }
  return "error";
}

Diagnostic make_error(std::string code, std::string message, SourceSpan where) {
  return Diagnostic{Severity::error, std::move(code), std::move(message), std::move(where), std::nullopt};
}

Diagnostic make_warning(std::string code, std::string message, SourceSpan where) {
  return Diagnostic{Severity::warning, std::move(code), std::move(message), std::move(where), std::nullopt};
}

Diagnostic make_info(std::string code, std::string message, SourceSpan where) {
  return Diagnostic{Severity::info, std::move(code), std::move(message), std::move(where), std::nullopt};
}

bool has_errors(const Diagnostics& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

std::size_t count(const Diagnostics& diagnostics, Severity severity) {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                [&](const Diagnostic& d) { return d.severity == severity; }));
}

std::size_t count_code(const Diagnostics& diagnostics, const std::string& code) {
  return static_cast<std::size_t>(
      std::count_if(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

void append(Diagnostics& into, const Diagnostics& from) { into.insert(into.end(), from.begin(), from.end()); }

namespace {

const char* color_of(Severity severity) {
  switch (severity) {
    case Severity::error:
      return "\x1b[1;31m";
    case Severity::warning:
      return "\x1b[1;35m";
    case Severity::info:
      return "\x1b[1;36m";
  }
  return "";
}

}  // namespace

std::string render_text(const Diagnostics& diagnostics, bool color) {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    if (!d.location.file.empty()) out << d.location.file << ':';
    if (d.location.valid()) out << d.location.line << ':' << d.location.column << ':';
    if (!d.location.file.empty() || d.location.valid()) out << ' ';
    if (color) out << color_of(d.severity);
    out << to_string(d.severity);
    if (color) out << "\x1b[0m";
    out << '[' << d.code << "]: " << d.message << '\n';
  }
  return out.str();
}

std::string render_json(const Diagnostics& diagnostics) {
  auto list = nlohmann::ordered_json::array();
  for (const auto& d : diagnostics) {
    nlohmann::ordered_json item;
    item["severity"] = to_string(d.severity);
    item["code"] = d.code;
    item["message"] = d.message;
    item["file"] = d.location.file;
    item["line"] = d.location.line;
    item["column"] = d.location.column;
    if (d.related) {
      item["related"] = {{"file", d.related->file}, {"line", d.related->line}, {"column", d.related->column}};
    }
    list.push_back(std::move(item));
  }
  return list.dump(2);
}

ParseError::ParseError(const std::string& message, SourceSpan where)
    : std::runtime_error(message), where_(std::move(where)) {}

}  // namespace mcc
