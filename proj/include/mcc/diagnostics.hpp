#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcc {

/// A region of a source file. Lines and columns are 1-based; offset and
/// length are in bytes.
struct SourceSpan {
  std::string file;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t line = 0;
  std::size_t column = 0;

  bool valid() const { return line != 0; }
};

enum class Severity { error, warning, info };

const char* to_string(Severity severity);

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  SourceSpan location;
  std::optional<SourceSpan> related;
};

using Diagnostics = std::vector<Diagnostic>;

Diagnostic make_error(std::string code, std::string message, SourceSpan where = {});
Diagnostic make_warning(std::string code, std::string message, SourceSpan where = {});
Diagnostic make_info(std::string code, std::string message, SourceSpan where = {});

bool has_errors(const Diagnostics& diagnostics);
std::size_t count(const Diagnostics& diagnostics, Severity severity);
std::size_t count_code(const Diagnostics& diagnostics, const std::string& code);

void append(Diagnostics& into, const Diagnostics& from);

/// `file:line:col: severity[code]: message`, one per line. With `color`
/// the severity is wrapped in ANSI escapes.
std::string render_text(const Diagnostics& diagnostics, bool color = false);
std::string render_json(const Diagnostics& diagnostics);

/// Fatal, non-recoverable syntax error in a model file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourceSpan where);
  const SourceSpan& where() const { return where_; }

 private:
  SourceSpan where_;
};

}  // namespace mcc
