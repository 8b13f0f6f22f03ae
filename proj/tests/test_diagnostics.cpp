#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mcc/diagnostics.hpp"

using namespace mcc;

TEST_CASE("text rendering puts the location first") {
  SourceSpan at{"a.mcd", 10, 3, 2, 5};
  Diagnostics d{make_error("syntax", "unexpected ':'", at), make_warning("unknown-target", "ignored")};
  CHECK(render_text(d) == "a.mcd:2:5: error[syntax]: unexpected ':'\nwarning[unknown-target]: ignored\n");
}

TEST_CASE("color wraps only the severity") {
  Diagnostics d{make_info("member-order", "reordered")};
  std::string text = render_text(d, true);
  CHECK(text.find("\x1b[") != std::string::npos);
  CHECK(text.find("[member-order]: reordered") != std::string::npos);
  CHECK(render_text(d, false) == "info[member-order]: reordered\n");
}

TEST_CASE("json rendering is an array of objects") {
  Diagnostic d = make_error("duplicate-id", "duplicate id 'x'", SourceSpan{"in", 0, 1, 1, 1});
  d.related = SourceSpan{"in", 4, 1, 1, 5};
  auto j = nlohmann::json::parse(render_json({d}));
  REQUIRE(j.size() == 1);
  CHECK(j[0]["severity"] == "error");
  CHECK(j[0]["code"] == "duplicate-id");
  CHECK(j[0]["line"] == 1);
  CHECK(j[0]["related"]["column"] == 5);
  CHECK(nlohmann::json::parse(render_json({})).empty());
}

TEST_CASE("counting helpers") {
  Diagnostics d{make_error("a", ""), make_warning("b", ""), make_warning("b", ""), make_info("c", "")};
  CHECK(has_errors(d));
  CHECK(count(d, Severity::warning) == 2);
  CHECK(count_code(d, "b") == 2);
  CHECK_FALSE(has_errors({make_warning("b", "")}));
  Diagnostics more;
  append(more, d);
  CHECK(more.size() == 4);
}

TEST_CASE("parse errors carry their span") {
  try {
    throw ParseError("bad", SourceSpan{"m.asm", 0, 1, 3, 7});
  } catch (const ParseError& e) {
    CHECK(e.where().line == 3);
    CHECK(std::string(e.what()) == "bad");
  }
}
