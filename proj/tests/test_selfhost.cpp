#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mcc/selfhost.hpp"
#include "support.hpp"

using namespace mcc;
namespace fs = std::filesystem;

namespace {

struct ScratchFixtures {
  fs::path dir;

  ScratchFixtures() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("mcc-selfhost-" + std::to_string(rd()));
    fs::create_directories(dir);
    for (const char* f : {"metamodel.asm", "property.mcd", "grammar.mcd", "mixed.mcd"})
      fs::copy_file(support::fixture_path(f), dir / f);
  }
  ~ScratchFixtures() { fs::remove_all(dir); }

  void replace(const char* file, const std::string& from, const std::string& to) {
    std::string text = support::read_fixture(file);
    auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    text.replace(at, from.size(), to);
    std::ofstream(dir / file, std::ios::binary | std::ios::trunc) << text;
  }
};

}  // namespace

TEST_CASE("the bundled fixtures pass the selftest") {
  SelftestReport r = run_selftest(MCC_FIXTURE_DIR);
  CAPTURE(r.render());
  CHECK(r.passed());
  CHECK(r.first_failure() == nullptr);
  CHECK(r.steps.size() > 10);
  CHECK(r.render().find("FAIL") == std::string::npos);
}

TEST_CASE("a missing separator breaks equivalence") {
  ScratchFixtures s;
  s.replace("mixed.mcd", "Element.name[separator]: \".\"\n", "");
  SelftestReport r = run_selftest(s.dir.string());
  REQUIRE_FALSE(r.passed());
  const SelftestStep* failure = r.first_failure();
  REQUIRE(failure);
  CHECK(failure->name.find("equivalence") == 0);
  CHECK(failure->detail.find("Element.name[separator]") != std::string::npos);
}

TEST_CASE("a single-name element conflicts with the dotted list") {
  ScratchFixtures s;
  s.replace("metamodel.asm", "name: Identifier+", "name: Identifier");
  SelftestReport r = run_selftest(s.dir.string());
  REQUIRE_FALSE(r.passed());
  CHECK(r.first_failure()->name.find("consistency") == 0);
}

TEST_CASE("missing fixtures are reported") {
  SelftestReport r = run_selftest("/nonexistent/fixtures");
  CHECK_FALSE(r.passed());
  CHECK(r.first_failure()->name == "read meta-model");
}

TEST_CASE("self-hosted parse of each mapping") {
  Model meta = support::fixture_model("metamodel.asm");
  Grammar g = support::meta_grammar();
  for (const char* f : {"property.mcd", "grammar.mcd", "mixed.mcd"}) {
    CAPTURE(f);
    Diagnostics d;
    auto doc = parse_mapping_selfhosted(meta, g, {f, support::read_fixture(f)}, d);
    REQUIRE(doc);
    CHECK(*doc == support::fixture_mapping(f));
  }
}

TEST_CASE("strict self-hosted parsing rejects missing colons") {
  Model meta = support::fixture_model("metamodel.asm");
  Diagnostics d;
  SourceText source{"property.mcd", support::read_fixture("property.mcd")};
  auto doc = parse_mapping_selfhosted(meta, support::meta_grammar(), source, d, true);
  CHECK_FALSE(doc.has_value());
  CHECK(has_errors(d));
}

TEST_CASE("unknown constraint ids in a self-hosted parse") {
  Model meta = support::fixture_model("metamodel.asm");
  Diagnostics d;
  auto doc = parse_mapping_selfhosted(meta, support::meta_grammar(), {"in", "A[colour]: \"x\"\nB: c\n"}, d);
  REQUIRE(doc);
  CHECK(doc->definitions.size() == 1);
  CHECK(count_code(d, "unknown-constraint-id") == 1);
}
