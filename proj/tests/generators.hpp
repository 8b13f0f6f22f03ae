#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mcc/asm.hpp"

namespace generators {

/// Syntactically valid model; not necessarily well formed.
inline mcc::Model random_model(std::mt19937& rng) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  mcc::Model m;
  m.name = "L" + std::to_string(pick(100));
  if (pick(2)) m.skip_patterns.push_back("[ \\t\\r\\n]+");
  if (pick(2)) m.skip_patterns.push_back("#[^\\n]*");
  std::size_t count = 2 + pick(5);
  auto name = [](std::size_t i) { return "E" + std::to_string(i); };
  const std::pair<std::size_t, std::size_t> mults[] = {{1, 1}, {0, 1}, {0, mcc::kUnbounded}, {1, mcc::kUnbounded},
                                                       {2, mcc::kUnbounded}, {2, 4}, {3, 3}};
  for (std::size_t i = 0; i < count; ++i) {
    mcc::ElementDef e;
    e.name = name(i);
    e.kind = static_cast<mcc::ElementKind>(pick(3));
    switch (e.kind) {
      case mcc::ElementKind::token:
        e.default_constraints.push_back({mcc::ConstraintKind::Pattern, mcc::PatternText{"[a-z]+\"\\" + std::to_string(i)}, {}});
        if (pick(2)) e.members.push_back(mcc::MemberDef{"text", "", 1, 1});
        break;
      case mcc::ElementKind::alternative:
        for (std::size_t v = 0; v < 1 + pick(3); ++v) e.variants.push_back(name(pick(count)));
        if (pick(2)) e.default_constraints.push_back({mcc::ConstraintKind::Priority, std::int64_t(pick(5)), {}});
        break;
      case mcc::ElementKind::composite: {
        if (pick(2)) e.default_constraints.push_back({mcc::ConstraintKind::Prefix, mcc::Literals{{"(", "[["}}, {}});
        if (pick(2)) e.default_constraints.push_back({mcc::ConstraintKind::Associativity, mcc::Keyword{"left"}, {}});
        std::size_t members = pick(4);
        for (std::size_t k = 0; k < members; ++k) {
          mcc::MemberDef md;
          md.name = "m" + std::to_string(k);
          md.target = name(pick(count));
          auto [lo, hi] = mults[pick(std::size(mults))];
          md.min = lo;
          md.max = hi;
          md.is_id = pick(5) == 0;
          md.is_reference = !md.is_id && pick(5) == 0;
          if (pick(3) == 0) md.default_constraints.push_back({mcc::ConstraintKind::Separator, mcc::Literals{{","}}, {}});
          if (pick(3) == 0) md.default_constraints.push_back({mcc::ConstraintKind::Optional, pick(2) == 0, {}});
          if (pick(4) == 0) md.default_constraints.push_back({mcc::ConstraintKind::Maximum, mcc::Unbounded{}, {}});
          e.members.push_back(std::move(md));
        }
        break;
      }
    }
    m.elements.push_back(std::move(e));
  }
  return m;
}

/// Mixed property-like and grammar-like mapping text over `model`.
inline std::string random_mapping(std::mt19937& rng, const mcc::Model& model) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::string out;
  std::size_t lines = 1 + pick(12);
  std::vector<const mcc::ElementDef*> composites, alternatives;
  for (const auto& e : model.elements) {
    if (e.kind == mcc::ElementKind::composite) composites.push_back(&e);
    if (e.kind == mcc::ElementKind::alternative) alternatives.push_back(&e);
  }
  const char* literals[] = {"\"(\"", "\")\"", "\",\"", "\";\"", "\"begin\""};
  for (std::size_t i = 0; i < lines; ++i) {
    switch (pick(6)) {
      case 0: {
        const mcc::ElementDef* e = composites[pick(composites.size())];
        out += e->name + (pick(2) ? "[prefix]: " : "[suffix]: ") + literals[pick(5)] + "\n";
        break;
      }
      case 1: {
        const mcc::ElementDef* e = composites[pick(composites.size())];
        if (e->members.empty()) break;
        const mcc::MemberDef& m = e->members[pick(e->members.size())];
        out += e->name + "." + m.name + "[separator]: " + literals[pick(5)] + "\n";
        break;
      }
      case 2: {
        const mcc::ElementDef* e = composites[pick(composites.size())];
        out += e->name + (pick(2) ? "[associativity]: left\n" : "[composition]: lazy\n");
        break;
      }
      case 3: {
        const mcc::ElementDef* a = alternatives[pick(alternatives.size())];
        if (a->variants.size() < 2) break;
        std::vector<std::string> v = a->variants;
        std::shuffle(v.begin(), v.end(), rng);
        std::size_t n = 2 + pick(v.size() - 1);
        out += a->name + ":";
        for (std::size_t k = 0; k < n; ++k) out += (k ? " < " : " ") + v[k];
        out += "\n";
        break;
      }
      case 4: {
        const mcc::ElementDef* e = composites[pick(composites.size())];
        if (e->members.empty()) break;
        const mcc::MemberDef& m = e->members[pick(e->members.size())];
        out += e->name + "." + m.name + (pick(2) ? "[optional]: true\n" : "[minimum]: 0\n");
        break;
      }
      default: {
        const mcc::ElementDef* e = composites[pick(composites.size())];
        out += e->name + ":";
        std::vector<const mcc::MemberDef*> ms;
        for (const auto& m : e->members) ms.push_back(&m);
        std::shuffle(ms.begin(), ms.end(), rng);
        for (const mcc::MemberDef* m : ms) out += std::string(" ") + literals[pick(5)] + " " + m->name;
        out += "\n";
        break;
      }
    }
  }
  return out;
}

}  // namespace generators
