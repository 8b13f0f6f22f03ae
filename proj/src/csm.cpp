#include "mcc/csm.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "mcc/pattern.hpp"

namespace mcc {

const char* to_string(Provenance::Kind kind) {
  switch (kind) {
    case Provenance::Kind::Composite: return "composite";
    case Provenance::Kind::Alternative: return "alternative";
    case Provenance::Kind::MemberWrapper: return "member";
    case Provenance::Kind::List: return "list";
    case Provenance::Kind::Helper: return "helper";
  }
  return "?";
}

bool Grammar::is_terminal(std::string_view symbol) const { return token(symbol) != nullptr; }

bool Grammar::is_nonterminal(std::string_view symbol) const {
  return std::any_of(productions.begin(), productions.end(), [&](const Production& p) { return p.lhs == symbol; });
}

const TokenSpec* Grammar::token(std::string_view name) const {
  for (const auto& t : tokens)
    if (t.name == name) return &t;
  return nullptr;
}

const GrammarMember* Grammar::member(const std::string& element, const std::string& name) const {
  auto it = members.find({element, name});
  return it == members.end() ? nullptr : &it->second;
}

namespace {

constexpr std::size_t kMaxEnumeratedBound = 64;

struct Deriver {
  const Model& model;
  const CanonicalConstraintSet& set;
  Grammar g;
  Diagnostics diags;
  std::set<std::string> helpers;

  const Literals* literals(const std::string& element, const std::string& member, ConstraintKind kind) {
    const auto* v = set.find(element, member, kind);
    return v ? std::get_if<Literals>(v) : nullptr;
  }

  std::string literal_token(const std::string& text) {
    std::string name = quote(text);
    if (!g.token(name)) g.tokens.push_back(TokenSpec{name, text, kLiteralTokenPriority, true});
    return name;
  }

  // One delimiter symbol: the literal token itself, or a helper nonterminal
  // choosing between several literals.
  std::optional<std::string> delimiter(const Literals* lits, const std::string& helper_name) {
    if (!lits || lits->values.empty()) return std::nullopt;
    for (const auto& v : lits->values)
      if (v.empty()) {
        diags.push_back(make_error("empty-delimiter", helper_name + " is an empty literal"));
        return std::nullopt;
      }
    if (lits->values.size() == 1) return literal_token(lits->values.front());
    if (helpers.insert(helper_name).second)
      for (const auto& v : lits->values)
        g.productions.push_back(Production{helper_name,
                                           {literal_token(v)},
                                           Provenance{Provenance::Kind::Helper, "", "", ""},
                                           {SymbolRole{SymbolRole::Kind::Delimiter, ""}}});
    return helper_name;
  }

  std::optional<std::string> id_token(const std::string& element) {
    std::optional<std::string> found;
    for (const auto& name : subtypes_of(model, element)) {
      const auto* e = model.find(name);
      if (!e) return std::nullopt;
      if (e->kind != ElementKind::composite) continue;
      const MemberDef* id = nullptr;
      for (const auto& m : e->members)
        if (effective_member(set, *e, m).is_id) {
          if (id) return std::nullopt;
          id = &m;
        }
      if (!id || (found && *found != id->target)) return std::nullopt;
      found = id->target;
    }
    return found;
  }

  void tokens() {
    for (const auto& e : model.elements) {
      if (e.kind != ElementKind::token) continue;
      const auto* v = set.find(e.name, ConstraintKind::Pattern);
      const auto* p = v ? std::get_if<PatternText>(v) : nullptr;
      if (!p) {
        diags.push_back(make_error("missing-pattern", "token " + e.name + " has no pattern", e.span));
        continue;
      }
      try {
        Pattern::compile(p->text);
      } catch (const PatternError& err) {
        diags.push_back(make_error("bad-pattern", "token " + e.name + ": " + err.what(), e.span));
        continue;
      }
      std::int64_t priority = kPatternTokenPriority;
      if (const auto* pr = set.find(e.name, ConstraintKind::Priority))
        if (const auto* i = std::get_if<std::int64_t>(pr)) priority = *i;
      g.tokens.push_back(TokenSpec{e.name, p->text, priority, false});
    }
    for (const auto& s : model.skip_patterns) {
      try {
        Pattern::compile(s);
        g.skip_patterns.push_back(s);
      } catch (const PatternError& err) {
        diags.push_back(make_error("bad-pattern", "skip pattern: " + std::string(err.what())));
      }
    }
  }

  void list(const std::string& name, const std::string& unit, const std::optional<std::string>& sep,
            const GrammarMember& gm, const ElementDef& e, const MemberDef& m) {
    Provenance prov{Provenance::Kind::List, e.name, m.name, ""};
    auto sequence = [&](std::size_t units) {
      Production p{name, {}, prov, {}};
      for (std::size_t i = 0; i < units; ++i) {
        if (i && sep) {
          p.rhs.push_back(*sep);
          p.roles.push_back({SymbolRole::Kind::Delimiter, ""});
        }
        p.rhs.push_back(unit);
        p.roles.push_back({SymbolRole::Kind::Inner, ""});
      }
      return p;
    };
    std::size_t base = std::max<std::size_t>(gm.min, 1);
    bool unbounded = gm.max == kUnbounded;
    if (!unbounded && gm.max - base > kMaxEnumeratedBound) {
      diags.push_back(make_warning("large-bound",
                                   e.name + "." + m.name + ": maximum too large to enumerate; treated as unbounded",
                                   m.span));
      unbounded = true;
    }
    if (unbounded) {
      g.productions.push_back(sequence(base));
      Production rec{name, {name}, prov, {{SymbolRole::Kind::Inner, ""}}};
      if (sep) {
        rec.rhs.push_back(*sep);
        rec.roles.push_back({SymbolRole::Kind::Delimiter, ""});
      }
      rec.rhs.push_back(unit);
      rec.roles.push_back({SymbolRole::Kind::Inner, ""});
      g.productions.push_back(std::move(rec));
    } else {
      for (std::size_t k = base; k <= gm.max; ++k) g.productions.push_back(sequence(k));
    }
  }

  void composite(const ElementDef& e) {
    Production p{e.name, {}, Provenance{Provenance::Kind::Composite, e.name, "", ""}, {}};
    auto push = [&](const std::string& sym, SymbolRole role) {
      p.rhs.push_back(sym);
      p.roles.push_back(std::move(role));
    };
    if (auto pre = delimiter(literals(e.name, "", ConstraintKind::Prefix), e.name + ".prefix"))
      push(*pre, {SymbolRole::Kind::Delimiter, ""});

    for (const MemberDef* m : effective_order(set, e)) {
      const GrammarMember& gm = g.members.at({e.name, m->name});
      std::string unit = m->target;
      if (gm.is_reference) {
        auto tok = id_token(m->target);
        if (!tok) {
          diags.push_back(make_error("reference-target",
                                     e.name + "." + m->name + " refers to " + m->target + ", which has no single id member",
                                     m->span));
          continue;
        }
        unit = *tok;
      }
      std::string base = e.name + "." + m->name;
      auto pre = delimiter(literals(e.name, m->name, ConstraintKind::Prefix), base + ".prefix");
      auto suf = delimiter(literals(e.name, m->name, ConstraintKind::Suffix), base + ".suffix");
      std::optional<std::string> sep;
      if (gm.max > 1) sep = delimiter(literals(e.name, m->name, ConstraintKind::Separator), base + ".separator");

      if (gm.min == 1 && gm.max == 1) {
        if (pre) push(*pre, {SymbolRole::Kind::Delimiter, ""});
        push(unit, {SymbolRole::Kind::Member, m->name});
        if (suf) push(*suf, {SymbolRole::Kind::Delimiter, ""});
        continue;
      }
      std::string inner = unit;
      if (gm.max > 1) {
        inner = base + ".list";
        list(inner, unit, sep, gm, e, *m);
      }
      if (gm.min == 0 || pre || suf) {
        Provenance prov{Provenance::Kind::MemberWrapper, e.name, m->name, ""};
        Production w{base, {}, prov, {}};
        if (pre) {
          w.rhs.push_back(*pre);
          w.roles.push_back({SymbolRole::Kind::Delimiter, ""});
        }
        w.rhs.push_back(inner);
        w.roles.push_back({SymbolRole::Kind::Inner, ""});
        if (suf) {
          w.rhs.push_back(*suf);
          w.roles.push_back({SymbolRole::Kind::Delimiter, ""});
        }
        g.productions.push_back(std::move(w));
        if (gm.min == 0) g.productions.push_back(Production{base, {}, prov, {}});
        inner = base;
      }
      push(inner, {SymbolRole::Kind::Member, m->name});
    }

    if (auto suf = delimiter(literals(e.name, "", ConstraintKind::Suffix), e.name + ".suffix"))
      push(*suf, {SymbolRole::Kind::Delimiter, ""});
    g.productions.push_back(std::move(p));
  }

  std::vector<std::string> ordered_variants(const ElementDef& a) {
    std::vector<std::string> pending = a.variants, out;
    while (!pending.empty()) {
      auto pick = std::find_if(pending.begin(), pending.end(), [&](const std::string& v) {
        return std::none_of(pending.begin(), pending.end(),
                            [&](const std::string& w) { return w != v && set.precedes.count({w, v}); });
      });
      if (pick == pending.end()) pick = pending.begin();
      out.push_back(*pick);
      pending.erase(pick);
    }
    return out;
  }

  void alternative(const ElementDef& a) {
    auto pre = delimiter(literals(a.name, "", ConstraintKind::Prefix), a.name + ".prefix");
    auto suf = delimiter(literals(a.name, "", ConstraintKind::Suffix), a.name + ".suffix");
    for (const auto& v : ordered_variants(a)) {
      Production p{a.name, {}, Provenance{Provenance::Kind::Alternative, a.name, "", v}, {}};
      if (pre) {
        p.rhs.push_back(*pre);
        p.roles.push_back({SymbolRole::Kind::Delimiter, ""});
      }
      p.rhs.push_back(v);
      p.roles.push_back({SymbolRole::Kind::Inner, ""});
      if (suf) {
        p.rhs.push_back(*suf);
        p.roles.push_back({SymbolRole::Kind::Delimiter, ""});
      }
      g.productions.push_back(std::move(p));
    }
  }

  void metadata() {
    for (const auto& [a, b] : set.precedes)
      if (model.find(a) && model.find(b)) g.precedes.emplace(a, b);
    for (const auto& [key, value] : set.entries) {
      if (!key.member.empty() || !model.find(key.element)) continue;
      if (key.kind == ConstraintKind::Associativity)
        if (const auto* k = std::get_if<Keyword>(&value)) g.associativity[key.element] = k->word;
      if (key.kind == ConstraintKind::Composition)
        if (const auto* k = std::get_if<Keyword>(&value)) g.composition[key.element] = k->word;
      if (key.kind == ConstraintKind::Priority)
        if (const auto* i = std::get_if<std::int64_t>(&value)) g.priority[key.element] = *i;
    }
  }

  void reachability() {
    std::set<std::string> seen{g.start};
    std::vector<std::string> work{g.start};
    while (!work.empty()) {
      std::string sym = work.back();
      work.pop_back();
      for (const auto& p : g.productions)
        if (p.lhs == sym)
          for (const auto& r : p.rhs)
            if (seen.insert(r).second) work.push_back(r);
    }
    for (const auto& e : model.elements)
      if (!seen.count(e.name))
        diags.push_back(make_warning("unreachable", e.name + " is not reachable from " + g.start, e.span));
  }

  void run(std::optional<std::string> start) {
    if (model.elements.empty()) {
      diags.push_back(make_error("empty-model", "model declares no elements"));
      return;
    }
    if (start && !model.find(*start)) {
      diags.push_back(make_error("unknown-start", "start element " + *start + " is not declared"));
      return;
    }
    g.start = start ? *start : model.elements.front().name;
    for (const auto& e : model.elements)
      for (const auto& m : e.members) {
        auto eff = effective_member(set, e, m);
        g.members[{e.name, m.name}] = GrammarMember{m.target, eff.min, eff.max, eff.is_id, eff.is_reference};
      }
    tokens();
    for (const auto& e : model.elements) {
      if (e.kind == ElementKind::composite) composite(e);
      if (e.kind == ElementKind::alternative) alternative(e);
    }
    metadata();
    reachability();
  }
};

std::string bound_text(std::size_t n) { return n == kUnbounded ? "*" : std::to_string(n); }

}  // namespace

std::pair<Grammar, Diagnostics> derive_grammar(const Model& model, const CanonicalConstraintSet& set,
                                               std::optional<std::string> start) {
  Deriver d{model, set, {}, {}, {}};
  d.run(std::move(start));
  return {std::move(d.g), std::move(d.diags)};
}

GrammarFormat grammar_format_from_string(std::string_view name) {
  if (name == "ebnf") return GrammarFormat::ebnf;
  if (name == "json") return GrammarFormat::json;
  throw std::invalid_argument("unknown grammar format '" + std::string(name) + "' (expected ebnf or json)");
}

std::string export_grammar(const Grammar& grammar, GrammarFormat format) {
  return format == GrammarFormat::ebnf ? export_ebnf(grammar) : grammar_to_json(grammar).dump(2) + "\n";
}

std::string export_ebnf(const Grammar& grammar) {
  std::ostringstream out;
  out << "(* start: " << grammar.start << " *)\n";
  for (const auto& p : grammar.productions) {
    out << p.lhs << " ::=";
    if (p.rhs.empty()) out << " (* empty *)";
    for (const auto& s : p.rhs) out << ' ' << s;
    out << " ;\n";
  }
  out << "\n(* tokens *)\n";
  for (const auto& t : grammar.tokens) {
    if (t.is_literal)
      out << "token " << t.name << " ;\n";
    else
      out << "token " << t.name << " = /" << t.pattern << "/ ; (* priority " << t.priority << " *)\n";
  }
  for (const auto& s : grammar.skip_patterns) out << "skip /" << s << "/ ;\n";
  if (!grammar.precedes.empty() || !grammar.associativity.empty() || !grammar.composition.empty() ||
      !grammar.priority.empty()) {
    out << "\n(* disambiguation *)\n";
    for (const auto& [a, b] : grammar.precedes) out << "(* precedes: " << a << " < " << b << " *)\n";
    for (const auto& [e, k] : grammar.associativity) out << "(* associativity: " << e << " " << k << " *)\n";
    for (const auto& [e, k] : grammar.composition) out << "(* composition: " << e << " " << k << " *)\n";
    for (const auto& [e, n] : grammar.priority) out << "(* priority: " << e << " " << n << " *)\n";
  }
  return out.str();
}

nlohmann::ordered_json grammar_to_json(const Grammar& grammar) {
  using J = nlohmann::ordered_json;
  J tokens = J::array();
  for (const auto& t : grammar.tokens)
    tokens.push_back(J{{"name", t.name}, {"pattern", t.pattern}, {"priority", t.priority}, {"literal", t.is_literal}});
  J productions = J::array();
  for (const auto& p : grammar.productions) {
    J prov{{"kind", to_string(p.provenance.kind)}};
    if (!p.provenance.element.empty()) prov["element"] = p.provenance.element;
    if (!p.provenance.member.empty()) prov["member"] = p.provenance.member;
    if (!p.provenance.variant.empty()) prov["variant"] = p.provenance.variant;
    J roles = J::array();
    for (const auto& r : p.roles) {
      if (r.kind == SymbolRole::Kind::Member)
        roles.push_back(r.member);
      else
        roles.push_back(r.kind == SymbolRole::Kind::Delimiter ? J(nullptr) : J("inner"));
    }
    productions.push_back(J{{"lhs", p.lhs}, {"rhs", p.rhs}, {"roles", roles}, {"provenance", prov}});
  }
  J members = J::array();
  for (const auto& [key, m] : grammar.members) {
    J entry{{"element", key.first}, {"member", key.second}};
    if (!m.target.empty()) entry["target"] = m.target;
    entry["min"] = m.min;
    entry["max"] = bound_text(m.max);
    if (m.is_id) entry["id"] = true;
    if (m.is_reference) entry["reference"] = true;
    members.push_back(std::move(entry));
  }
  J precedes = J::array();
  for (const auto& [a, b] : grammar.precedes) precedes.push_back(J::array({a, b}));
  J assoc = J::object(), comp = J::object(), prio = J::object();
  for (const auto& [e, k] : grammar.associativity) assoc[e] = k;
  for (const auto& [e, k] : grammar.composition) comp[e] = k;
  for (const auto& [e, n] : grammar.priority) prio[e] = n;
  return J{{"start", grammar.start},
           {"tokens", tokens},
           {"skip", grammar.skip_patterns},
           {"productions", productions},
           {"members", members},
           {"disambiguation", J{{"precedes", precedes}, {"associativity", assoc}, {"composition", comp}, {"priority", prio}}}};
}

std::vector<std::string> undefined_symbols(const Grammar& grammar) {
  std::set<std::string> lhs;
  for (const auto& p : grammar.productions) lhs.insert(p.lhs);
  std::set<std::string> out;
  for (const auto& p : grammar.productions)
    for (const auto& s : p.rhs)
      if (!lhs.count(s) && !grammar.is_terminal(s)) out.insert(s);
  return {out.begin(), out.end()};
}

}  // namespace mcc
