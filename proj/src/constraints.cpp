#include "mcc/constraints.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace mcc {

std::string ConstraintKey::target() const { return member.empty() ? element : element + "." + member; }

std::string ConstraintKey::str() const { return target() + "[" + std::string(keyword_of(kind)) + "]"; }

const ConstraintValue* CanonicalConstraintSet::find(const std::string& element, const std::string& member,
                                                    ConstraintKind kind) const {
  auto it = entries.find(ConstraintKey{element, member, kind});
  return it == entries.end() ? nullptr : &it->second;
}

namespace {

bool asm_optional(const MemberDef& m) { return m.min == 0; }

std::size_t to_size(const ConstraintValue& v) {
  if (std::holds_alternative<Unbounded>(v)) return kUnbounded;
  return static_cast<std::size_t>(std::get<std::int64_t>(v));
}

// Pattern constraints written against a token's value member are stored on
// the token element itself; the member choice becomes a Value entry when the
// token has more than one member.
ConstraintKey normalize_key(const Model& model, ConstraintKey key, std::optional<ConstraintKey>* value_key,
                            std::optional<ConstraintValue>* value_val) {
  if (key.kind != ConstraintKind::Pattern || key.member.empty()) return key;
  const auto* e = model.find(key.element);
  if (!e || e->kind != ElementKind::token) return key;
  if (e->members.size() > 1 && value_key) {
    *value_key = ConstraintKey{key.element, "", ConstraintKind::Value};
    *value_val = Keyword{key.member};
  }
  key.member.clear();
  return key;
}

// ---------------------------------------------------------------------------
// Lowering

struct Lowering {
  const Model& model;
  CanonicalConstraintSet set;
  Diagnostics diags;

  void put(ConstraintKey key, ConstraintValue value, const SourceSpan& where) {
    std::optional<ConstraintKey> vkey;
    std::optional<ConstraintValue> vval;
    key = normalize_key(model, std::move(key), &vkey, &vval);
    store(std::move(key), std::move(value), where);
    if (vkey) store(std::move(*vkey), std::move(*vval), where);
  }

  void store(ConstraintKey key, ConstraintValue value, const SourceSpan& where) {
    if (auto it = set.entries.find(key); it != set.entries.end()) {
      Diagnostic d = make_warning("duplicate-constraint", key.str() + " is set more than once; the last one wins", where);
      if (auto o = set.origins.find(key); o != set.origins.end()) d.related = o->second;
      diags.push_back(std::move(d));
    }
    set.entries[key] = std::move(value);
    set.origins[key] = where;
  }

  void warn_unknown(const ElementPath& path, const PathTarget& target, const SourceSpan& where) {
    std::string what = target.resolved_prefix.empty() ? "unknown element " + path.segments.front()
                                                      : "unknown member " + path.str();
    diags.push_back(make_warning("unknown-target", what + "; constraint ignored", where));
  }

  void error(std::string code, std::string message, const SourceSpan& where) {
    diags.push_back(make_error(std::move(code), std::move(message), where));
  }

  void lower_definition(const ConstraintDefinition& def) {
    if (def.target.segments.size() > 2) {
      diags.push_back(
          make_warning("nested-path", "nested paths unsupported: " + def.target.str() + "; constraint ignored", def.span));
      return;
    }
    PathTarget target = resolve_path(model, def.target);
    if (target.kind == PathTarget::Kind::missing) {
      warn_unknown(def.target, target, def.span);
      return;
    }
    if (def.constraint_id) {
      lower_property(def, target);
      return;
    }
    if (!def.constraint) return;
    const ElementDef& e = *target.element;
    const ConstraintSpec& spec = *def.constraint;
    if (e.kind == ElementKind::token) {
      if (spec.kind != ConstraintSpec::Kind::PatternLiteral) {
        error("unsupported-form", "token " + e.name + " expects a quoted pattern", def.span);
        return;
      }
      put({e.name, target.member ? target.member->name : "", ConstraintKind::Pattern}, PatternText{spec.text},
          def.span);
      return;
    }
    if (e.kind == ElementKind::alternative) {
      lower_alternative(e, spec, def.span);
      return;
    }
    lower_grammar_like(e, target.member, spec, def.span);
  }

  // `E.m[kind]: value`
  void lower_property(const ConstraintDefinition& def, const PathTarget& target) {
    ConstraintKind kind = *def.constraint_id;
    const ElementDef& e = *target.element;
    std::string member = target.member ? target.member->name : "";

    if (kind == ConstraintKind::Precedes) {
      if (!member.empty()) {
        error("precedes-member", "precedes applies to elements, not members (" + def.target.str() + ")", def.span);
        return;
      }
      if (!def.constraint) {
        error("constraint-value", "precedes needs one or more element names", def.span);
        return;
      }
      std::vector<const ConstraintSpec*> names;
      const ConstraintSpec& spec = *def.constraint;
      if (spec.kind == ConstraintSpec::Kind::Sequence || spec.kind == ConstraintSpec::Kind::Alternation) {
        for (const auto& c : spec.children) names.push_back(&c);
      } else {
        names.push_back(&spec);
      }
      for (const auto* n : names) {
        if (n->kind != ConstraintSpec::Kind::ElementRef || n->path.segments.size() != 1) {
          error("constraint-value", "precedes needs element names", def.span);
          return;
        }
      }
      for (const auto* n : names) {
        const std::string& other = n->path.segments.front();
        if (!model.find(other)) {
          diags.push_back(make_warning("unknown-target", "unknown element " + other + "; constraint ignored", def.span));
          continue;
        }
        set.precedes.emplace(e.name, other);
      }
      return;
    }

    auto value = value_from_spec(kind, def.constraint ? &*def.constraint : nullptr);
    if (!value) {
      error("constraint-value",
            std::string("[") + std::string(keyword_of(kind)) + "] on " + def.target.str() + " has a malformed value",
            def.span);
      return;
    }
    if (auto err = shape_error(kind, *value)) {
      error("constraint-value", def.target.str() + "[" + std::string(keyword_of(kind)) + "] " + *err, def.span);
      return;
    }
    put({e.name, member, kind}, std::move(*value), def.span);
  }

  static std::optional<ConstraintValue> value_from_spec(ConstraintKind kind, const ConstraintSpec* spec) {
    using K = ConstraintSpec::Kind;
    switch (kind) {
      case ConstraintKind::Pattern:
        if (spec && spec->kind == K::PatternLiteral) return PatternText{spec->text};
        return std::nullopt;
      case ConstraintKind::Prefix:
      case ConstraintKind::Suffix:
      case ConstraintKind::Separator: {
        if (!spec) return std::nullopt;
        if (spec->kind == K::PatternLiteral) return Literals{{spec->text}};
        if (spec->kind == K::Alternation) {
          Literals lits;
          for (const auto& c : spec->children) {
            if (c.kind != K::PatternLiteral) return std::nullopt;
            lits.values.push_back(c.text);
          }
          return lits;
        }
        return std::nullopt;
      }
      case ConstraintKind::Optional:
      case ConstraintKind::ID:
      case ConstraintKind::Reference:
        if (!spec) return true;
        if (spec->kind == K::BooleanValue) return spec->boolean;
        return std::nullopt;
      case ConstraintKind::Minimum:
      case ConstraintKind::Priority:
        if (spec && spec->kind == K::IntegerValue) return spec->integer;
        return std::nullopt;
      case ConstraintKind::Maximum:
        if (spec && spec->kind == K::IntegerValue) return spec->integer;
        if (spec && spec->kind == K::PatternLiteral && spec->text == "*") return Unbounded{};
        return std::nullopt;
      case ConstraintKind::Associativity:
      case ConstraintKind::Composition:
      case ConstraintKind::Value:
        if (spec && spec->kind == K::ElementRef && spec->path.segments.size() == 1)
          return Keyword{spec->path.segments.front()};
        return std::nullopt;
      case ConstraintKind::Precedes:
      case ConstraintKind::MemberOrder:
        return std::nullopt;
    }
    return std::nullopt;
  }

  // `Alt: A < B < C` orders variants; `Alt: A | B` restates them.
  void lower_alternative(const ElementDef& e, const ConstraintSpec& spec, const SourceSpan& where) {
    using K = ConstraintSpec::Kind;
    std::vector<std::string> names;
    auto collect = [&](const ConstraintSpec& s) {
      for (const auto& c : s.children) {
        if (c.kind != K::ElementRef || c.path.segments.size() != 1) return false;
        names.push_back(c.path.segments.front());
      }
      return true;
    };
    if ((spec.kind != K::Precedence && spec.kind != K::Alternation) || !collect(spec)) {
      error("unsupported-form",
            "definition of alternative " + e.name + " must be a '<' chain or '|' list of its variants", where);
      return;
    }
    for (const auto& n : names) {
      if (!model.find(n)) {
        diags.push_back(make_warning("unknown-target", "unknown element " + n + "; constraint ignored", where));
        return;
      }
      if (std::find(e.variants.begin(), e.variants.end(), n) == e.variants.end())
        diags.push_back(make_warning("not-a-variant", n + " is not a variant of " + e.name, where));
    }
    if (spec.kind == K::Precedence)
      for (std::size_t i = 0; i + 1 < names.size(); ++i) set.precedes.emplace(names[i], names[i + 1]);
  }

  // -------------------------------------------------------------------------
  // Grammar-like definitions on composites

  struct Use {
    std::string member;
    std::optional<std::pair<std::size_t, std::size_t>> implied;  // from postfix operators and list idioms
    std::optional<std::string> separator, prefix, suffix;
    SourceSpan span;

    bool plain() const { return !implied && !separator && !prefix && !suffix; }
  };

  struct Item {
    bool literal = false;
    std::string text;  // literal
    Use use;
  };

  struct Rejected {
    Diagnostic diagnostic;
  };

  const ElementDef* current = nullptr;

  [[noreturn]] void reject(std::string message, const SourceSpan& where) {
    throw Rejected{make_error("unsupported-form", std::move(message), where)};
  }

  std::vector<Item> analyze_sequence(const ConstraintSpec& spec) {
    using K = ConstraintSpec::Kind;
    std::vector<const ConstraintSpec*> items;
    if (spec.kind == K::Sequence) {
      for (const auto& c : spec.children) items.push_back(&c);
    } else {
      items.push_back(&spec);
    }
    std::vector<Item> out;
    for (const auto* it : items) {
      // Explicit-list idiom: m (SEP m)*  or  m (SEP m)+
      if ((it->kind == K::Closure || it->kind == K::Positive) && it->inner().kind == K::Parenthesized &&
          !out.empty() && !out.back().literal && out.back().use.plain()) {
        auto raw = analyze_sequence(it->inner().inner());
        if (raw.size() == 2 && raw[0].literal && !raw[1].literal && raw[1].use.plain() &&
            raw[1].use.member == out.back().use.member) {
          out.back().use.separator = raw[0].text;
          out.back().use.implied = std::pair<std::size_t, std::size_t>{it->kind == K::Positive ? 2 : 1, kUnbounded};
          continue;
        }
      }
      auto more = analyze_item(*it);
      out.insert(out.end(), more.begin(), more.end());
    }
    return out;
  }

  std::vector<Item> analyze_item(const ConstraintSpec& spec) {
    using K = ConstraintSpec::Kind;
    switch (spec.kind) {
      case K::PatternLiteral: {
        Item i;
        i.literal = true;
        i.text = spec.text;
        return {i};
      }
      case K::ElementRef: {
        if (spec.path.segments.size() != 1 || !current->find_member(spec.path.segments.front())) {
          throw Rejected{make_warning("unknown-target",
                                      "unknown member " + current->name + "." + spec.path.str() + "; constraint ignored",
                                      spec.span)};
        }
        Item i;
        i.use.member = spec.path.segments.front();
        i.use.span = spec.span;
        return {i};
      }
      case K::Parenthesized:
        return group(spec.inner());
      case K::Sequence:
        return analyze_sequence(spec);
      case K::Closure:
      case K::Optional:
      case K::Positive: {
        auto inner = analyze_item(spec.inner());
        if (inner.size() != 1 || inner.front().literal)
          reject("postfix operator must apply to a single member", spec.span);
        Use& u = inner.front().use;
        auto base = u.implied.value_or(std::pair<std::size_t, std::size_t>{1, 1});
        if (spec.kind == K::Optional) u.implied = std::pair<std::size_t, std::size_t>{0, base.second};
        if (spec.kind == K::Closure) u.implied = std::pair<std::size_t, std::size_t>{0, kUnbounded};
        if (spec.kind == K::Positive) u.implied = std::pair<std::size_t, std::size_t>{base.first, kUnbounded};
        return inner;
      }
      default:
        reject(std::string(to_string(spec.kind)) + " is not supported in a grammar-like definition of " +
                   current->name,
               spec.span);
    }
  }

  // A parenthesized group attaches its literals to the single member it
  // contains.
  std::vector<Item> group(const ConstraintSpec& inner) {
    auto items = analyze_sequence(inner);
    auto attach = [&](Use& u, const Item* before, const Item* after) {
      if ((before && u.prefix) || (after && u.suffix)) reject("member has two delimiters on one side", u.span);
      if (before) u.prefix = before->text;
      if (after) u.suffix = after->text;
    };
    if (items.size() == 3 && items[0].literal && !items[1].literal && items[2].literal) {
      attach(items[1].use, &items[0], &items[2]);
      return {items[1]};
    }
    if (items.size() == 2 && items[0].literal && !items[1].literal) {
      attach(items[1].use, &items[0], nullptr);
      return {items[1]};
    }
    if (items.size() == 2 && !items[0].literal && items[1].literal) {
      attach(items[0].use, nullptr, &items[1]);
      return {items[0]};
    }
    return items;
  }

  void lower_grammar_like(const ElementDef& e, const MemberDef* member, const ConstraintSpec& spec,
                          const SourceSpan& where) {
    current = &e;
    std::vector<Item> items;
    try {
      items = member ? group(spec) : analyze_sequence(spec);
    } catch (Rejected& r) {
      diags.push_back(std::move(r.diagnostic));
      return;
    }

    if (member) {
      if (items.size() != 1 || items.front().literal || items.front().use.member != member->name) {
        error("unsupported-form",
              "definition of " + e.name + "." + member->name + " must mention that member; use [prefix] or [suffix] "
              "for lone delimiters",
              where);
        return;
      }
      emit_use(e, items.front().use, where);
      return;
    }

    std::vector<Use> uses;
    std::set<std::string> mentioned;
    for (const auto& i : items) {
      if (i.literal) continue;
      if (!mentioned.insert(i.use.member).second) {
        error("unsupported-form", "member " + e.name + "." + i.use.member + " is mentioned twice", where);
        return;
      }
    }
    bool complete = mentioned.size() == e.members.size();
    std::optional<std::string> element_prefix, element_suffix;

    // Attach top-level literals: leading and trailing ones go to the element
    // when every member is mentioned, to the neighbouring member otherwise;
    // interior ones prefix the following member.
    std::optional<std::string> pending;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (items[k].literal) {
        if (pending) {
          error("unsupported-form", "consecutive literals in definition of " + e.name, where);
          return;
        }
        pending = items[k].text;
        continue;
      }
      Use u = items[k].use;
      if (pending) {
        if (uses.empty() && complete) {
          element_prefix = pending;
        } else if (!u.prefix) {
          u.prefix = pending;
        } else if (!uses.empty() && !uses.back().suffix) {
          uses.back().suffix = pending;
        } else {
          error("unsupported-form", "literal " + quote(*pending) + " has no free member slot", where);
          return;
        }
        pending.reset();
      }
      uses.push_back(std::move(u));
    }
    if (pending) {
      if (complete) {
        if (element_prefix && uses.empty()) {
          error("unsupported-form", "consecutive literals in definition of " + e.name, where);
          return;
        }
        if (uses.empty())
          element_prefix = pending;
        else
          element_suffix = pending;
      } else if (!uses.empty() && !uses.back().suffix) {
        uses.back().suffix = pending;
      } else {
        error("unsupported-form", "literal " + quote(*pending) + " has no free member slot", where);
        return;
      }
    }

    if (element_prefix) put({e.name, "", ConstraintKind::Prefix}, Literals{{*element_prefix}}, where);
    if (element_suffix) put({e.name, "", ConstraintKind::Suffix}, Literals{{*element_suffix}}, where);
    for (const auto& u : uses) emit_use(e, u, where);

    std::vector<std::string> order, declared;
    for (const auto& u : uses) order.push_back(u.member);
    for (const auto& m : e.members)
      if (mentioned.count(m.name)) declared.push_back(m.name);
    if (order != declared) {
      if (complete) {
        put({e.name, "", ConstraintKind::MemberOrder}, NameList{order}, where);
      } else {
        diags.push_back(make_warning("partial-order",
                                     "member order in partial definition of " + e.name +
                                         " differs from the model; order ignored",
                                     where));
      }
    }
  }

  void emit_use(const ElementDef& e, const Use& u, const SourceSpan& where) {
    if (u.prefix) put({e.name, u.member, ConstraintKind::Prefix}, Literals{{*u.prefix}}, where);
    if (u.suffix) put({e.name, u.member, ConstraintKind::Suffix}, Literals{{*u.suffix}}, where);
    if (u.separator) put({e.name, u.member, ConstraintKind::Separator}, Literals{{*u.separator}}, where);
    if (!u.implied) return;
    // Only the shape (optional or not, repeated or not) is asserted; the
    // model owns the exact bounds.
    const MemberDef& m = *e.find_member(u.member);
    bool implied_optional = u.implied->first == 0;
    bool implied_repeats = u.implied->second > 1;
    if (implied_optional != asm_optional(m)) put({e.name, u.member, ConstraintKind::Optional}, implied_optional, where);
    if (implied_repeats != m.repeats())
      put({e.name, u.member, ConstraintKind::Maximum},
          implied_repeats ? ConstraintValue{Unbounded{}} : ConstraintValue{std::int64_t{1}}, where);
  }
};

}  // namespace

// ---------------------------------------------------------------------------

CanonicalConstraintSet defaults_from_model(const Model& model) {
  CanonicalConstraintSet set;
  auto add = [&](ConstraintKey key, const AnnotationConstraint& a) {
    std::optional<ConstraintKey> vkey;
    std::optional<ConstraintValue> vval;
    key = normalize_key(model, std::move(key), &vkey, &vval);
    set.entries[key] = a.value;
    set.origins[key] = a.span;
    if (vkey && !set.entries.count(*vkey)) {
      set.entries[*vkey] = *vval;
      set.origins[*vkey] = a.span;
    }
  };
  for (const auto& e : model.elements) {
    for (const auto& a : e.default_constraints) add({e.name, "", a.kind}, a);
    for (const auto& m : e.members)
      for (const auto& a : m.default_constraints) add({e.name, m.name, a.kind}, a);
  }
  return set;
}

std::pair<CanonicalConstraintSet, Diagnostics> lower(const MappingDocument& doc, const Model& model) {
  Lowering l{model, {}, {}};
  for (const auto& def : doc.definitions) l.lower_definition(def);
  return {std::move(l.set), std::move(l.diags)};
}

std::set<ElementPair> transitive_closure(const std::set<ElementPair>& pairs) {
  std::set<ElementPair> closed = pairs;
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<ElementPair> add;
    for (const auto& [a, b] : closed)
      for (auto it = closed.lower_bound({b, ""}); it != closed.end() && it->first == b; ++it)
        if (!closed.count({a, it->second})) add.emplace_back(a, it->second);
    for (auto& p : add) grew |= closed.insert(std::move(p)).second;
  }
  return closed;
}

std::vector<std::string> find_cycle(const std::set<ElementPair>& pairs) {
  std::map<std::string, std::vector<std::string>> next;
  for (const auto& [a, b] : pairs) next[a].push_back(b);
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::vector<std::string> cycle;
  std::function<bool(const std::string&)> visit = [&](const std::string& n) {
    state[n] = 1;
    stack.push_back(n);
    for (const auto& m : next[n]) {
      if (state[m] == 1) {
        auto from = std::find(stack.begin(), stack.end(), m);
        cycle.assign(from, stack.end());
        cycle.push_back(m);
        return true;
      }
      if (state[m] == 0 && visit(m)) return true;
    }
    stack.pop_back();
    state[n] = 2;
    return false;
  };
  for (const auto& [a, _] : next)
    if (state[a] == 0 && visit(a)) return cycle;
  return {};
}

namespace {

Diagnostics cycle_diagnostics(const std::set<ElementPair>& pairs) {
  Diagnostics diags;
  auto cycle = find_cycle(pairs);
  if (!cycle.empty()) {
    std::string path;
    for (std::size_t i = 0; i < cycle.size(); ++i) path += (i ? " < " : "") + cycle[i];
    diags.push_back(make_error("precedes-cycle", "cyclic precedence: " + path));
  }
  return diags;
}

}  // namespace

std::pair<CanonicalConstraintSet, Diagnostics> merge(const CanonicalConstraintSet& defaults,
                                                     const std::vector<CanonicalConstraintSet>& overrides) {
  CanonicalConstraintSet out = defaults;
  for (const auto& o : overrides) {
    for (const auto& [key, value] : o.entries) {
      out.entries[key] = value;
      if (auto it = o.origins.find(key); it != o.origins.end()) out.origins[key] = it->second;
    }
    out.precedes.insert(o.precedes.begin(), o.precedes.end());
  }
  out.precedes = transitive_closure(out.precedes);
  auto diags = cycle_diagnostics(out.precedes);
  return {std::move(out), std::move(diags)};
}

EffectiveMember effective_member(const CanonicalConstraintSet& set, const ElementDef& element,
                                 const MemberDef& member) {
  EffectiveMember eff{member.min, member.max, member.is_id, member.is_reference};
  if (const auto* v = set.find(element.name, member.name, ConstraintKind::Minimum)) eff.min = to_size(*v);
  if (const auto* v = set.find(element.name, member.name, ConstraintKind::Maximum)) eff.max = to_size(*v);
  if (const auto* v = set.find(element.name, member.name, ConstraintKind::Optional)) {
    if (std::get<bool>(*v))
      eff.min = 0;
    else if (eff.min == 0)
      eff.min = 1;
  }
  if (const auto* v = set.find(element.name, member.name, ConstraintKind::ID)) eff.is_id = std::get<bool>(*v);
  if (const auto* v = set.find(element.name, member.name, ConstraintKind::Reference))
    eff.is_reference = std::get<bool>(*v);
  return eff;
}

std::vector<const MemberDef*> effective_order(const CanonicalConstraintSet& set, const ElementDef& element) {
  std::vector<const MemberDef*> out;
  if (const auto* v = set.find(element.name, ConstraintKind::MemberOrder)) {
    for (const auto& name : std::get<NameList>(*v).names)
      if (const auto* m = element.find_member(name)) out.push_back(m);
    if (out.size() == element.members.size()) return out;
    out.clear();
  }
  for (const auto& m : element.members) out.push_back(&m);
  return out;
}

Diagnostics check_consistency(const CanonicalConstraintSet& set, const Model& model) {
  Diagnostics out;
  auto at = [&](const ConstraintKey& key) {
    auto it = set.origins.find(key);
    return it == set.origins.end() ? SourceSpan{} : it->second;
  };
  auto conflict = [&](const ConstraintKey& key, const std::string& message) {
    out.push_back(make_error("multiplicity-conflict", key.str() + ": " + message, at(key)));
  };
  auto misplaced = [&](const ConstraintKey& key, const std::string& message) {
    out.push_back(make_warning("misplaced-constraint", key.str() + ": " + message + "; ignored", at(key)));
  };

  for (const auto& [key, value] : set.entries) {
    const ElementDef* e = model.find(key.element);
    if (!e) {
      out.push_back(make_warning("unknown-target", "unknown element " + key.element + "; constraint ignored", at(key)));
      continue;
    }
    if (auto err = shape_error(key.kind, value)) {
      out.push_back(make_error("constraint-value", key.str() + " " + *err, at(key)));
      continue;
    }

    if (!key.member.empty()) {
      const MemberDef* m = e->find_member(key.member);
      if (!m) {
        out.push_back(
            make_warning("unknown-target", "unknown member " + key.target() + "; constraint ignored", at(key)));
        continue;
      }
      switch (key.kind) {
        case ConstraintKind::Prefix:
        case ConstraintKind::Suffix:
          if (e->kind == ElementKind::token) misplaced(key, "delimiters on token members are not supported");
          break;
        case ConstraintKind::Separator: {
          auto eff = effective_member(set, *e, *m);
          if (eff.max <= 1)
            out.push_back(make_warning("separator-single",
                                       key.str() + ": separator on a member that does not repeat; ignored", at(key)));
          break;
        }
        case ConstraintKind::Optional:
          if (std::get<bool>(value) != asm_optional(*m))
            conflict(key, std::get<bool>(value) ? "member is mandatory in the model" : "member is optional in the model");
          break;
        case ConstraintKind::Maximum: {
          std::size_t v = to_size(value);
          if (v > m->max)
            conflict(key, "exceeds the model's maximum " + multiplicity_suffix(m->min, m->max));
          else if (v == 1 && m->repeats())
            conflict(key, "member repeats in the model");
          else if (v < m->min)
            conflict(key, "is below the model's minimum");
          break;
        }
        case ConstraintKind::Minimum: {
          std::size_t v = to_size(value);
          if (v < m->min)
            conflict(key, "is below the model's minimum");
          else if (v > m->max)
            conflict(key, "exceeds the model's maximum");
          else if (v > 0 && m->min == 0)
            conflict(key, "member is optional in the model");
          break;
        }
        case ConstraintKind::ID:
        case ConstraintKind::Reference: {
          auto eff = effective_member(set, *e, *m);
          if (eff.is_id && eff.is_reference)
            out.push_back(make_error("id-reference", key.target() + " cannot be both id and reference", at(key)));
          else if (eff.is_id && (m->is_value() || model.find(m->target)->kind != ElementKind::token))
            out.push_back(make_error("id-target", key.target() + " must target a token element to be an id", at(key)));
          else if (eff.is_reference && (m->is_value() || !id_token_of(model, m->target)))
            out.push_back(
                make_error("reference-target", key.target() + " targets an element without a single id member", at(key)));
          break;
        }
        case ConstraintKind::Pattern:
          out.push_back(make_error("pattern-non-token", key.str() + ": patterns apply to token elements", at(key)));
          break;
        default:
          misplaced(key, "not applicable to members");
      }
      continue;
    }

    switch (key.kind) {
      case ConstraintKind::Pattern:
        if (e->kind != ElementKind::token)
          out.push_back(make_error("pattern-non-token", key.str() + ": " + e->name + " is not a token element", at(key)));
        break;
      case ConstraintKind::Value:
        if (e->kind != ElementKind::token)
          misplaced(key, "only token elements store matched text");
        else if (!e->find_member(std::get<Keyword>(value).word))
          out.push_back(make_error("value-member", key.str() + " names an unknown member", at(key)));
        break;
      case ConstraintKind::Prefix:
      case ConstraintKind::Suffix:
        if (e->kind == ElementKind::token) misplaced(key, "delimiters on token elements are not supported");
        break;
      case ConstraintKind::Associativity: {
        bool nests = false;
        for (const auto& m : e->members)
          if (!m.is_value() && subtypes_of(model, m.target).count(e->name)) nests = true;
        if (!nests)
          out.push_back(make_warning("associativity-no-nesting",
                                     key.str() + ": " + e->name + " has no member that can hold another " + e->name,
                                     at(key)));
        break;
      }
      case ConstraintKind::Composition:
        if (e->kind != ElementKind::composite) misplaced(key, "composition applies to composite elements");
        break;
      case ConstraintKind::Priority:
        break;
      case ConstraintKind::MemberOrder: {
        auto names = std::get<NameList>(value).names;
        std::vector<std::string> declared;
        for (const auto& m : e->members) declared.push_back(m.name);
        auto sorted_names = names, sorted_declared = declared;
        std::sort(sorted_names.begin(), sorted_names.end());
        std::sort(sorted_declared.begin(), sorted_declared.end());
        if (sorted_names != sorted_declared)
          out.push_back(make_error("member-order", key.str() + " is not a permutation of the members of " + e->name,
                                   at(key)));
        else if (names != declared)
          out.push_back(make_info("member-order", e->name + " is written in a different order than declared", at(key)));
        break;
      }
      default:
        misplaced(key, "not applicable to elements");
    }
  }

  for (const auto& [a, b] : set.precedes)
    for (const auto& n : {a, b})
      if (!model.find(n)) out.push_back(make_warning("unknown-target", "unknown element " + n + " in precedence"));
  append(out, cycle_diagnostics(set.precedes));
  return out;
}

CanonicalConstraintSet canonicalize(const CanonicalConstraintSet& set, const Model& model) {
  CanonicalConstraintSet out;
  out.precedes = set.precedes;
  for (const auto& [key, value] : set.entries) {
    const ElementDef* e = model.find(key.element);
    const MemberDef* m = e && !key.member.empty() ? e->find_member(key.member) : nullptr;
    bool redundant = false;
    ConstraintValue v = value;
    if (auto* lits = std::get_if<Literals>(&v)) {
      std::sort(lits->values.begin(), lits->values.end());
      lits->values.erase(std::unique(lits->values.begin(), lits->values.end()), lits->values.end());
    }
    if (m) {
      switch (key.kind) {
        case ConstraintKind::Optional:
          redundant = std::holds_alternative<bool>(v) && std::get<bool>(v) == asm_optional(*m);
          break;
        case ConstraintKind::Minimum:
          redundant = std::holds_alternative<std::int64_t>(v) && to_size(v) == m->min;
          break;
        case ConstraintKind::Maximum:
          redundant = (std::holds_alternative<std::int64_t>(v) || std::holds_alternative<Unbounded>(v)) &&
                      to_size(v) == m->max;
          break;
        case ConstraintKind::ID:
          redundant = std::holds_alternative<bool>(v) && std::get<bool>(v) == m->is_id;
          break;
        case ConstraintKind::Reference:
          redundant = std::holds_alternative<bool>(v) && std::get<bool>(v) == m->is_reference;
          break;
        default:
          break;
      }
    } else if (e && key.member.empty()) {
      if (key.kind == ConstraintKind::MemberOrder) {
        if (const auto* names = std::get_if<NameList>(&v)) {
          std::vector<std::string> declared;
          for (const auto& mem : e->members) declared.push_back(mem.name);
          redundant = names->names == declared;
        }
      } else if (key.kind == ConstraintKind::Value && e->kind == ElementKind::token && e->members.size() == 1) {
        if (const auto* k = std::get_if<Keyword>(&v)) redundant = k->word == e->members.front().name;
      }
    }
    if (redundant) continue;
    out.entries[key] = std::move(v);
    if (auto it = set.origins.find(key); it != set.origins.end()) out.origins[key] = it->second;
  }

  // Priorities order the variants of each alternative: a lower value binds
  // tighter.
  for (const auto& alt : model.elements) {
    if (alt.kind != ElementKind::alternative) continue;
    for (const auto& x : alt.variants)
      for (const auto& y : alt.variants) {
        const auto* px = out.find(x, ConstraintKind::Priority);
        const auto* py = out.find(y, ConstraintKind::Priority);
        if (!px || !py) continue;
        const auto* ix = std::get_if<std::int64_t>(px);
        const auto* iy = std::get_if<std::int64_t>(py);
        if (ix && iy && *ix < *iy) out.precedes.emplace(x, y);
      }
  }
  out.precedes = transitive_closure(out.precedes);
  return out;
}

bool equivalent(const CanonicalConstraintSet& a, const CanonicalConstraintSet& b) { return a == b; }

std::vector<std::string> describe_differences(const CanonicalConstraintSet& a, const CanonicalConstraintSet& b) {
  std::vector<std::string> out;
  for (const auto& [key, value] : a.entries) {
    auto it = b.entries.find(key);
    if (it == b.entries.end())
      out.push_back("missing in second: " + key.str() + " = " + to_display(value));
    else if (!(it->second == value))
      out.push_back("differs: " + key.str() + " = " + to_display(value) + " vs " + to_display(it->second));
  }
  for (const auto& [key, value] : b.entries)
    if (!a.entries.count(key)) out.push_back("missing in first: " + key.str() + " = " + to_display(value));
  for (const auto& p : a.precedes)
    if (!b.precedes.count(p)) out.push_back("missing in second: " + p.first + " precedes " + p.second);
  for (const auto& p : b.precedes)
    if (!a.precedes.count(p)) out.push_back("missing in first: " + p.first + " precedes " + p.second);
  return out;
}

nlohmann::json to_json(const CanonicalConstraintSet& set) {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [key, value] : set.entries) entries[key.target()][std::string(keyword_of(key.kind))] = to_json(value);
  nlohmann::json precedes = nlohmann::json::array();
  for (const auto& [a, b] : set.precedes) precedes.push_back({a, b});
  return {{"entries", entries}, {"precedes", precedes}};
}

}  // namespace mcc
