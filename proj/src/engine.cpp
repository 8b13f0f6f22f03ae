#include "mcc/engine.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "mcc/pattern.hpp"

namespace mcc {

// ---------------------------------------------------------------------------
// Lexing

namespace {

class SpanMaker {
 public:
  SpanMaker(std::string_view input, std::string_view file) : file_(file) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < input.size(); ++i)
      if (input[i] == '\n') starts_.push_back(i + 1);
  }

  SourceSpan operator()(std::size_t offset, std::size_t length) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    std::size_t line = static_cast<std::size_t>(it - starts_.begin());
    return SourceSpan{file_, offset, length, line, offset - starts_[line - 1] + 1};
  }

 private:
  std::string file_;
  std::vector<std::size_t> starts_;
};

}  // namespace

std::pair<std::vector<TokenInstance>, Diagnostics> lex(const Grammar& grammar, std::string_view input,
                                                       std::string_view file_name) {
  std::vector<TokenInstance> out;
  Diagnostics diags;
  SpanMaker span(input, file_name);

  std::vector<Pattern> skips;
  for (const auto& s : grammar.skip_patterns) skips.push_back(Pattern::compile(s));
  std::vector<std::optional<Pattern>> patterns;
  for (const auto& t : grammar.tokens) {
    if (t.is_literal)
      patterns.emplace_back();
    else
      patterns.emplace_back(Pattern::compile(t.pattern));
  }

  std::size_t pos = 0;
  std::optional<std::size_t> bad_start;
  auto flush_bad = [&](std::size_t upto) {
    if (!bad_start) return;
    std::string text(input.substr(*bad_start, upto - *bad_start));
    diags.push_back(make_error("lex-error", "unexpected input '" + text + "'", span(*bad_start, upto - *bad_start)));
    bad_start.reset();
  };

  while (pos < input.size()) {
    std::size_t skip_len = 0;
    for (const auto& p : skips)
      if (auto m = p.match_at(input, pos)) skip_len = std::max(skip_len, *m);

    std::size_t best_len = 0;
    const TokenSpec* best = nullptr;
    for (std::size_t i = 0; i < grammar.tokens.size(); ++i) {
      const TokenSpec& t = grammar.tokens[i];
      std::size_t len = 0;
      if (t.is_literal) {
        if (!t.pattern.empty() && input.substr(pos).substr(0, t.pattern.size()) == t.pattern) len = t.pattern.size();
      } else if (auto m = patterns[i]->match_at(input, pos)) {
        len = *m;
      }
      if (len == 0) continue;
      if (len > best_len || (len == best_len && t.priority < best->priority)) {
        best_len = len;
        best = &t;
      }
    }

    if (skip_len > 0 && skip_len >= best_len) {
      flush_bad(pos);
      pos += skip_len;
    } else if (best) {
      flush_bad(pos);
      out.push_back(TokenInstance{best->name, std::string(input.substr(pos, best_len)), span(pos, best_len)});
      pos += best_len;
    } else {
      if (!bad_start) bad_start = pos;
      ++pos;
    }
  }
  flush_bad(pos);
  return {std::move(out), std::move(diags)};
}

// ---------------------------------------------------------------------------
// Earley recognition

namespace {

struct Item {
  int prod;
  int dot;
  std::size_t origin;
  bool operator==(const Item&) const = default;
};

struct ItemHash {
  std::size_t operator()(const Item& i) const {
    return std::hash<std::uint64_t>()((static_cast<std::uint64_t>(i.prod) << 44) ^
                                      (static_cast<std::uint64_t>(i.dot) << 32) ^ i.origin);
  }
};

struct CompiledGrammar {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;
  std::vector<char> terminal;
  std::vector<std::vector<int>> rhs;  // per production
  std::vector<int> lhs;
  std::vector<std::vector<int>> by_lhs;
  std::vector<char> nullable;

  explicit CompiledGrammar(const Grammar& g) {
    for (const auto& t : g.tokens) add(t.name, true);
    for (const auto& p : g.productions) add(p.lhs, false);
    by_lhs.resize(names.size());
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
      const auto& p = g.productions[i];
      lhs.push_back(ids.at(p.lhs));
      std::vector<int> r;
      for (const auto& s : p.rhs) r.push_back(add(s, false));
      rhs.push_back(std::move(r));
      by_lhs[lhs.back()].push_back(static_cast<int>(i));
    }
    by_lhs.resize(names.size());
    nullable.assign(names.size(), 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t p = 0; p < rhs.size(); ++p) {
        if (nullable[lhs[p]]) continue;
        if (std::all_of(rhs[p].begin(), rhs[p].end(), [&](int s) { return nullable[s]; })) {
          nullable[lhs[p]] = 1;
          changed = true;
        }
      }
    }
  }

  int add(const std::string& name, bool is_terminal) {
    auto [it, inserted] = ids.emplace(name, static_cast<int>(names.size()));
    if (inserted) {
      names.push_back(name);
      terminal.push_back(is_terminal);
    }
    return it->second;
  }

  int id(const std::string& name) const {
    auto it = ids.find(name);
    return it == ids.end() ? -1 : it->second;
  }
};

class Earley {
 public:
  Earley(const CompiledGrammar& cg, const std::vector<int>& input) : cg_(cg), input_(input) {
    sets_.resize(input.size() + 1);
    seen_.resize(input.size() + 1);
    completed_.resize(input.size() + 1);
  }

  void run(int start) {
    for (int p : cg_.by_lhs[start]) add(0, {p, 0, 0});
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      for (std::size_t k = 0; k < sets_[i].size(); ++k) {
        Item it = sets_[i][k];
        const auto& rhs = cg_.rhs[it.prod];
        if (static_cast<std::size_t>(it.dot) < rhs.size()) {
          int sym = rhs[it.dot];
          if (cg_.terminal[sym]) {
            if (i < input_.size() && input_[i] == sym) add(i + 1, {it.prod, it.dot + 1, it.origin});
          } else {
            for (int p : cg_.by_lhs[sym]) add(i, {p, 0, i});
            if (cg_.nullable[sym]) add(i, {it.prod, it.dot + 1, it.origin});
          }
        } else {
          int sym = cg_.lhs[it.prod];
          completed_[it.origin][sym].insert(i);
          // Items of the origin set waiting on sym; when origin == i the set
          // is still growing, so iterate by index.
          auto& origin = sets_[it.origin];
          for (std::size_t w = 0; w < origin.size(); ++w) {
            Item o = origin[w];
            const auto& orhs = cg_.rhs[o.prod];
            if (static_cast<std::size_t>(o.dot) < orhs.size() && orhs[o.dot] == sym)
              add(i, {o.prod, o.dot + 1, o.origin});
          }
        }
      }
    }
  }

  bool recognized(int start) const {
    auto it = completed_[0].find(start);
    return it != completed_[0].end() && it->second.count(input_.size());
  }

  const std::set<std::size_t>* ends(int sym, std::size_t begin) const {
    auto it = completed_[begin].find(sym);
    return it == completed_[begin].end() ? nullptr : &it->second;
  }

  const std::vector<std::vector<Item>>& sets() const { return sets_; }

 private:
  const CompiledGrammar& cg_;
  const std::vector<int>& input_;
  std::vector<std::vector<Item>> sets_;
  std::vector<std::unordered_set<Item, ItemHash>> seen_;
  std::vector<std::unordered_map<int, std::set<std::size_t>>> completed_;

  void add(std::size_t set, Item it) {
    if (seen_[set].insert(it).second) sets_[set].push_back(it);
  }
};

class ForestBuilder {
 public:
  ForestBuilder(const CompiledGrammar& cg, const Earley& chart, const std::vector<int>& input, ParseForest& forest)
      : cg_(cg), chart_(chart), input_(input), forest_(forest) {}

  std::size_t node(int sym, std::size_t begin, std::size_t end) {
    auto key = std::make_tuple(sym, begin, end);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::size_t index = forest_.nodes.size();
    memo_.emplace(key, index);
    forest_.nodes.push_back(ForestNode{cg_.names[sym], begin, end, {}});

    struct Part {
      int sym;
      std::size_t begin, end;
    };
    std::vector<std::pair<int, std::vector<Part>>> found;
    std::vector<Part> parts;
    std::function<void(int, std::size_t, std::size_t)> split = [&](int prod, std::size_t pos, std::size_t at) {
      const auto& rhs = cg_.rhs[prod];
      if (pos == rhs.size()) {
        if (at == end) found.emplace_back(prod, parts);
        return;
      }
      int s = rhs[pos];
      if (cg_.terminal[s]) {
        if (at < end && input_[at] == s) {
          parts.push_back({s, at, at + 1});
          split(prod, pos + 1, at + 1);
          parts.pop_back();
        }
        return;
      }
      const auto* ends = chart_.ends(s, at);
      if (!ends) return;
      for (std::size_t e : *ends) {
        if (e > end) break;
        if (pos + 1 == rhs.size() && e != end) continue;
        parts.push_back({s, at, e});
        split(prod, pos + 1, e);
        parts.pop_back();
      }
    };
    for (int p : cg_.by_lhs[sym]) split(p, 0, begin);

    for (const auto& [prod, ps] : found) {
      Derivation d{static_cast<std::size_t>(prod), {}};
      for (const auto& part : ps) {
        if (cg_.terminal[part.sym])
          d.children.push_back(ParseForest::token_child(part.begin));
        else
          d.children.push_back(static_cast<std::int64_t>(node(part.sym, part.begin, part.end)));
      }
      forest_.nodes[index].derivations.push_back(std::move(d));
    }
    return index;
  }

 private:
  const CompiledGrammar& cg_;
  const Earley& chart_;
  const std::vector<int>& input_;
  ParseForest& forest_;
  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> memo_;
};

}  // namespace

std::pair<ParseForest, Diagnostics> parse(const Grammar& grammar, std::vector<TokenInstance> tokens,
                                          std::optional<std::string> start) {
  ParseForest forest;
  forest.tokens = std::move(tokens);
  Diagnostics diags;
  std::string start_symbol = start.value_or(grammar.start);
  const auto& toks = forest.tokens;

  auto span_at = [&](std::size_t i) {
    if (i < toks.size()) return toks[i].span;
    if (toks.empty()) return SourceSpan{};
    SourceSpan s = toks.back().span;
    s.offset += s.length;
    s.column += s.length;
    s.length = 0;
    return s;
  };

  if (grammar.is_terminal(start_symbol)) {
    if (toks.size() == 1 && toks[0].name == start_symbol) {
      forest.nodes.push_back(ForestNode{start_symbol, 0, 1, {Derivation{kTokenDerivation, {ParseForest::token_child(0)}}}});
      forest.root = 0;
    } else {
      diags.push_back(make_error("parse-error",
                                 "expected a single " + start_symbol + " token, found " +
                                     std::to_string(toks.size()) + " tokens",
                                 span_at(toks.empty() || toks[0].name == start_symbol ? 1 : 0)));
    }
    return {std::move(forest), std::move(diags)};
  }

  CompiledGrammar cg(grammar);
  int start_id = cg.id(start_symbol);
  if (start_id < 0 || cg.terminal[start_id]) {
    diags.push_back(make_error("parse-error", "no productions for start symbol " + start_symbol));
    return {std::move(forest), std::move(diags)};
  }
  std::vector<int> input;
  for (const auto& t : toks) input.push_back(cg.id(t.name));

  Earley chart(cg, input);
  chart.run(start_id);
  if (!chart.recognized(start_id)) {
    std::size_t furthest = 0;
    for (std::size_t i = 0; i < chart.sets().size(); ++i)
      if (!chart.sets()[i].empty()) furthest = i;
    std::set<std::string> expected;
    for (const auto& it : chart.sets()[furthest]) {
      const auto& rhs = cg.rhs[it.prod];
      bool kernel = it.dot > 0 || (furthest == 0 && cg.lhs[it.prod] == start_id);
      if (kernel && static_cast<std::size_t>(it.dot) < rhs.size()) expected.insert(cg.names[rhs[it.dot]]);
    }
    std::string found = furthest < toks.size() ? "unexpected " + toks[furthest].name +
                                                     (toks[furthest].name == toks[furthest].text
                                                          ? std::string()
                                                          : " '" + toks[furthest].text + "'")
                                               : std::string("unexpected end of input");
    std::string list;
    for (const auto& e : expected) list += (list.empty() ? "" : ", ") + e;
    diags.push_back(make_error("parse-error",
                               "at position " + std::to_string(furthest) + ": " + found +
                                   (list.empty() ? std::string() : "; expected " + list),
                               span_at(furthest)));
    return {std::move(forest), std::move(diags)};
  }
  ForestBuilder builder(cg, chart, input, forest);
  forest.root = builder.node(start_id, 0, input.size());
  return {std::move(forest), std::move(diags)};
}

// ---------------------------------------------------------------------------
// Counting and enumeration

std::uint64_t count_trees(const ParseForest& forest) {
  if (!forest.root) return 0;
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<int> state(forest.nodes.size(), 0);
  std::vector<std::uint64_t> memo(forest.nodes.size(), 0);
  auto mul = [](std::uint64_t a, std::uint64_t b) { return a && b > kMax / a ? kMax : a * b; };
  auto add = [](std::uint64_t a, std::uint64_t b) { return b > kMax - a ? kMax : a + b; };
  std::function<std::uint64_t(std::size_t)> count = [&](std::size_t n) -> std::uint64_t {
    if (state[n] == 2) return memo[n];
    if (state[n] == 1) return 0;
    state[n] = 1;
    std::uint64_t total = 0;
    for (const auto& d : forest.nodes[n].derivations) {
      std::uint64_t ways = 1;
      for (auto c : d.children)
        if (c >= 0) ways = mul(ways, count(static_cast<std::size_t>(c)));
      total = add(total, ways);
    }
    state[n] = 2;
    memo[n] = total;
    return total;
  };
  return count(*forest.root);
}

namespace {

ParseTree token_leaf(std::size_t index) { return ParseTree{kTokenDerivation, index, index + 1, index, {}}; }

// Cartesian product of per-child alternatives, capped at `limit` trees.
std::vector<ParseTree> combine(const Derivation& d, const ForestNode& node,
                               const std::vector<std::vector<ParseTree>>& per_child, std::size_t limit) {
  std::vector<ParseTree> out{ParseTree{d.production, node.begin, node.end, std::nullopt, {}}};
  if (d.production == kTokenDerivation) out.front().token = 0;
  for (const auto& options : per_child) {
    std::vector<ParseTree> next;
    for (const auto& partial : out)
      for (const auto& option : options) {
        if (next.size() >= limit) break;
        ParseTree t = partial;
        t.children.push_back(option);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<ParseTree> enumerate_trees(const ParseForest& forest, std::size_t limit) {
  if (!forest.root) return {};
  std::vector<int> state(forest.nodes.size(), 0);
  std::vector<std::vector<ParseTree>> memo(forest.nodes.size());
  std::function<const std::vector<ParseTree>&(std::size_t)> trees = [&](std::size_t n) -> const std::vector<ParseTree>& {
    static const std::vector<ParseTree> none;
    if (state[n] == 2) return memo[n];
    if (state[n] == 1) return none;
    state[n] = 1;
    std::vector<ParseTree> out;
    for (const auto& d : forest.nodes[n].derivations) {
      std::vector<std::vector<ParseTree>> per_child;
      bool dead = false;
      for (auto c : d.children) {
        if (c < 0) {
          per_child.push_back({token_leaf(ParseForest::token_of(c))});
        } else {
          per_child.push_back(trees(static_cast<std::size_t>(c)));
          if (per_child.back().empty()) dead = true;
        }
      }
      if (dead) continue;
      for (auto& t : combine(d, forest.nodes[n], per_child, limit - std::min(limit, out.size())))
        out.push_back(std::move(t));
      if (out.size() >= limit) break;
    }
    state[n] = 2;
    memo[n] = std::move(out);
    return memo[n];
  };
  return trees(*forest.root);
}

std::string render_tree(const ParseTree& tree, const Grammar& grammar, const ParseForest& forest) {
  std::string out;
  std::function<void(const ParseTree&)> walk = [&](const ParseTree& t) {
    if (t.production == kTokenDerivation && t.token && t.children.empty()) {
      if (!out.empty() && out.back() != '(') out += ' ';
      out += forest.tokens[*t.token].text;
      return;
    }
    bool composite = t.production != kTokenDerivation &&
                     grammar.productions[t.production].provenance.kind == Provenance::Kind::Composite;
    if (composite) {
      if (!out.empty() && out.back() != '(') out += ' ';
      out += grammar.productions[t.production].provenance.element + "(";
    }
    for (const auto& c : t.children) walk(c);
    if (composite) out += ")";
  };
  walk(tree);
  return out;
}

// ---------------------------------------------------------------------------
// Disambiguation

namespace {

struct Cost {
  std::uint64_t priority = 0;
  std::uint64_t associativity = 0;

  Cost operator+(const Cost& o) const { return {priority + o.priority, associativity + o.associativity}; }
  auto operator<=>(const Cost&) const = default;
};

struct Context {
  std::string parent;  // empty at the root
  std::size_t begin = 0;
  std::size_t end = 0;
  auto operator<=>(const Context&) const = default;
};

struct Nesting {
  Cost cost;
  bool non_associative = false;
};

// Cost of placing an instance of `child` spanning [begin, end) directly
// inside the parent described by `ctx`.
Nesting nesting_cost(const Grammar& g, const Context& ctx, const std::string& child, std::size_t begin,
                     std::size_t end) {
  Nesting n;
  if (ctx.parent.empty()) return n;
  const std::string& parent = ctx.parent;
  if (g.binds_tighter(parent, child)) n.cost.priority = 1;
  bool same_class = parent == child;
  if (!same_class) {
    auto pp = g.priority.find(parent), pc = g.priority.find(child);
    same_class = pp != g.priority.end() && pc != g.priority.end() && pp->second == pc->second &&
                 !g.binds_tighter(parent, child) && !g.binds_tighter(child, parent);
  }
  if (!same_class) return n;
  auto assoc = g.associativity.find(parent);
  if (assoc == g.associativity.end()) return n;
  bool at_left = begin == ctx.begin, at_right = end == ctx.end;
  if (assoc->second == "left" && !at_left) n.cost.associativity = 1;
  if (assoc->second == "right" && !at_right) n.cost.associativity = 1;
  if (assoc->second == "non") {
    n.cost.associativity = 1;
    n.non_associative = true;
  }
  return n;
}

struct InstanceMark {
  std::string element;
  std::size_t begin, end;
  bool operator==(const InstanceMark&) const = default;
};

void instance_sequence(const ParseTree& t, const Grammar& g, std::vector<InstanceMark>& out) {
  if (t.production != kTokenDerivation) {
    const auto& prov = g.productions[t.production].provenance;
    if (prov.kind == Provenance::Kind::Composite) out.push_back({prov.element, t.begin, t.end});
  }
  for (const auto& c : t.children) instance_sequence(c, g, out);
}

// -1 when `a` is preferred, 1 when `b` is, 0 when composition cannot decide.
int compare_composition(const ParseTree& a, const ParseTree& b, const Grammar& g) {
  std::vector<InstanceMark> sa, sb;
  instance_sequence(a, g, sa);
  instance_sequence(b, g, sb);
  std::size_t i = 0;
  while (i < sa.size() && i < sb.size() && sa[i] == sb[i]) ++i;
  if (i == sa.size() || i == sb.size()) return 0;
  if (sa[i].begin != sb[i].begin || sa[i].end == sb[i].end) return 0;
  auto policy = g.composition.find(sa[i].element);
  if (policy == g.composition.end()) policy = g.composition.find(sb[i].element);
  if (policy == g.composition.end()) return 0;
  bool a_longer = sa[i].end > sb[i].end;
  if (policy->second == "eager") return a_longer ? -1 : 1;
  if (policy->second == "lazy") return a_longer ? 1 : -1;
  return 0;
}

constexpr std::size_t kCandidateLimit = 8;

struct Choice {
  bool valid = false;
  Cost cost;
  std::vector<ParseTree> trees;  // tied survivors
};

class Disambiguator {
 public:
  Disambiguator(const ParseForest& f, const Grammar& g) : f_(f), g_(g) {}

  Choice solve(std::size_t n, const Context& ctx) {
    auto key = std::make_pair(n, ctx);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (!active_.insert(key).second) return {};
    const ForestNode& node = f_.nodes[n];
    Choice best;
    for (const auto& d : node.derivations) {
      Cost cost;
      Context child_ctx = ctx;
      if (d.production != kTokenDerivation) {
        const auto& prov = g_.productions[d.production].provenance;
        if (prov.kind == Provenance::Kind::Composite) {
          cost = nesting_cost(g_, ctx, prov.element, node.begin, node.end).cost;
          child_ctx = Context{prov.element, node.begin, node.end};
        }
      }
      std::vector<std::vector<ParseTree>> per_child;
      bool dead = false;
      for (auto c : d.children) {
        if (c < 0) {
          per_child.push_back({token_leaf(ParseForest::token_of(c))});
          continue;
        }
        Choice sub = solve(static_cast<std::size_t>(c), child_ctx);
        if (!sub.valid) {
          dead = true;
          break;
        }
        cost = cost + sub.cost;
        per_child.push_back(std::move(sub.trees));
      }
      if (dead) continue;
      if (best.valid && cost > best.cost) continue;
      if (!best.valid || cost < best.cost) {
        best = Choice{true, cost, {}};
      }
      for (auto& t : combine(d, node, per_child, kCandidateLimit)) best.trees.push_back(std::move(t));
    }
    if (best.valid) best.trees = reduce(std::move(best.trees));
    active_.erase(key);
    memo_[key] = best;
    return best;
  }

 private:
  const ParseForest& f_;
  const Grammar& g_;
  std::map<std::pair<std::size_t, Context>, Choice> memo_;
  std::set<std::pair<std::size_t, Context>> active_;

  std::vector<ParseTree> reduce(std::vector<ParseTree> trees) {
    std::vector<ParseTree> unique;
    for (auto& t : trees)
      if (std::find(unique.begin(), unique.end(), t) == unique.end()) unique.push_back(std::move(t));
    if (unique.size() < 2) return unique;
    std::vector<ParseTree> kept;
    for (std::size_t i = 0; i < unique.size(); ++i) {
      bool beaten = false;
      for (std::size_t j = 0; j < unique.size() && !beaten; ++j)
        if (i != j && compare_composition(unique[j], unique[i], g_) < 0) beaten = true;
      if (!beaten) kept.push_back(unique[i]);
    }
    if (kept.size() > kCandidateLimit) kept.resize(kCandidateLimit);
    return kept;
  }
};

void report_non_associative(const ParseTree& t, const Context& ctx, const Grammar& g, const ParseForest& f,
                            Diagnostics& out) {
  Context child_ctx = ctx;
  if (t.production != kTokenDerivation) {
    const auto& prov = g.productions[t.production].provenance;
    if (prov.kind == Provenance::Kind::Composite) {
      if (nesting_cost(g, ctx, prov.element, t.begin, t.end).non_associative) {
        SourceSpan where = t.begin < f.tokens.size() ? f.tokens[t.begin].span : SourceSpan{};
        out.push_back(make_error("non-associative",
                                 prov.element + " cannot be nested directly inside " + ctx.parent +
                                     " (non-associative)",
                                 where));
      }
      child_ctx = Context{prov.element, t.begin, t.end};
    }
  }
  for (const auto& c : t.children) report_non_associative(c, child_ctx, g, f, out);
}

}  // namespace

std::pair<std::optional<ParseTree>, Diagnostics> disambiguate(const ParseForest& forest, const Grammar& grammar) {
  Diagnostics diags;
  if (!forest.root) {
    diags.push_back(make_error("empty-forest", "nothing to disambiguate"));
    return {std::nullopt, std::move(diags)};
  }
  Disambiguator d(forest, grammar);
  Choice choice = d.solve(*forest.root, Context{});
  if (!choice.valid || choice.trees.empty()) {
    diags.push_back(make_error("empty-forest", "the forest contains only cyclic derivations"));
    return {std::nullopt, std::move(diags)};
  }
  if (choice.trees.size() > 1) {
    std::string list;
    for (const auto& t : choice.trees) list += "\n  " + render_tree(t, grammar, forest);
    SourceSpan where = forest.tokens.empty() ? SourceSpan{} : forest.tokens.front().span;
    diags.push_back(make_error("ambiguous",
                               std::to_string(choice.trees.size()) + " derivations remain after disambiguation:" + list,
                               where));
  }
  report_non_associative(choice.trees.front(), Context{}, grammar, forest, diags);
  return {std::move(choice.trees.front()), std::move(diags)};
}

// ---------------------------------------------------------------------------
// Instances

const MemberSlot* Instance::slot(std::string_view name) const {
  for (const auto& s : members)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

class InstanceBuilder {
 public:
  InstanceBuilder(const ParseForest& f, const Grammar& g, const Model& m) : f_(f), g_(g), m_(m) {}

  InstanceGraph run(const ParseTree& tree) {
    if (tree.production == kTokenDerivation) {
      std::size_t index = tree.token.value_or(0);
      if (!tree.children.empty() && tree.children.front().token) index = *tree.children.front().token;
      const TokenInstance& tok = f_.tokens[index];
      Instance inst{0, tok.name, tok.span, {}, std::nullopt};
      std::string member = "value";
      if (const auto* e = m_.find(tok.name))
        if (const auto* vm = value_member_of(m_, *e)) member = vm->name;
      inst.members.push_back(MemberSlot{member, MemberSlot::Kind::single, {TokenValue{tok.name, tok.text}}});
      graph_.nodes.push_back(std::move(inst));
      graph_.roots.push_back(0);
      return std::move(graph_);
    }
    std::vector<InstanceValue> values;
    collect(tree, nullptr, values);
    for (const auto& v : values)
      if (const auto* n = std::get_if<NodeRef>(&v)) graph_.roots.push_back(n->id);
    return std::move(graph_);
  }

 private:
  const ParseForest& f_;
  const Grammar& g_;
  const Model& m_;
  InstanceGraph graph_;

  SourceSpan span_of(const ParseTree& t) const {
    if (f_.tokens.empty()) return {};
    if (t.begin >= f_.tokens.size()) {
      SourceSpan s = f_.tokens.back().span;
      s.offset += s.length;
      s.column += s.length;
      s.length = 0;
      return s;
    }
    SourceSpan s = f_.tokens[t.begin].span;
    if (t.end <= t.begin) {
      s.length = 0;
      return s;
    }
    const SourceSpan& last = f_.tokens[t.end - 1].span;
    s.length = last.offset + last.length - s.offset;
    return s;
  }

  void collect(const ParseTree& t, const GrammarMember* member, std::vector<InstanceValue>& out) {
    if (t.production == kTokenDerivation) {
      const TokenInstance& tok = f_.tokens[*t.token];
      if (member && member->is_reference)
        out.push_back(ReferenceValue{tok.text, member->target, std::nullopt, tok.span});
      else
        out.push_back(TokenValue{tok.name, tok.text});
      return;
    }
    const Production& p = g_.productions[t.production];
    if (p.provenance.kind == Provenance::Kind::Composite) {
      out.push_back(NodeRef{instantiate(t)});
      return;
    }
    for (std::size_t i = 0; i < t.children.size(); ++i)
      if (p.roles[i].kind != SymbolRole::Kind::Delimiter) collect(t.children[i], member, out);
  }

  std::size_t instantiate(const ParseTree& t) {
    const Production& p = g_.productions[t.production];
    const std::string& element = p.provenance.element;
    std::size_t id = graph_.nodes.size();
    graph_.nodes.push_back(Instance{id, element, span_of(t), {}, std::nullopt});

    std::vector<MemberSlot> slots;
    std::vector<const GrammarMember*> infos;
    if (const auto* e = m_.find(element)) {
      for (const auto& m : e->members) {
        const GrammarMember* gm = g_.member(element, m.name);
        MemberSlot::Kind kind = MemberSlot::Kind::single;
        if (gm && gm->max > 1)
          kind = MemberSlot::Kind::list;
        else if (gm && gm->min == 0)
          kind = MemberSlot::Kind::optional;
        slots.push_back(MemberSlot{m.name, kind, {}});
        infos.push_back(gm);
      }
    }
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      const SymbolRole& role = p.roles[i];
      if (role.kind != SymbolRole::Kind::Member) continue;
      for (std::size_t s = 0; s < slots.size(); ++s)
        if (slots[s].name == role.member) collect(t.children[i], infos[s], slots[s].values);
    }
    std::optional<std::string> id_text;
    for (std::size_t s = 0; s < slots.size(); ++s)
      if (infos[s] && infos[s]->is_id && !slots[s].values.empty())
        if (const auto* tv = std::get_if<TokenValue>(&slots[s].values.front())) id_text = tv->text;
    graph_.nodes[id].members = std::move(slots);
    graph_.nodes[id].id_text = std::move(id_text);
    return id;
  }
};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

InstanceGraph build_instances(const ParseTree& tree, const ParseForest& forest, const Grammar& grammar,
                              const Model& model) {
  return InstanceBuilder(forest, grammar, model).run(tree);
}

std::pair<InstanceGraph, Diagnostics> resolve_references(InstanceGraph graph, const Model& model) {
  Diagnostics diags;
  std::map<std::pair<std::string, std::string>, std::size_t> table;
  for (const auto& n : graph.nodes) {
    if (!n.id_text) continue;
    auto [it, inserted] = table.emplace(std::make_pair(n.element, *n.id_text), n.id);
    if (!inserted) {
      Diagnostic d = make_error("duplicate-id", "duplicate id '" + *n.id_text + "' for " + n.element, n.span);
      d.related = graph.nodes[it->second].span;
      diags.push_back(std::move(d));
    }
  }
  graph.edges.clear();
  for (auto& n : graph.nodes) {
    for (auto& slot : n.members) {
      for (auto& v : slot.values) {
        auto* ref = std::get_if<ReferenceValue>(&v);
        if (!ref) continue;
        auto compatible = subtypes_of(model, ref->target_element);
        std::vector<std::size_t> matches;
        for (const auto& e : compatible)
          if (auto it = table.find({e, ref->text}); it != table.end()) matches.push_back(it->second);
        if (matches.size() == 1) {
          ref->resolved = matches.front();
          graph.edges.push_back(ReferenceEdge{n.id, slot.name, matches.front()});
          continue;
        }
        if (matches.size() > 1) {
          diags.push_back(make_error("ambiguous-reference",
                                     "'" + ref->text + "' names several " + ref->target_element + " instances",
                                     ref->span));
          continue;
        }
        std::vector<std::string> near;
        for (const auto& [key, id] : table)
          if (compatible.count(key.first) && edit_distance(key.second, ref->text) <= 2) near.push_back(key.second);
        std::string message = "unresolved reference '" + ref->text + "' to " + ref->target_element;
        if (!near.empty()) {
          message += "; did you mean ";
          for (std::size_t i = 0; i < near.size(); ++i) message += (i ? ", '" : "'") + near[i] + "'";
        }
        diags.push_back(make_error("unresolved-reference", message, ref->span));
      }
    }
  }
  return {std::move(graph), std::move(diags)};
}

nlohmann::ordered_json graph_to_json(const InstanceGraph& graph) {
  using J = nlohmann::ordered_json;
  auto value = [](const InstanceValue& v) -> J {
    if (const auto* n = std::get_if<NodeRef>(&v)) return J{{"node", n->id}};
    if (const auto* t = std::get_if<TokenValue>(&v)) return J{{"token", t->token}, {"text", t->text}};
    const auto& r = std::get<ReferenceValue>(v);
    return J{{"ref", r.text}, {"target", r.resolved ? J(*r.resolved) : J(nullptr)}};
  };
  J nodes = J::array();
  for (const auto& n : graph.nodes) {
    J members = J::object();
    for (const auto& s : n.members) {
      if (s.kind == MemberSlot::Kind::list) {
        J list = J::array();
        for (const auto& v : s.values) list.push_back(value(v));
        members[s.name] = list;
      } else {
        members[s.name] = s.values.empty() ? J(nullptr) : value(s.values.front());
      }
    }
    J span{{"offset", n.span.offset}, {"length", n.span.length}, {"line", n.span.line}, {"column", n.span.column}};
    nodes.push_back(J{{"id", n.id}, {"element", n.element}, {"span", span}, {"members", members}});
  }
  J edges = J::array();
  for (const auto& e : graph.edges) edges.push_back(J{{"from", e.from}, {"member", e.member}, {"to", e.to}});
  return J{{"nodes", nodes}, {"edges", edges}, {"roots", graph.roots}};
}

std::string unparse_tokens(const ParseTree& tree, const ParseForest& forest) {
  std::string out;
  std::function<void(const ParseTree&)> walk = [&](const ParseTree& t) {
    if (t.production == kTokenDerivation && t.children.empty()) {
      if (t.token) {
        if (!out.empty()) out += ' ';
        out += forest.tokens[*t.token].text;
      }
      return;
    }
    for (const auto& c : t.children) walk(c);
  };
  walk(tree);
  return out;
}

}  // namespace mcc
