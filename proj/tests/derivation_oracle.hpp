#pragma once

// Exhaustive derivation counting by span splitting. Independent of the
// Earley parser; only valid for grammars without empty or unit cycles.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mcc/csm.hpp"

namespace oracle {

class DerivationCounter {
 public:
  DerivationCounter(const mcc::Grammar& g, std::vector<std::string> tokens) : g_(g), toks_(std::move(tokens)) {}

  std::uint64_t count(const std::string& symbol) { return span(symbol, 0, toks_.size()); }

 private:
  const mcc::Grammar& g_;
  std::vector<std::string> toks_;
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::uint64_t> memo_;
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> active_;
  std::size_t depth_ = 0;
  std::size_t lowest_cut_ = SIZE_MAX;

  // Values that relied on cutting an enclosing cycle are not memoized.
  std::uint64_t span(const std::string& sym, std::size_t i, std::size_t j) {
    if (g_.is_terminal(sym)) return j == i + 1 && toks_[i] == sym ? 1 : 0;
    auto key = std::make_tuple(sym, i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (auto it = active_.find(key); it != active_.end()) {
      lowest_cut_ = std::min(lowest_cut_, it->second);
      return 0;
    }
    std::size_t depth = ++depth_;
    active_[key] = depth;
    std::size_t outer_cut = lowest_cut_;
    lowest_cut_ = SIZE_MAX;
    std::uint64_t total = 0;
    for (const auto& p : g_.productions)
      if (p.lhs == sym) total += sequence(p.rhs, 0, i, j);
    active_.erase(key);
    --depth_;
    if (lowest_cut_ >= depth) memo_[key] = total;
    else outer_cut = std::min(outer_cut, lowest_cut_);
    lowest_cut_ = outer_cut;
    return total;
  }

  std::uint64_t sequence(const std::vector<std::string>& rhs, std::size_t k, std::size_t i, std::size_t j) {
    if (k == rhs.size()) return i == j ? 1 : 0;
    std::uint64_t total = 0;
    for (std::size_t m = i; m <= j; ++m) {
      std::uint64_t head = span(rhs[k], i, m);
      if (head) total += head * sequence(rhs, k + 1, m, j);
    }
    return total;
  }
};

}  // namespace oracle
