#pragma once

// Token pattern dialect: literal characters, escapes, `.`, character classes
// with ranges and negation, `* + ?`, alternation and grouping. Matching is
// anchored at a position and reports the longest match.

#include <bitset>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcc {

class PatternError : public std::invalid_argument {
 public:
  PatternError(const std::string& message, std::size_t position)
      : std::invalid_argument(message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class Pattern {
 public:
  /// Throws PatternError on malformed patterns.
  static Pattern compile(std::string_view source);

  /// Length of the longest match starting at `pos`, or nullopt when nothing
  /// (not even the empty string) matches there.
  std::optional<std::size_t> match_at(std::string_view text, std::size_t pos = 0) const;
  bool full_match(std::string_view text) const;
  bool matches_empty() const;

  const std::string& source() const { return source_; }

 private:
  struct State {
    // A consuming state has a non-empty byte set and one successor; an
    // epsilon state has up to two successors.
    std::bitset<256> bytes;
    bool consumes = false;
    int out1 = -1;
    int out2 = -1;
  };

  std::string source_;
  std::vector<State> states_;
  int start_ = -1;
  int accept_ = -1;

  friend class PatternCompiler;
  void closure(std::vector<int>& set, std::vector<char>& mark) const;
};

}  // namespace mcc
