#include "mcc/pattern.hpp"

namespace mcc {

class PatternCompiler {
 public:
  PatternCompiler(Pattern& p, std::string_view src) : p_(p), src_(src) {}

  void run() {
    Frag f = alternation();
    if (pos_ < src_.size()) fail(src_[pos_] == ')' ? "unbalanced ')'" : "unexpected character");
    p_.start_ = f.start;
    p_.accept_ = f.end;
  }

 private:
  struct Frag {
    int start;
    int end;
  };

  Pattern& p_;
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw PatternError("pattern error at offset " + std::to_string(pos_) + ": " + what, pos_);
  }

  int state() {
    p_.states_.emplace_back();
    return static_cast<int>(p_.states_.size() - 1);
  }

  Frag bytes(const std::bitset<256>& set) {
    int s = state(), e = state();
    p_.states_[s].bytes = set;
    p_.states_[s].consumes = true;
    p_.states_[s].out1 = e;
    return {s, e};
  }

  Frag empty() {
    int s = state();
    return {s, s};
  }

  bool at(char c) const { return pos_ < src_.size() && src_[pos_] == c; }

  Frag alternation() {
    Frag left = concatenation();
    while (at('|')) {
      ++pos_;
      Frag right = concatenation();
      int s = state(), e = state();
      p_.states_[s].out1 = left.start;
      p_.states_[s].out2 = right.start;
      p_.states_[left.end].out1 = e;
      p_.states_[right.end].out1 = e;
      left = {s, e};
    }
    return left;
  }

  Frag concatenation() {
    Frag f = empty();
    bool first = true;
    while (pos_ < src_.size() && !at('|') && !at(')')) {
      Frag next = repetition();
      if (first) {
        f = next;
        first = false;
      } else {
        p_.states_[f.end].out1 = next.start;
        f.end = next.end;
      }
    }
    return f;
  }

  Frag repetition() {
    Frag f = atom();
    while (at('*') || at('+') || at('?')) {
      char op = src_[pos_++];
      int e = state();
      if (op == '*') {
        int s = state();
        p_.states_[s].out1 = f.start;
        p_.states_[s].out2 = e;
        p_.states_[f.end].out1 = f.start;
        p_.states_[f.end].out2 = e;
        f = {s, e};
      } else if (op == '+') {
        p_.states_[f.end].out1 = f.start;
        p_.states_[f.end].out2 = e;
        f = {f.start, e};
      } else {
        int s = state();
        p_.states_[s].out1 = f.start;
        p_.states_[s].out2 = e;
        p_.states_[f.end].out1 = e;
        f = {s, e};
      }
    }
    return f;
  }

  static std::bitset<256> single(unsigned char c) {
    std::bitset<256> b;
    b.set(c);
    return b;
  }

  static std::bitset<256> range(unsigned char lo, unsigned char hi) {
    std::bitset<256> b;
    for (unsigned c = lo; c <= hi; ++c) b.set(c);
    return b;
  }

  // Returns the byte set for the escape after a backslash; `is_set` tells
  // whether it was a shorthand class.
  std::bitset<256> escape(bool& is_set, unsigned char& ch) {
    if (pos_ >= src_.size()) fail("trailing backslash");
    char c = src_[pos_++];
    is_set = false;
    switch (c) {
      case 'n': ch = '\n'; break;
      case 't': ch = '\t'; break;
      case 'r': ch = '\r'; break;
      case 'f': ch = '\f'; break;
      case 'v': ch = '\v'; break;
      case '0': ch = '\0'; break;
      case 'd':
      case 'D':
      case 'w':
      case 'W':
      case 's':
      case 'S': {
        is_set = true;
        std::bitset<256> b;
        char lower = static_cast<char>(c | 0x20);
        if (lower == 'd') b = range('0', '9');
        if (lower == 'w') b = range('a', 'z') | range('A', 'Z') | range('0', '9') | single('_');
        if (lower == 's') b = single(' ') | single('\t') | single('\n') | single('\r') | single('\f') | single('\v');
        if (c != lower) b.flip();
        return b;
      }
      default: ch = static_cast<unsigned char>(c);
    }
    return single(ch);
  }

  Frag atom() {
    if (pos_ >= src_.size()) fail("unexpected end of pattern");
    char c = src_[pos_];
    switch (c) {
      case '(': {
        ++pos_;
        Frag f = alternation();
        if (!at(')')) fail("missing ')'");
        ++pos_;
        return f;
      }
      case '*':
      case '+':
      case '?':
        fail("nothing to repeat");
      case '[':
        ++pos_;
        return bytes(char_class());
      case '.': {
        ++pos_;
        std::bitset<256> b;
        b.set();
        b.reset('\n');
        return bytes(b);
      }
      case '\\': {
        ++pos_;
        bool is_set;
        unsigned char ch;
        return bytes(escape(is_set, ch));
      }
      default:
        ++pos_;
        return bytes(single(static_cast<unsigned char>(c)));
    }
  }

  std::bitset<256> char_class() {
    std::bitset<256> b;
    bool negate = false;
    if (at('^')) {
      negate = true;
      ++pos_;
    }
    bool first = true;
    while (true) {
      if (pos_ >= src_.size()) fail("missing ']'");
      if (at(']') && !first) {
        ++pos_;
        break;
      }
      first = false;
      unsigned char lo;
      if (at('\\')) {
        ++pos_;
        bool is_set;
        auto set = escape(is_set, lo);
        if (is_set) {
          b |= set;
          continue;
        }
      } else {
        lo = static_cast<unsigned char>(src_[pos_++]);
      }
      if (at('-') && pos_ + 1 < src_.size() && src_[pos_ + 1] != ']') {
        ++pos_;
        unsigned char hi;
        if (at('\\')) {
          ++pos_;
          bool is_set;
          escape(is_set, hi);
          if (is_set) fail("class shorthand cannot end a range");
        } else {
          hi = static_cast<unsigned char>(src_[pos_++]);
        }
        if (hi < lo) fail("reversed range");
        b |= range(lo, hi);
      } else {
        b.set(lo);
      }
    }
    if (negate) b.flip();
    return b;
  }
};

Pattern Pattern::compile(std::string_view source) {
  Pattern p;
  p.source_ = std::string(source);
  PatternCompiler(p, source).run();
  return p;
}

void Pattern::closure(std::vector<int>& set, std::vector<char>& mark) const {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const State& s = states_[set[i]];
    if (s.consumes) continue;
    for (int next : {s.out1, s.out2})
      if (next >= 0 && !mark[next]) {
        mark[next] = 1;
        set.push_back(next);
      }
  }
}

std::optional<std::size_t> Pattern::match_at(std::string_view text, std::size_t pos) const {
  std::vector<char> mark(states_.size(), 0);
  std::vector<int> current{start_};
  mark[start_] = 1;
  closure(current, mark);
  std::optional<std::size_t> best;
  for (std::size_t i = pos;; ++i) {
    if (mark[accept_]) best = i - pos;
    if (i >= text.size() || current.empty()) break;
    auto byte = static_cast<unsigned char>(text[i]);
    std::vector<int> next;
    std::fill(mark.begin(), mark.end(), 0);
    for (int s : current) {
      const State& st = states_[s];
      if (st.consumes && st.bytes.test(byte) && !mark[st.out1]) {
        mark[st.out1] = 1;
        next.push_back(st.out1);
      }
    }
    closure(next, mark);
    current = std::move(next);
  }
  return best;
}

bool Pattern::full_match(std::string_view text) const {
  auto m = match_at(text, 0);
  return m && *m == text.size();
}

bool Pattern::matches_empty() const { return full_match(""); }

}  // namespace mcc
