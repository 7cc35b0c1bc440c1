#pragma once
// Strategy parametrization ("gen"): types, the tuple grammar, JSON persistence.
//
// Grammar:  gen    := "(" triple {"," triple} {"," group} ")"
//           triple := "(" int "," int "," int ")" ["^" int]
//           group  := "(" [int {"," int}] ")" | "∞"
// "∞" is also accepted as ASCII "inf".  Empty groups "()" are inheritance
// markers from the published tables and contribute no lengths.
// Snowball triples are consumed until their goals sum to n; the remaining
// groups are, in order: token-phase lengths, per-level length groups
// (ascending, with tail-entry spill), then an optional descending length.

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace prisoners {

using i64 = std::int64_t;

enum class Family {
  SingleCounter,
  Nc2TwoToken,
  Nc2Waiting,
  SnowballSingle,
  TwoLevel,
  BinaryTokens,
  BinaryTalentObservers,
  TernaryObservers,
  BinaryAccelerated,
  BinaryDiscardFirst,
  TernaryDiscardFirst,
};

enum class Variant { A2, B2, C2 };

struct GenError : std::runtime_error {
  explicit GenError(const std::string& what, std::size_t pos = std::string::npos)
      : std::runtime_error(what), position(pos) {}
  std::size_t position;
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::SingleCounter: return "single-counter";
    case Family::Nc2TwoToken: return "nc2-two-token";
    case Family::Nc2Waiting: return "nc2-waiting";
    case Family::SnowballSingle: return "snowball-single";
    case Family::TwoLevel: return "two-level-multi-snowball";
    case Family::BinaryTokens: return "binary-tokens";
    case Family::BinaryTalentObservers: return "binary-talent-observers";
    case Family::TernaryObservers: return "ternary-observers";
    case Family::BinaryAccelerated: return "binary-accelerated";
    case Family::BinaryDiscardFirst: return "binary-discard-first";
    case Family::TernaryDiscardFirst: return "ternary-discard-first";
  }
  return "?";
}

inline Family family_from(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Family::TernaryDiscardFirst); ++i) {
    auto f = static_cast<Family>(i);
    if (s == family_name(f)) return f;
  }
  throw GenError("unknown family: " + s);
}

constexpr bool family_has_snowballs(Family f) {
  return f == Family::SnowballSingle || f == Family::TwoLevel ||
         f == Family::BinaryTalentObservers || f == Family::TernaryObservers;
}

constexpr bool family_takes_gen(Family f) {
  return family_has_snowballs(f) || f == Family::BinaryTokens ||
         f == Family::BinaryAccelerated;
}

constexpr bool family_is_observer(Family f) {
  return f == Family::BinaryTalentObservers || f == Family::TernaryObservers ||
         f == Family::BinaryDiscardFirst || f == Family::TernaryDiscardFirst;
}

constexpr Variant family_default_variant(Family f) {
  switch (f) {
    case Family::SingleCounter: return Variant::B2;
    case Family::Nc2TwoToken:
    case Family::Nc2Waiting: return Variant::C2;
    default: return Variant::A2;
  }
}

struct SnowballTriple {
  i64 ell = 0;
  i64 slack = 0;
  i64 goal = 0;
  bool operator==(const SnowballTriple&) const = default;
};

struct StrategyParams {
  Family family = Family::SingleCounter;
  int n = 0;
  Variant variant = Variant::B2;
  std::vector<SnowballTriple> snowballs;
  bool inf_token = false;
  i64 token_first = 0;
  i64 token_second = 0;
  i64 token_repeat = 0;
  std::vector<i64> level_first;
  std::vector<i64> level_repeat;
  i64 descending = 0;
  i64 extra_tokens = 0;
  double p_release = 0.0;

  bool operator==(const StrategyParams&) const = default;

  i64 prephase_total() const {
    i64 s = 0;
    for (const auto& t : snowballs) s += t.ell + t.slack;
    return s;
  }
  i64 talent_total() const {
    return static_cast<i64>(snowballs.size());
  }
};

namespace detail {

struct RawItem {
  bool inf = false;
  std::vector<i64> ints;  // for "()" stays empty
  i64 repeat = 1;
  std::size_t pos = 0;
};

class GenLexer {
 public:
  explicit GenLexer(const std::string& s) : s_(s) {}

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip_ws();
    if (i_ < s_.size() && s_[i_] == c) { ++i_; return true; }
    return false;
  }
  void expect(char c, const char* what) {
    if (!eat(c)) fail(std::string("expected '") + c + "' " + what);
  }
  bool peek(char c) {
    skip_ws();
    return i_ < s_.size() && s_[i_] == c;
  }
  bool at_end() {
    skip_ws();
    return i_ >= s_.size();
  }
  bool eat_inf() {
    skip_ws();
    if (s_.compare(i_, 3, "\xE2\x88\x9E") == 0) { i_ += 3; return true; }
    if (s_.compare(i_, 3, "inf") == 0) { i_ += 3; return true; }
    return false;
  }
  bool peek_inf() {
    skip_ws();
    return s_.compare(i_, 3, "\xE2\x88\x9E") == 0 || s_.compare(i_, 3, "inf") == 0;
  }
  i64 read_int() {
    skip_ws();
    std::size_t start = i_;
    i64 v = 0;
    bool any = false;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      v = v * 10 + (s_[i_] - '0');
      ++i_;
      any = true;
      if (v > (i64{1} << 60)) fail("integer too large", start);
    }
    if (!any) fail("expected integer", start);
    return v;
  }
  [[noreturn]] void fail(const std::string& msg, std::size_t at = std::string::npos) {
    std::size_t pos = (at == std::string::npos) ? i_ : at;
    throw GenError("gen syntax error at position " + std::to_string(pos) + ": " + msg, pos);
  }
  std::size_t pos() const { return i_; }

 private:
  const std::string& s_;
  std::size_t i_ = 0;
};

inline std::vector<RawItem> parse_raw(const std::string& text) {
  GenLexer lx(text);
  lx.expect('(', "at start of gen");
  std::vector<RawItem> items;
  while (true) {
    RawItem it;
    it.pos = lx.pos();
    if (lx.eat_inf()) {
      it.inf = true;
    } else {
      lx.expect('(', "to open a triple or group");
      if (!lx.peek(')')) {
        it.ints.push_back(lx.read_int());
        while (lx.eat(',')) it.ints.push_back(lx.read_int());
      }
      lx.expect(')', "to close a triple or group");
      if (lx.eat('^')) {
        it.repeat = lx.read_int();
        if (it.repeat < 1) lx.fail("repetition count must be >= 1");
      }
    }
    items.push_back(std::move(it));
    if (lx.eat(',')) continue;
    if (lx.peek('(') || lx.peek_inf()) continue;  // published rows juxtapose groups
    break;
  }
  // published rows also leave the outer ')' off; accept a bare end
  if (lx.eat(')')) {
    if (!lx.at_end()) lx.fail("trailing characters after gen");
  } else if (!lx.at_end()) {
    lx.fail("expected ')' at end of gen");
  }
  return items;
}

// Spill groups into per-level (first, repeat) pairs: a k-entry group supplies
// firsts for the next k-1 levels plus their shared repeat (single entry: both).
inline void spill_levels(const std::vector<RawItem>& groups, std::size_t& gi,
                         int want, bool flexible, StrategyParams& p) {
  while ((flexible ? gi < groups.size()
                   : static_cast<int>(p.level_first.size()) < want)) {
    if (gi >= groups.size())
      throw GenError("gen is missing level-phase groups");
    const auto& g = groups[gi];
    if (g.inf) throw GenError("unexpected \xE2\x88\x9E in level groups", g.pos);
    if (g.ints.empty()) { ++gi; continue; }  // inheritance marker
    if (g.ints.size() == 1) {
      p.level_first.push_back(g.ints[0]);
      p.level_repeat.push_back(g.ints[0]);
    } else {
      for (std::size_t k = 0; k + 1 < g.ints.size(); ++k) {
        p.level_first.push_back(g.ints[k]);
        p.level_repeat.push_back(g.ints.back());
      }
    }
    ++gi;
    if (!flexible && static_cast<int>(p.level_first.size()) > want)
      throw GenError("more level lengths than signaling levels", g.pos);
  }
}

}  // namespace detail

inline int expected_level_count(Family f, int n, i64 talent_total, i64 extra_tokens) {
  switch (f) {
    case Family::SnowballSingle: return 0;
    case Family::TwoLevel: return 1;
    case Family::BinaryTalentObservers: {
      i64 t = talent_total;
      int k = 0;
      while ((i64{1} << (k + 1)) <= t) ++k;
      if ((i64{1} << k) != t || k < 1)
        throw GenError("binary-talent-observers needs a power-of-2 collector count >= 2");
      return k;
    }
    case Family::TernaryObservers: {
      i64 t = talent_total;
      int k = 0;
      while (t % 2 == 0) { t /= 2; ++k; }
      if (t != 3) throw GenError("ternary-observers needs a 3*2^k collector count");
      return k + 1;
    }
    case Family::BinaryTokens: {
      i64 total = n + extra_tokens;
      int m = 0;
      while ((i64{1} << (m + 1)) <= total) ++m;
      if ((i64{1} << m) != total)
        throw GenError("binary-tokens needs n + extra_tokens to be a power of 2");
      return m;
    }
    default: return 0;
  }
}

inline void validate_params(const StrategyParams& p,
                            std::vector<std::string>* warnings = nullptr) {
  auto warn = [&](const std::string& w) { if (warnings) warnings->push_back(w); };
  if (p.n < 1) throw GenError("n must be >= 1");
  const Family f = p.family;

  if (!family_takes_gen(f)) {
    if (!p.snowballs.empty() || p.token_first || !p.level_first.empty() ||
        p.inf_token || p.descending)
      throw GenError(std::string(family_name(f)) + " does not take a gen");
  }
  if (f == Family::BinaryDiscardFirst && p.n != 2 && p.n != 3)
    throw GenError("binary-discard-first is defined for n in {2,3}");
  if (f == Family::TernaryDiscardFirst && p.n != 4)
    throw GenError("ternary-discard-first is defined for n = 4");
  if (f == Family::Nc2Waiting && !(p.p_release > 0.0 && p.p_release <= 1.0))
    throw GenError("p_release must lie in (0,1]");
  if (f == Family::SingleCounter && p.variant == Variant::C2)
    throw GenError("single-counter supports variants a2/b2");
  if ((f == Family::Nc2TwoToken || f == Family::Nc2Waiting) && p.variant != Variant::C2)
    throw GenError("nc2 families are C2 by definition");
  if (family_takes_gen(f) && p.variant != Variant::A2)
    throw GenError(std::string(family_name(f)) + " is an A2 strategy");
  if (p.n == 1) return;  // degenerate: day-1 assert, no structure needed

  if (family_has_snowballs(f)) {
    if (p.snowballs.empty()) throw GenError("family requires snowball triples");
    i64 sum = 0;
    i64 prev_goal = -1, prev_slack = -1;
    for (const auto& t : p.snowballs) {
      if (t.ell < 1 || t.slack < 0 || t.goal < 1)
        throw GenError("triple out of range: ell >= 1, slack >= 0, goal >= 1");
      if (prev_goal >= 0 && t.goal > prev_goal) warn("goals increase along the gen");
      if (prev_slack >= 0 && t.slack < prev_slack) warn("slacks decrease along the gen");
      prev_goal = t.goal;
      prev_slack = t.slack;
      sum += t.goal;
    }
    if (sum != p.n)
      throw GenError("snowball goals sum to " + std::to_string(sum) +
                     ", expected n = " + std::to_string(p.n));
    if (f == Family::SnowballSingle && p.snowballs.size() != 1)
      throw GenError("snowball-single takes exactly one triple");
    int want = expected_level_count(f, p.n, p.talent_total(), 0);
    if (static_cast<int>(p.level_first.size()) != want)
      throw GenError("family needs " + std::to_string(want) + " level group(s), got " +
                     std::to_string(p.level_first.size()));
    if (p.inf_token) {
      if (want != 0) throw GenError("\xE2\x88\x9E token phase only fits level-less gens");
    } else {
      if (p.token_first <= p.prephase_total())
        throw GenError("first token phase must extend past the pre-phases");
      if (p.token_second < 1 || p.token_repeat < 1)
        throw GenError("token phase lengths must be >= 1");
      if (p.token_first < p.token_repeat)
        warn("first token phase shorter than repeat phase");
    }
    for (std::size_t i = 0; i < p.level_first.size(); ++i)
      if (p.level_first[i] < 1 || p.level_repeat[i] < 1)
        throw GenError("level phase lengths must be >= 1");
    if (p.descending < 0) throw GenError("descending length must be >= 0");
    if (p.extra_tokens != 0) throw GenError("talent gens carry no extra tokens");
  } else if (f == Family::BinaryTokens || f == Family::BinaryAccelerated) {
    if (!p.snowballs.empty()) throw GenError("binary gens carry no snowball triples");
    if (p.inf_token) throw GenError("binary gens need finite stage lengths");
    if (p.extra_tokens < 0) throw GenError("extra_tokens must be >= 0");
    int want = (f == Family::BinaryTokens)
                   ? expected_level_count(f, p.n, 0, p.extra_tokens)
                   : static_cast<int>(p.level_first.size());
    if (static_cast<int>(p.level_first.size()) != want || want < 1)
      throw GenError("binary gen needs " + std::to_string(std::max(want, 1)) +
                     " level group(s)");
    for (std::size_t i = 0; i < p.level_first.size(); ++i) {
      if (p.level_first[i] < 1) throw GenError("level first lengths must be >= 1");
      if (p.level_repeat[i] < 0) throw GenError("level repeat lengths must be >= 0");
    }
    if (p.level_repeat[0] < 1)
      throw GenError("level-0 must repeat (its repeat length is the cycle base)");
    if (p.descending != 0) throw GenError("binary gens take no descending group");
  }
}

// parse_gen needs the CLI context (family, n): the grammar cannot distinguish a
// trailing 3-int group from a triple without the goals-sum-to-n rule.
inline StrategyParams parse_gen(const std::string& text, Family family, int n,
                                i64 extra_tokens = 0) {
  if (!family_takes_gen(family))
    throw GenError(std::string(family_name(family)) + " does not take a gen");
  auto items = detail::parse_raw(text);
  StrategyParams p;
  p.family = family;
  p.n = n;
  p.variant = Variant::A2;
  p.extra_tokens = extra_tokens;

  std::size_t i = 0;
  if (family_has_snowballs(family)) {
    i64 sum = 0;
    while (sum < n) {
      if (i >= items.size())
        throw GenError("snowball goals sum to " + std::to_string(sum) +
                       ", expected n = " + std::to_string(n));
      const auto& it = items[i];
      if (it.inf || it.ints.size() != 3)
        throw GenError("expected a (ell,slack,goal) triple", it.pos);
      for (i64 r = 0; r < it.repeat; ++r) {
        p.snowballs.push_back({it.ints[0], it.ints[1], it.ints[2]});
        sum += it.ints[2];
        if (sum > n)
          throw GenError("snowball goals exceed n = " + std::to_string(n), it.pos);
        if (sum == n && r + 1 < it.repeat)
          throw GenError("snowball goals exceed n = " + std::to_string(n), it.pos);
      }
      ++i;
    }
  }

  // token group
  bool token_seen = false;
  while (i < items.size() && !token_seen) {
    const auto& it = items[i];
    if (it.repeat != 1) throw GenError("'^' applies to triples only", it.pos);
    if (it.inf) {
      p.inf_token = true;
      token_seen = true;
    } else if (it.ints.empty()) {
      // inheritance marker
    } else {
      const auto& v = it.ints;
      if (v.size() > 3) throw GenError("token group takes at most 3 lengths", it.pos);
      p.token_first = v[0];
      p.token_second = v.size() >= 2 ? v[1] : v[0];
      p.token_repeat = v.size() >= 3 ? v[2] : p.token_second;
      token_seen = true;
    }
    ++i;
  }
  if (!token_seen && family_has_snowballs(family) && family != Family::SnowballSingle)
    throw GenError("gen is missing the token-phase group");
  if (!token_seen && family == Family::SnowballSingle)
    p.inf_token = true;  // bare ((l,s,g)) means an unbounded token tail
  if (family == Family::BinaryTokens || family == Family::BinaryAccelerated) {
    // the "token" group is the level-0 stage group for pure binary gens
    if (p.inf_token) throw GenError("binary gens need finite stage lengths");
    p.level_first.push_back(p.token_first);
    p.level_repeat.push_back(p.token_repeat);
    if (p.token_second != p.token_repeat)
      throw GenError("binary level-0 group takes (first, repeat)");
    p.token_first = p.token_second = p.token_repeat = 0;
  }

  int want = expected_level_count(family, n, p.talent_total(), extra_tokens);
  bool flexible = family == Family::BinaryAccelerated;
  if (family == Family::BinaryTokens) want -= 1;  // level 0 already consumed
  if (want > 0 || flexible) {
    std::vector<detail::RawItem> rest(items.begin() + i, items.end());
    for (const auto& g : rest)
      if (g.repeat != 1) throw GenError("'^' applies to triples only", g.pos);
    std::size_t gi = 0;
    if (family == Family::BinaryTokens || flexible) {
      detail::spill_levels(rest, gi, want + 1, flexible, p);  // level 0 pre-consumed
    } else {
      detail::spill_levels(rest, gi, want, false, p);
    }
    // optional descending group, then nothing
    while (gi < rest.size()) {
      const auto& g = rest[gi];
      if (g.inf) throw GenError("unexpected \xE2\x88\x9E", g.pos);
      if (g.ints.empty()) { ++gi; continue; }
      if (p.descending == 0 && g.ints.size() == 1) {
        p.descending = g.ints[0];
        ++gi;
        continue;
      }
      throw GenError("unexpected trailing group", g.pos);
    }
  } else {
    while (i < items.size()) {
      const auto& it = items[i];
      if (!it.inf && it.ints.empty()) { ++i; continue; }
      throw GenError("unexpected trailing group", it.pos);
    }
  }

  validate_params(p);
  return p;
}

inline std::string render_gen(const StrategyParams& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.snowballs.size();) {
    std::size_t j = i;
    while (j < p.snowballs.size() && p.snowballs[j] == p.snowballs[i]) ++j;
    const auto& t = p.snowballs[i];
    out += "(" + std::to_string(t.ell) + "," + std::to_string(t.slack) + "," +
           std::to_string(t.goal) + ")";
    if (j - i > 1) out += "^" + std::to_string(j - i);
    out += ",";
    i = j;
  }
  auto group = [](std::vector<i64> v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s + ")";
  };
  std::vector<std::string> groups;
  std::size_t lev0 = 0;
  if (p.family == Family::BinaryTokens || p.family == Family::BinaryAccelerated) {
    groups.push_back(p.level_first[0] == p.level_repeat[0]
                         ? group({p.level_first[0]})
                         : group({p.level_first[0], p.level_repeat[0]}));
    lev0 = 1;
  } else if (p.inf_token) {
    groups.push_back("\xE2\x88\x9E");
  } else {
    if (p.token_first == p.token_second && p.token_second == p.token_repeat)
      groups.push_back(group({p.token_first}));
    else if (p.token_second == p.token_repeat)
      groups.push_back(group({p.token_first, p.token_second}));
    else
      groups.push_back(group({p.token_first, p.token_second, p.token_repeat}));
  }
  for (std::size_t L = lev0; L < p.level_first.size(); ++L)
    groups.push_back(p.level_first[L] == p.level_repeat[L]
                         ? group({p.level_first[L]})
                         : group({p.level_first[L], p.level_repeat[L]}));
  if (p.descending) groups.push_back(group({p.descending}));
  for (const auto& g : groups) out += g + ",";
  if (out.back() == ',') out.pop_back();
  return out + ")";
}

inline void to_json(nlohmann::json& j, const StrategyParams& p) {
  j = nlohmann::json{
      {"family", family_name(p.family)},
      {"n", p.n},
      {"variant", p.variant == Variant::A2 ? "a2" : (p.variant == Variant::B2 ? "b2" : "c2")},
      {"snowballs", nlohmann::json::array()},
      {"inf_token", p.inf_token},
      {"token", {p.token_first, p.token_second, p.token_repeat}},
      {"level_first", p.level_first},
      {"level_repeat", p.level_repeat},
      {"descending", p.descending},
      {"extra_tokens", p.extra_tokens},
      {"p_release", p.p_release},
  };
  for (const auto& t : p.snowballs) j["snowballs"].push_back({t.ell, t.slack, t.goal});
}

inline void from_json(const nlohmann::json& j, StrategyParams& p) {
  p.family = family_from(j.at("family").get<std::string>());
  p.n = j.at("n").get<int>();
  std::string v = j.value("variant", "a2");
  p.variant = v == "b2" ? Variant::B2 : (v == "c2" ? Variant::C2 : Variant::A2);
  p.snowballs.clear();
  for (const auto& t : j.at("snowballs"))
    p.snowballs.push_back({t.at(0).get<i64>(), t.at(1).get<i64>(), t.at(2).get<i64>()});
  p.inf_token = j.at("inf_token").get<bool>();
  p.token_first = j.at("token").at(0).get<i64>();
  p.token_second = j.at("token").at(1).get<i64>();
  p.token_repeat = j.at("token").at(2).get<i64>();
  p.level_first = j.at("level_first").get<std::vector<i64>>();
  p.level_repeat = j.at("level_repeat").get<std::vector<i64>>();
  p.descending = j.at("descending").get<i64>();
  p.extra_tokens = j.at("extra_tokens").get<i64>();
  p.p_release = j.at("p_release").get<double>();
}

}  // namespace prisoners
