#pragma once
// Night-by-night signal schedule: subphase marks, segment expansion, and the
// (tokens, talents)-in-room meaning of each (night, state).
//
// Nights are 0-indexed; day d observes night d-1 and writes night d.
// Pre-phase marks p_k accumulate ell_k + slack_k; the segment stream after
// p_t is the first token phase (first - p_t nights), the ascending level
// phases, the optional descending recovery stages, the second token phase,
// the level repeats, and then the cycle (repeat token + level repeats).

#include <algorithm>
#include <limits>
#include <vector>

#include "prisoners/gen.hpp"

namespace prisoners {

constexpr i64 kInfLen = std::numeric_limits<i64>::max() / 4;

enum class SegKind : int { Token = 0, Level = 1, Desc = 2 };

struct Segment {
  SegKind kind;
  int level;  // level index into Schedule::levels, -1 for token
  i64 len;
};

struct NightInfo {
  SegKind kind;
  int level;
  i64 instance;  // running segment counter, distinct per stage instance
};

struct SignalMeaning {
  i64 tokens;
  i64 talents;
};

class Schedule {
 public:
  Schedule() = default;

  explicit Schedule(const StrategyParams& params) : p(params) {
    n = p.n;
    t = static_cast<i64>(p.snowballs.size());
    pm.push_back(0);
    G.push_back(0);
    for (const auto& tr : p.snowballs) {
      pm.push_back(pm.back() + tr.ell + tr.slack);
      G.push_back(G.back() + tr.goal);
    }
    pt = pm.back();

    observer = family_is_observer(p.family);
    talent_currency = p.family == Family::BinaryTalentObservers ||
                      p.family == Family::TernaryObservers ||
                      p.family == Family::TwoLevel;
    ternary = p.family == Family::TernaryObservers ||
              p.family == Family::TernaryDiscardFirst;
    has_head = p.family == Family::SnowballSingle || p.family == Family::TwoLevel ||
               p.family == Family::BinaryAccelerated;

    switch (p.family) {
      case Family::BinaryTalentObservers:
      case Family::TernaryObservers:
      case Family::TwoLevel:
        total = t;
        break;
      case Family::BinaryDiscardFirst:
      case Family::TernaryDiscardFirst:
        total = n - 1;
        break;
      case Family::BinaryTokens:
      case Family::BinaryAccelerated:
        total = n + p.extra_tokens;
        break;
      default:
        total = 0;
    }
    full_pocket = p.family == Family::BinaryTokens || observer;

    int nlev = static_cast<int>(p.level_first.size());
    if (p.family == Family::TwoLevel) nlev = 1;
    if (p.family == Family::BinaryDiscardFirst || p.family == Family::TernaryDiscardFirst)
      nlev = 1;
    for (int i = 0; i < nlev; ++i) levels.push_back(i);

    build_segments();
    index_segments();
  }

  i64 step_of(int level_index) const {
    if (p.family == Family::TwoLevel) return 1;
    return i64{1} << levels[level_index];
  }

  // 1-based subphase index for 1 <= night <= pt
  int sub_of(i64 night) const {
    int lo = 1, hi = static_cast<int>(t);
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (night <= pm[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  NightInfo night_info(i64 night) const {
    i64 x = night - pt - 1;
    i64 acc = 0;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (prefix[i].len >= kInfLen || x < acc + prefix[i].len)
        return {prefix[i].kind, prefix[i].level, static_cast<i64>(i)};
      acc += prefix[i].len;
    }
    i64 y = (x - acc) % cycle_total;
    i64 round = (x - acc) / cycle_total;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (y < cycle[i].len)
        return {cycle[i].kind, cycle[i].level,
                static_cast<i64>(prefix.size()) + round * static_cast<i64>(cycle.size()) +
                    static_cast<i64>(i)};
      y -= cycle[i].len;
    }
    return {SegKind::Token, -1, 0};  // unreachable
  }

  SignalMeaning meaning(i64 night, int state) const {
    if (night == 0) {
      if (p.family == Family::BinaryDiscardFirst || p.family == Family::TernaryDiscardFirst)
        return {-1, 0};
      if (p.family == Family::BinaryTokens || p.family == Family::BinaryAccelerated)
        return {0, 0};
      return {-n, 0};
    }
    if (night <= pt) {
      const int m = sub_of(night);
      const i64 pp = pm[m - 1];
      const i64 ell = p.snowballs[m - 1].ell;
      const i64 Gp = G[m - 1];
      const i64 tal_on = (m == 1) ? 0 : t - (m - 1);
      if (state == 1) {
        const i64 off = night - pp;
        return {std::min(off, ell) + Gp - n, tal_on};
      }
      if (m == 1 && night == 2) return {1 - n, 0};
      if (night == pp + 1) return {Gp - n, tal_on};
      return {G[m] - n, t - m};
    }
    const NightInfo ni = night_info(night);
    if (ni.kind == SegKind::Token) return state == 1 ? SignalMeaning{1, 0} : SignalMeaning{0, 0};
    if (state == 0) return {0, 0};
    const i64 step = step_of(ni.level);
    return talent_currency ? SignalMeaning{0, step} : SignalMeaning{step, 0};
  }

  // how many subphases this (night, state) signal implies already elected
  i64 elected_of(i64 night, int state) const {
    if (night == 0) return 0;
    if (night > pt) return t;
    const int m = sub_of(night);
    if (state == 1) return m - 1;
    if (m == 1 && night == 2) return 0;
    if (night == pm[m - 1] + 1) return m - 1;
    return m;
  }

  // absolute night on which each binary block of extra_tokens is released:
  // the first night of the first stage whose chunk step matches the block
  std::vector<std::pair<i64, i64>> release_nights() const {  // (night, block)
    std::vector<std::pair<i64, i64>> out;
    if (p.extra_tokens <= 0) return out;
    for (int b = 0; b < 62; ++b) {
      const i64 block = i64{1} << b;
      if (!(p.extra_tokens & block)) continue;
      i64 night = pt + 1;
      bool found = false;
      for (const auto& seg : prefix) {
        if (seg.kind == SegKind::Level && step_of(seg.level) == block) {
          found = true;
          break;
        }
        night += seg.len;
      }
      if (!found) throw GenError("extra-token block has no matching signaling level");
      out.emplace_back(night, block);
    }
    return out;
  }

  const StrategyParams& params() const { return p; }

  StrategyParams p;
  int n = 0;
  i64 t = 0;
  i64 pt = 0;
  std::vector<i64> pm;  // p_marks, pm[0] = 0
  std::vector<i64> G;   // cumulative goals, G[0] = 0
  std::vector<int> levels;
  i64 total = 0;
  bool observer = false;
  bool talent_currency = false;
  bool ternary = false;
  bool has_head = false;
  bool full_pocket = false;
  std::vector<Segment> prefix;
  std::vector<Segment> cycle;
  i64 cycle_total = 0;

 private:
  void build_segments() {
    const Family f = p.family;
    if (f == Family::SingleCounter || f == Family::Nc2TwoToken || f == Family::Nc2Waiting)
      return;  // flat families: constant meanings, no segment stream
    if (f == Family::BinaryDiscardFirst || f == Family::TernaryDiscardFirst) {
      prefix.push_back({SegKind::Level, 0, kInfLen});
      return;
    }
    if (f == Family::BinaryTokens || f == Family::BinaryAccelerated) {
      for (std::size_t L = 0; L < p.level_first.size(); ++L)
        prefix.push_back({SegKind::Level, static_cast<int>(L), p.level_first[L]});
      for (std::size_t L = 0; L < p.level_first.size(); ++L)
        if (p.level_repeat[L] > 0)
          cycle.push_back({SegKind::Level, static_cast<int>(L), p.level_repeat[L]});
      return;
    }
    if (p.inf_token || p.token_first == 0) {
      prefix.push_back({SegKind::Token, -1, kInfLen});
      return;
    }
    prefix.push_back({SegKind::Token, -1, p.token_first - pt});
    for (std::size_t L = 0; L < levels.size(); ++L)
      prefix.push_back({SegKind::Level, static_cast<int>(L), p.level_first[L]});
    if (p.descending > 0)
      for (int L = static_cast<int>(levels.size()) - 2; L >= 0; --L)
        prefix.push_back({SegKind::Desc, L, p.descending});
    prefix.push_back({SegKind::Token, -1, p.token_second});
    for (std::size_t L = 0; L < levels.size(); ++L)
      prefix.push_back({SegKind::Level, static_cast<int>(L), p.level_repeat[L]});
    cycle.push_back({SegKind::Token, -1, p.token_repeat});
    for (std::size_t L = 0; L < levels.size(); ++L)
      cycle.push_back({SegKind::Level, static_cast<int>(L), p.level_repeat[L]});
  }

  void index_segments() {
    cycle_total = 0;
    for (const auto& s : cycle) cycle_total += s.len;
    if (cycle.empty()) cycle_total = 1;
  }
};

}  // namespace prisoners
