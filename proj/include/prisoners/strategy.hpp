#pragma once
// Per-prisoner state and the strategy primitives: observer statistics update,
// the restart choice rule, and the counter-family decide functions.
// The schedule-driven families (snowball/phase machinery) are composed in
// sim.hpp on top of these pieces.

#include <array>
#include <cstdint>

#include "prisoners/schedule.hpp"

namespace prisoners {

constexpr int kMaxLevels = 7;  // enough for totals up to 2^7 = 128

struct PrisonerState {
  i64 tokens = 1;
  i64 talents = 0;
  bool visited = false;
  bool is_head = false;   // collector / head-collector role
  bool waiting = false;   // nc2-waiting: has not yet observed ON
  bool virgin = false;    // nc2 collector: first visit pending
  std::array<i64, kMaxLevels + 1> o{};  // observer counters o_0..o_k
  // last room presence, for the observer join rule
  int8_t last_kind = -1;  // 0 = token segment, 1 = level segment
  i64 last_inst = -1;
  int8_t last_state = -1;

  void reset(i64 start_tokens) {
    tokens = start_tokens;
    talents = 0;
    visited = is_head = waiting = virgin = false;
    o.fill(0);
    last_kind = -1;
    last_inst = -1;
    last_state = -1;
  }
};

struct Decision {
  int leave = 0;
  bool assert_done = false;
};

// Observation of ON during 2^i signaling raises o_i to o_{i+1} + 2^i;
// OFF right after an ON seen in the same stage instance adds the joined
// 2^{i+1} chunk. Increases propagate downward so o_0 >= o_1 >= ... holds.
inline void observer_update(PrisonerState& p, const Schedule& s, i64 night, int state) {
  if (night <= s.pt) return;
  const NightInfo ni = s.night_info(night);
  if (ni.kind == SegKind::Token) {
    p.last_kind = 0;
    p.last_inst = ni.instance;
    p.last_state = static_cast<int8_t>(state);
    return;
  }
  const int li = ni.level;
  const i64 step = s.step_of(li);
  if (state == 1) {
    const i64 v = p.o[li + 1] + step;
    if (v > p.o[li]) p.o[li] = v;
    for (int q = li; q > 0; --q)
      if (p.o[q] > p.o[q - 1]) p.o[q - 1] = p.o[q];
  } else if (p.last_kind == 1 && p.last_inst == ni.instance && p.last_state == 1) {
    p.o[li + 1] += 2 * step;
    for (int q = li + 1; q > 0; --q)
      if (p.o[q] > p.o[q - 1]) p.o[q - 1] = p.o[q];
  }
  p.last_kind = 1;
  p.last_inst = ni.instance;
  p.last_state = static_cast<int8_t>(state);
}

// Expected tokens a restarted pool gathers over the remaining subphase
// nights: sum of P(fresh visitor) with m prisoners already known distinct.
inline double expected_pool(int n, i64 already, i64 remaining) {
  double e = 0.0, prod = 1.0;
  for (i64 i = 0; i < remaining; ++i) {
    double fresh = static_cast<double>(n - already - i);
    if (fresh < 0) fresh = 0;
    prod *= fresh / n;
    e += prod;
  }
  return e;
}

// Restart an interrupted subphase? Certain with spare talents; with the last
// talent only when the expected re-collection beats the tokens kept, and
// never into a dead (negative tokens, no talent, not head) position. The
// dead-position test uses the post-restart head status: restarting the first
// subphase resigns the headship itself.
inline bool restart_choice(i64 talents, bool is_head, bool post_head, i64 result_talents,
                           i64 result_tokens, double expected_gain) {
  if (talents < 1 && !is_head) return false;
  if (result_talents == 0 && result_tokens < 0 && !post_head) return false;
  if (talents >= 2) return true;
  return expected_gain > static_cast<double>(result_tokens);
}

// --- counter families (flat signal meanings: ON = one token in the room) ---

struct FlatCtx {
  int observed = 0;
  bool is_day_one = false;
  bool release_draw = false;  // nc2-waiting collector release, drawn by caller
};

inline Decision decide_single_counter(PrisonerState& p, const FlatCtx& c) {
  if (p.is_head) {
    if (c.observed == 1) p.tokens += 1;
    return {0, p.tokens == 0};
  }
  if (c.observed == 0 && p.tokens >= 1) {
    p.tokens -= 1;
    return {1, false};
  }
  return {c.observed, false};
}

inline Decision decide_nc2_two_token(PrisonerState& p, const FlatCtx& c) {
  if (p.is_head) {
    if (p.virgin) {
      p.virgin = false;
      return {0, false};  // a possibly spurious ON is absorbed uncounted
    }
    if (c.observed == 1) p.tokens += 1;
    return {0, p.tokens == 0};
  }
  if (c.observed == 0 && p.tokens >= 1) {
    p.tokens -= 1;
    return {1, false};
  }
  return {c.observed, false};
}

inline Decision decide_nc2_waiting(PrisonerState& p, const FlatCtx& c) {
  if (p.is_head) {
    if (p.virgin) {
      p.virgin = false;
      if (c.observed == 1) return {0, false};  // uncounted
    } else if (c.observed == 1) {
      p.tokens += 1;
      return {0, p.tokens == 0};
    }
    if (c.release_draw) {
      p.tokens -= 1;
      return {1, false};
    }
    return {0, false};
  }
  if (p.waiting) {
    if (c.observed == 1) p.waiting = false;
    return {c.observed, false};
  }
  if (c.observed == 0 && p.tokens >= 1) {
    p.tokens -= 1;
    return {1, false};
  }
  return {c.observed, false};
}

}  // namespace prisoners
