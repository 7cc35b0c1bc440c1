#pragma once
// The warden: uniform random scheduling, the ledger-driven visit engine for
// every protocol family, transcripts, conformance verification, and parallel
// Monte Carlo batches.
//
// Bookkeeping frame: every visitor's pocket change is M_in(night d-1, seen) -
// M_out(night d, left) per the schedule's signal meanings, so token/talent
// conservation is checkable in O(1) after each visit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "prisoners/rng.hpp"
#include "prisoners/strategy.hpp"

namespace prisoners {

constexpr i64 kDayCap = 10'000'000;

struct SimError : std::runtime_error {
  SimError(const std::string& rule_id, i64 night, const std::string& what)
      : std::runtime_error("[" + rule_id + "] night " + std::to_string(night) + ": " + what),
        rule(rule_id),
        night_index(night) {}
  std::string rule;
  i64 night_index;
};

struct RunOutcome {
  i64 visits = 0;
  bool terminated = false;
  bool assertion_valid = false;
  bool capped = false;
};

struct TranscriptEntry {
  i64 day;
  int prisoner;
  int8_t observed;
  int8_t left;
  bool asserted;
};

struct Transcript {
  int initial_state = 0;
  StrategyParams params;
  std::vector<TranscriptEntry> entries;
};

struct SimStats {
  i64 runs = 0;
  i64 capped = 0;
  i64 total_visits = 0;
  unsigned __int128 total_sq = 0;

  void add(i64 visits, bool was_capped) {
    runs += 1;
    capped += was_capped ? 1 : 0;
    total_visits += visits;
    total_sq += static_cast<unsigned __int128>(visits) * static_cast<unsigned __int128>(visits);
  }
  void merge(const SimStats& o) {
    runs += o.runs;
    capped += o.capped;
    total_visits += o.total_visits;
    total_sq += o.total_sq;
  }
  double mean() const { return runs ? static_cast<double>(total_visits) / runs : 0.0; }
  double variance() const {
    if (runs < 2) return 0.0;
    const double m = mean();
    return static_cast<double>(total_sq) / runs - m * m;
  }
  double stderror() const {
    return runs ? std::sqrt(variance() / static_cast<double>(runs)) : 0.0;
  }
  double ci95() const { return 1.96 * stderror(); }
};

class Engine {
 public:
  struct VisitResult {
    int leave = 0;
    bool asserted = false;
    unsigned legal = 0;  // bit 0: leaving OFF legal, bit 1: leaving ON legal
  };

  explicit Engine(const Schedule& sched) : s_(sched), pr_(sched.n) {
    if (s_.p.extra_tokens > 0) {
      releases_ = s_.release_nights();
      std::sort(releases_.begin(), releases_.end());
    }
  }

  void reset(std::uint64_t seed) {
    rng_.reseed(seed);
    const Family f = s_.p.family;
    const int n = s_.n;
    for (auto& p : pr_) p.reset(1);
    visited_ = 0;
    first_elected_ = false;
    next_release_ = 0;
    room_real_ = 0;
    phantom_ = false;
    sum_tal_ = 0;
    exp_tal_ = 0;

    initial_ = static_cast<int>(rng_.bounded(2));
    if (s_.p.variant == Variant::B2) initial_ = 0;
    switch_ = initial_;

    switch (f) {
      case Family::SingleCounter:
        if (s_.p.variant == Variant::B2) {
          pr_[0].tokens = 1 - n;
          pr_[0].is_head = true;
          sum_tok_ = 0;
          exp_tok_ = 0;
        } else {
          sum_tok_ = n;
          exp_tok_ = n;  // day-1 seeding moves both to 0
        }
        break;
      case Family::Nc2TwoToken:
        for (auto& p : pr_) p.tokens = 2;
        pr_[0].tokens = 3 - 2 * n;  // -(2n-1) plus his own pair, pre-counted
        pr_[0].is_head = true;
        pr_[0].virgin = true;
        phantom_ = initial_ == 1;
        sum_tok_ = 1;
        exp_tok_ = 1;
        break;
      case Family::Nc2Waiting:
        for (auto& p : pr_) {
          p.tokens = 1;
          p.waiting = true;
        }
        pr_[0].tokens = 1 - n;
        pr_[0].is_head = true;
        pr_[0].virgin = true;
        pr_[0].waiting = false;
        phantom_ = initial_ == 1;
        sum_tok_ = 0;
        exp_tok_ = 0;
        break;
      case Family::BinaryDiscardFirst:
      case Family::TernaryDiscardFirst:
        sum_tok_ = n;
        exp_tok_ = n - 1;
        break;
      case Family::BinaryTokens:
      case Family::BinaryAccelerated:
        sum_tok_ = n;
        exp_tok_ = n;
        break;
      default:  // snowball-driven families balance against the night-0 meaning
        sum_tok_ = n;
        exp_tok_ = 0;
    }
  }

  // pin a recorded initial state when replaying a transcript
  void force_initial(int state) {
    initial_ = state;
    switch_ = state;
    if (s_.p.family == Family::Nc2TwoToken || s_.p.family == Family::Nc2Waiting)
      phantom_ = state == 1;
  }

  int draw_prisoner() { return static_cast<int>(rng_.bounded(s_.n)); }
  int switch_state() const { return switch_; }
  int initial_state() const { return initial_; }
  i64 visited_count() const { return visited_; }
  const PrisonerState& prisoner(int i) const { return pr_[i]; }

  VisitResult visit(i64 d, int idx, const int* forced_leave = nullptr) {
    const Family f = s_.p.family;
    PrisonerState& p = pr_[idx];
    const bool first_visit = !p.visited;
    if (first_visit) {
      p.visited = true;
      ++visited_;
    }
    if (s_.n == 1) return {switch_, true, static_cast<unsigned>(1u << switch_)};

    if (f == Family::SingleCounter || f == Family::Nc2TwoToken || f == Family::Nc2Waiting)
      return visit_flat(d, p, forced_leave);
    return visit_scheduled(d, p, first_visit);
  }

 private:
  VisitResult visit_flat(i64 d, PrisonerState& p, const int* forced_leave) {
    const Family f = s_.p.family;
    const int observed = switch_;
    const i64 pre_tokens = p.tokens;
    const bool was_virgin = p.virgin;
    unsigned legal = 0;
    Decision dec;

    if (f == Family::SingleCounter && s_.p.variant == Variant::A2 && d == 1) {
      p.tokens -= s_.n;  // becomes the counter; a spurious ON dies here
      p.is_head = true;
      exp_tok_ -= s_.n;
      dec = {0, false};
      legal = 0b01;
    } else {
      FlatCtx c;
      c.observed = observed;
      c.is_day_one = d == 1;
      const bool stochastic = f == Family::Nc2Waiting && p.is_head && observed == 0;
      if (stochastic) {
        c.release_draw =
            forced_leave ? (*forced_leave == 1) : (rng_.uniform01() < s_.p.p_release);
        legal = 0b11;
      }
      switch (f) {
        case Family::SingleCounter: dec = decide_single_counter(p, c); break;
        case Family::Nc2TwoToken: dec = decide_nc2_two_token(p, c); break;
        default: dec = decide_nc2_waiting(p, c); break;
      }
      if (!legal) legal = 1u << dec.leave;
    }

    // ground-truth room bookkeeping
    if (f != Family::SingleCounter) {
      if (p.is_head && was_virgin && observed == 1) {
        if (phantom_) {
          phantom_ = false;  // the spurious token dies uncounted
        } else {
          room_real_ = 0;  // a real token eaten uncounted is gone for good
          exp_tok_ -= 1;
        }
      } else if (observed == 1 && dec.leave == 0 && p.tokens > pre_tokens) {
        room_real_ -= 1;
      } else if (observed == 0 && dec.leave == 1) {
        room_real_ += 1;
      }
    }
    sum_tok_ += p.tokens - pre_tokens;
    switch_ = dec.leave;

    const i64 room = f == Family::SingleCounter ? (switch_ == 1 ? 1 : 0) : room_real_;
    if (sum_tok_ + room != exp_tok_)
      throw SimError("conservation", d,
                     "tokens " + std::to_string(sum_tok_) + "+" + std::to_string(room) +
                         " != " + std::to_string(exp_tok_));
    if (f != Family::SingleCounter) {
      const bool occupied = room_real_ >= 1 || phantom_;
      if ((switch_ == 1) != occupied)
        throw SimError("conservation", d, "switch state inconsistent with room content");
    }
    return {dec.leave, dec.assert_done, legal};
  }

  VisitResult visit_scheduled(i64 d, PrisonerState& p, bool first_visit) {
    const Family f = s_.p.family;
    const i64 g = d;
    const i64 gin = d - 1;
    const int s_in = switch_;
    const SignalMeaning min_ = s_.meaning(gin, s_in);
    bool asserted = false;

    if (s_.observer && gin > s_.pt) {
      observer_update(p, s_, gin, s_in);
      if (p.o[0] >= s_.total) asserted = true;
    }

    while (next_release_ < releases_.size() && g == releases_[next_release_].first) {
      const i64 block = releases_[next_release_].second;
      p.tokens += block;
      sum_tok_ += block;
      exp_tok_ += block;
      ++next_release_;
    }

    int s_out;
    if (d == 1 && f != Family::BinaryTokens) {
      if (f == Family::BinaryDiscardFirst || f == Family::TernaryDiscardFirst) {
        s_out = 0;  // the first token is discarded
      } else if (f == Family::BinaryAccelerated) {
        p.tokens -= s_.total;  // becomes the collector
        sum_tok_ -= s_.total;
        exp_tok_ -= s_.total;
        p.is_head = true;
        s_out = 0;
      } else {
        s_out = 1;  // first pool member signs on
      }
    } else if (g <= s_.pt) {
      s_out = decide_snowball_region(d, g, gin, s_in, p, first_visit);
    } else {
      s_out = decide_phase_region(g, gin, s_in, min_, p);
    }

    // uniform ledger
    const SignalMeaning mout = s_.meaning(g, s_out);
    const i64 e_in = s_.elected_of(gin, s_in);
    const i64 e_out = s_.elected_of(g, s_out);
    const i64 dtok = min_.tokens - mout.tokens;
    i64 dtal = min_.talents - mout.talents;
    if (e_out > e_in && e_in == 0) {
      if (f == Family::SnowballSingle || f == Family::TwoLevel) {
        p.is_head = true;
      } else if (s_.observer && !first_elected_) {
        dtal = e_out;  // election credit; the room retains t - e_out
        exp_tal_ = s_.total;
      }
      first_elected_ = true;
    } else if (e_out < e_in && e_out == 0) {
      p.is_head = false;  // restarting resigns the election
      if (s_.observer && first_elected_) {
        dtal = -e_in;  // give the election credit back
        exp_tal_ = 0;
      }
      first_elected_ = false;
    }
    p.tokens += dtok;
    p.talents += dtal;
    sum_tok_ += dtok;
    sum_tal_ += dtal;
    switch_ = s_out;

    if (s_.observer) {
      observer_update(p, s_, g, s_out);
      if (p.o[0] >= s_.total) asserted = true;
    }

    if (sum_tok_ + mout.tokens != exp_tok_ || sum_tal_ + mout.talents != exp_tal_)
      throw SimError("conservation", g,
                     "tokens " + std::to_string(sum_tok_) + "+" + std::to_string(mout.tokens) +
                         " != " + std::to_string(exp_tok_) + " or talents " +
                         std::to_string(sum_tal_) + "+" + std::to_string(mout.talents) +
                         " != " + std::to_string(exp_tal_));

    if (s_.has_head && p.is_head && p.tokens == 0 && p.talents == 0) asserted = true;
    if (s_.full_pocket) {
      const i64 cur = s_.talent_currency ? p.talents : p.tokens;
      const i64 debt = s_.talent_currency ? p.tokens : 0;
      if (cur >= s_.total && debt >= 0) asserted = true;
    }
    return {s_out, asserted, static_cast<unsigned>(1u << s_out)};
  }

  int decide_snowball_region(i64 d, i64 g, i64 gin, int s_in, PrisonerState& p,
                             bool first_visit) {
    if (s_in == 1) {
      const int m_in = s_.sub_of(gin);
      if (gin == s_.pm[m_in]) {
        // subphase boundary: the pool must be collected; only a fresh
        // prisoner seeds the next one
        return (p.talents >= 1 || p.is_head) ? 0 : 1;
      }
      if (gin - s_.pm[m_in - 1] < s_.p.snowballs[m_in - 1].ell) {
        if (p.tokens >= 1) return 1;                // drop, the pool grows
        if (p.talents >= 1 || p.is_head) return 1;  // phantom drop keeps it alive
        if (d == 2 && !first_visit) return 0;       // day-1 visitor keeps his own
        return 0;                                   // tokenless: take the pool
      }
      // slack nights: the signal is static
      return (p.talents == 0 && !p.is_head) ? 0 : 1;
    }

    const int m_in = s_.sub_of(gin);
    if (gin == 2 && m_in == 1) {  // kept signal
      if (p.talents == 0 && !p.is_head) return 0;
      return g <= s_.p.snowballs[0].ell ? 1 : 0;
    }
    if (gin == s_.pm[m_in - 1] + 1) {  // pending seed
      if (p.talents == 0 && !p.is_head) return 0;
      return g - s_.pm[m_in - 1] <= s_.p.snowballs[m_in - 1].ell ? 1 : 0;
    }
    // elected-j signal
    const int j = m_in;
    if (g <= s_.pm[j]) return restart_interrupted(p, j, g) ? 1 : 0;
    return p.tokens >= 1 ? 1 : 0;  // seed the next pool if possible
  }

  bool restart_interrupted(PrisonerState& p, int j, i64 g) {
    const i64 pp = s_.pm[j - 1];
    const i64 ell = s_.p.snowballs[j - 1].ell;
    const i64 r = g - pp;
    if (r > ell) return false;
    const i64 min_tok = s_.G[j] - s_.n;
    const i64 tal_on = j == 1 ? 0 : s_.t - (j - 1);
    const i64 mout_tok = r + s_.G[j - 1] - s_.n;
    const i64 ntok = p.tokens + (min_tok - mout_tok);
    i64 ntal;
    if (j == 1 && s_.observer) {
      ntal = p.talents - 1;  // resigning the first election
    } else {
      ntal = p.talents + ((s_.t - j) - tal_on);
    }
    const double gain = expected_pool(s_.n, r, s_.pm[j] - g);
    const bool post_head = p.is_head && j != 1;
    return restart_choice(p.talents, p.is_head, post_head, ntal, ntok, gain);
  }

  int decide_phase_region(i64 g, i64 gin, int s_in, SignalMeaning min_, PrisonerState& p) {
    const Family f = s_.p.family;
    const NightInfo ni = s_.night_info(g);
    const bool in_phase = gin > s_.pt;
    NightInfo ni_in{SegKind::Token, -1, -1};
    if (in_phase) ni_in = s_.night_info(gin);

    if (ni.kind == SegKind::Token) {
      if (in_phase && ni_in.kind == SegKind::Token) {
        if (s_in == 1) return p.tokens < 0 ? 0 : 1;  // collect or pass
        return p.tokens >= 1 ? 1 : 0;                // drop or pass
      }
      return p.tokens + min_.tokens >= 1 ? 1 : 0;  // absorb carry, maybe re-drop
    }

    const int lev = s_.levels[ni.level];
    const bool same_stage = in_phase && ni_in.kind == ni.kind && ni_in.level == ni.level &&
                            ni_in.instance == ni.instance;
    i64 ctok, ctal;
    if (same_stage) {
      ctok = p.tokens;
      ctal = p.talents;
    } else {
      ctok = p.tokens + min_.tokens;
      ctal = p.talents + min_.talents;
    }

    bool dep, col;
    const bool top = ni.level == static_cast<int>(s_.levels.size()) - 1;
    if (f == Family::TwoLevel) {
      dep = ctok >= 0 && ctal >= 1;
      col = ctal < 0;
    } else if (s_.talent_currency) {
      dep = ctok >= 0 && ((ctal >> lev) & 1);
      col = dep || (s_.ternary && top && ctok >= 0 && ((ctal >> (lev + 1)) & 1));
    } else {
      i64 chunks = 0;
      if (ctok >= 0)
        chunks = (f == Family::BinaryAccelerated && top) ? (ctok >> lev) : ((ctok >> lev) & 1);
      dep = chunks >= 1;
      col = dep || (s_.ternary && top && ctok >= 0 && ((ctok >> (lev + 1)) & 1));
      if (f == Family::BinaryAccelerated && p.is_head) {
        col = true;  // the collector hoovers up whatever the stage offers
        dep = false;
      }
    }
    if (same_stage) {
      if (s_in == 1) return col ? 0 : 1;
      return dep ? 1 : 0;
    }
    return dep ? 1 : 0;
  }

  const Schedule& s_;
  Xoshiro256pp rng_;
  std::vector<PrisonerState> pr_;
  int switch_ = 0;
  int initial_ = 0;
  i64 visited_ = 0;
  i64 sum_tok_ = 0, sum_tal_ = 0, exp_tok_ = 0, exp_tal_ = 0;
  bool first_elected_ = false;
  int room_real_ = 0;
  bool phantom_ = false;
  std::vector<std::pair<i64, i64>> releases_;
  std::size_t next_release_ = 0;
};

inline RunOutcome run_once(const Schedule& sched, std::uint64_t seed, i64 cap = kDayCap,
                           Transcript* transcript = nullptr) {
  Engine eng(sched);
  eng.reset(seed);
  if (transcript) {
    transcript->initial_state = eng.initial_state();
    transcript->params = sched.p;
    transcript->entries.clear();
  }
  for (i64 d = 1; d <= cap; ++d) {
    const int idx = eng.draw_prisoner();
    const int observed = eng.switch_state();
    const Engine::VisitResult r = eng.visit(d, idx);
    if (transcript)
      transcript->entries.push_back(
          {d, idx, static_cast<int8_t>(observed), static_cast<int8_t>(r.leave), r.asserted});
    if (r.asserted) {
      if (eng.visited_count() != sched.n)
        throw SimError("assert-coverage", d,
                       "assertion with " + std::to_string(eng.visited_count()) + "/" +
                           std::to_string(sched.n) + " prisoners seen");
      return {d, true, true, false};
    }
  }
  return {cap, false, false, true};
}

inline SimStats run_batch(const StrategyParams& params, i64 runs, std::uint64_t master_seed,
                          int workers = 0, i64 cap = kDayCap) {
  if (workers <= 0) {
    if (const char* env = std::getenv("PRISONERS_WORKERS"); env && *env)
      workers = std::atoi(env);
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = static_cast<int>(std::min<i64>(workers, std::max<i64>(runs, 1)));

  std::vector<SimStats> parts(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int w) {
    try {
      Schedule sched(params);  // worker-local: night lookups stay contention-free
      Engine eng(sched);
      const i64 lo = runs * w / workers;
      const i64 hi = runs * (w + 1) / workers;
      for (i64 i = lo; i < hi; ++i) {
        eng.reset(seed_for(master_seed, static_cast<std::uint64_t>(i)));
        bool done = false;
        for (i64 d = 1; d <= cap; ++d) {
          const int idx = eng.draw_prisoner();
          const Engine::VisitResult r = eng.visit(d, idx);
          if (r.asserted) {
            if (eng.visited_count() != sched.n)
              throw SimError("assert-coverage", d, "false assertion");
            parts[w].add(d, false);
            done = true;
            break;
          }
        }
        if (!done) parts[w].add(cap, true);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SimStats out;
  for (const auto& part : parts) out.merge(part);
  return out;
}

struct Violation {
  i64 night;
  std::string rule;
  std::string detail;
};

struct VerifyReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline VerifyReport verify_transcript(const Transcript& tr) {
  VerifyReport report;
  auto flag = [&](i64 night, const std::string& rule, std::string detail) {
    report.violations.push_back({night, rule, std::move(detail)});
  };
  Schedule sched(tr.params);
  Engine eng(sched);
  eng.reset(0);
  eng.force_initial(tr.initial_state);

  for (std::size_t i = 0; i < tr.entries.size(); ++i) {
    const auto& e = tr.entries[i];
    if (e.observed != eng.switch_state()) {
      flag(e.day - 1, "chain",
           "entry observed " + std::to_string(e.observed) + " but the night holds " +
               std::to_string(eng.switch_state()));
      break;
    }
    const int forced = e.left;
    Engine::VisitResult r;
    try {
      r = eng.visit(e.day, e.prisoner, &forced);
    } catch (const SimError& err) {
      flag(err.night_index, err.rule, err.what());
      break;
    }
    if (!(r.legal & (1u << e.left))) {
      flag(e.day, "decision",
           "prisoner " + std::to_string(e.prisoner) + " left " + std::to_string(e.left) +
               " where the strategy allows only " + std::to_string(r.leave));
      break;
    }
    if (e.asserted) {
      if (i + 1 != tr.entries.size())
        flag(e.day, "assert-placement", "assertion is not the final entry");
      if (!r.asserted) flag(e.day, "assert-placement", "assertion without a satisfied stop rule");
      if (eng.visited_count() != sched.n)
        flag(e.day, "assert-coverage",
             std::to_string(eng.visited_count()) + "/" + std::to_string(sched.n) +
                 " prisoners seen at assertion");
      break;
    }
    if (r.asserted) {
      flag(e.day, "assert-placement", "stop rule satisfied but no assertion recorded");
      break;
    }
  }
  return report;
}

}  // namespace prisoners
