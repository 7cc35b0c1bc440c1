#pragma once
// Exact expected-visit solver: enumerates the joint chain (switch state +
// multiset of private prisoner states) for the families whose state space
// stays tractable, then solves the absorption-time system.
//
// Supported: single-counter nB2 (any n under the state bound) and the
// discard-first families. Everything else has an unbounded or phase-dependent
// state space and is answered by Monte Carlo instead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "prisoners/gen.hpp"

namespace prisoners {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace markov {

// private state of one prisoner, small enough to order and hash
struct Priv {
  i64 tokens = 0;
  int o0 = 0;
  int o1 = 0;
  int last = -1;  // -1 never in stage, else last seen stage state
  bool head = false;
  auto operator<=>(const Priv&) const = default;
};

struct State {
  int sw = 0;
  std::vector<Priv> pr;  // kept sorted: the multiset canonical form
  bool operator<(const State& o) const {
    if (sw != o.sw) return sw < o.sw;
    return pr < o.pr;
  }
};

struct Outcome {
  State next;
  bool absorbed = false;
};

class Model {
 public:
  Model(const StrategyParams& params, std::size_t max_states)
      : p_(params), max_states_(max_states) {
    const Family f = p_.family;
    if (f == Family::SingleCounter) {
      if (p_.variant != Variant::B2)
        throw std::invalid_argument("exact solver: single-counter supports the nB2 variant only");
    } else if (f != Family::BinaryDiscardFirst && f != Family::TernaryDiscardFirst) {
      throw std::invalid_argument(std::string("exact solver: unsupported family ") +
                                  family_name(f));
    }
    ternary_ = f == Family::TernaryDiscardFirst;
    discard_ = f != Family::SingleCounter;
    total_ = p_.n - 1;
  }

  // expected number of visits from the start of the run
  long double solve() {
    if (p_.n == 1) return 1.0L;
    State init = initial_state();
    i64 offset = 0;
    if (discard_) {
      // day 1 is the forced discard; the chain proper starts on day 2
      offset = 1;
      Priv& v = init.pr.front();  // all prisoners identical at day 1
      v.tokens -= 1;
      v.last = 0;
      sort_state(init);
    }
    enumerate(init);
    return offset + absorption_time(init);
  }

  std::size_t state_count() const { return index_.size(); }

 private:
  State initial_state() const {
    State s;
    s.sw = 0;
    Priv ord;
    ord.tokens = 1;
    if (discard_) {
      s.pr.assign(p_.n, ord);
    } else {
      Priv counter;
      counter.tokens = 1 - p_.n;
      counter.head = true;
      s.pr.assign(p_.n - 1, ord);
      s.pr.push_back(counter);
      sort_state(s);
    }
    return s;
  }

  static void sort_state(State& s) { std::sort(s.pr.begin(), s.pr.end()); }

  Outcome step(const State& s, std::size_t who) const {
    Outcome out;
    out.next = s;
    Priv& p = out.next.pr[who];
    int& sw = out.next.sw;

    if (!discard_) {
      if (p.head) {
        if (sw == 1) p.tokens += 1;
        sw = 0;
        out.absorbed = p.tokens == 0;
      } else if (sw == 0 && p.tokens >= 1) {
        p.tokens -= 1;
        sw = 1;
      }
      sort_state(out.next);
      return out;
    }

    // discard families: one endless unit-chunk stage with observer counting
    const int s_in = sw;
    // in-observation of the previous night
    if (s_in == 1) {
      if (p.o1 + 1 > p.o0) p.o0 = p.o1 + 1;
    } else if (p.last == 1) {
      p.o1 += 2;
      if (p.o1 > p.o0) p.o0 = p.o1;
    }
    p.last = s_in;
    if (p.o0 >= total_) {
      out.absorbed = true;
      sort_state(out.next);
      return out;
    }

    const bool bit0 = p.tokens >= 0 && (p.tokens & 1);
    const bool dep = bit0;
    const bool col = dep || (ternary_ && p.tokens >= 0 && ((p.tokens >> 1) & 1));
    int s_out;
    if (s_in == 1)
      s_out = col ? 0 : 1;
    else
      s_out = dep ? 1 : 0;
    p.tokens += (s_in == 1 ? 1 : 0) - (s_out == 1 ? 1 : 0);
    sw = s_out;

    // out-observation of the night just written
    if (s_out == 1) {
      if (p.o1 + 1 > p.o0) p.o0 = p.o1 + 1;
    } else if (p.last == 1) {
      p.o1 += 2;
      if (p.o1 > p.o0) p.o0 = p.o1;
    }
    p.last = s_out;

    if (p.o0 >= total_ || p.tokens >= total_) out.absorbed = true;
    sort_state(out.next);
    return out;
  }

  void enumerate(const State& init) {
    index_.clear();
    states_.clear();
    trans_.clear();
    index_[init] = 0;
    states_.push_back(init);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      const State s = states_[i];
      std::vector<std::pair<std::size_t, long double>> row;  // (target, prob); absorbed -> npos
      std::size_t w = 0;
      while (w < s.pr.size()) {
        std::size_t same = 1;
        while (w + same < s.pr.size() && s.pr[w + same] == s.pr[w]) ++same;
        const Outcome o = step(s, w);
        const long double prob = static_cast<long double>(same) / p_.n;
        if (o.absorbed) {
          row.emplace_back(kAbsorbed, prob);
        } else {
          auto [it, fresh] = index_.try_emplace(o.next, states_.size());
          if (fresh) {
            states_.push_back(o.next);
            if (states_.size() > max_states_)
              throw ResourceError("exact solver: state bound " + std::to_string(max_states_) +
                                  " exceeded");
          }
          row.emplace_back(it->second, prob);
        }
        w += same;
      }
      trans_.push_back(std::move(row));
    }
  }

  long double absorption_time(const State& init) const {
    const std::size_t m = states_.size();
    std::vector<long double> e(m, 0.0L);
    if (m <= kDenseLimit) {
      // dense Gaussian elimination on (I - Q) e = 1
      std::vector<std::vector<long double>> a(m, std::vector<long double>(m + 1, 0.0L));
      for (std::size_t i = 0; i < m; ++i) {
        a[i][i] = 1.0L;
        a[i][m] = 1.0L;
        for (const auto& [j, pr] : trans_[i])
          if (j != kAbsorbed) a[i][j] -= pr;
      }
      for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r)
          if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < m; ++r) {
          if (r == c || a[r][c] == 0.0L) continue;
          const long double k = a[r][c] / a[c][c];
          for (std::size_t x = c; x <= m; ++x) a[r][x] -= k * a[c][x];
        }
      }
      for (std::size_t i = 0; i < m; ++i) e[i] = a[i][m] / a[i][i];
    } else {
      // Gauss-Seidel: converges on the substochastic absorbing system
      for (int iter = 0; iter < 200000; ++iter) {
        long double worst = 0.0L;
        for (std::size_t i = 0; i < m; ++i) {
          long double v = 1.0L;
          for (const auto& [j, pr] : trans_[i])
            if (j != kAbsorbed) v += pr * e[j];
          const long double d = v - e[i];
          if (d > worst) worst = d;
          if (-d > worst) worst = -d;
          e[i] = v;
        }
        if (worst < 1e-12L) break;
        if (iter == 199999)
          throw ResourceError("exact solver: iteration did not reach residual 1e-12");
      }
    }
    return e[index_.at(init)];
  }

  static constexpr std::size_t kAbsorbed = static_cast<std::size_t>(-1);
  static constexpr std::size_t kDenseLimit = 1200;  // keeps the O(m^3) solve under a second

  StrategyParams p_;
  std::size_t max_states_;
  bool ternary_ = false;
  bool discard_ = false;
  i64 total_ = 0;
  std::map<State, std::size_t> index_;
  std::vector<State> states_;
  std::vector<std::vector<std::pair<std::size_t, long double>>> trans_;
};

}  // namespace markov

inline long double exact_expected_visits(const StrategyParams& params,
                                         std::size_t max_states = 2'000'000) {
  markov::Model model(params, max_states);
  return model.solve();
}

}  // namespace prisoners
