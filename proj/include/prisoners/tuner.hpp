#pragma once
// Evolutionary gen search: records keyed by parametrization, cube-law
// selection over the average-ordered population, one-field constrained
// mutation, and snapshot reporting (population vs last-generation average).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prisoners/gen.hpp"
#include "prisoners/rng.hpp"
#include "prisoners/sim.hpp"

namespace prisoners {

struct GenRecord {
  StrategyParams params;
  i64 sims = 0;
  i64 total_visits = 0;
  i64 snapshot_sims = 0;
  i64 snapshot_visits = 0;

  double average() const {
    return static_cast<double>(total_visits) / static_cast<double>(sims);
  }
};

struct Population {
  std::vector<GenRecord> records;  // kept ordered by increasing average

  i64 total_sims() const {
    i64 s = 0;
    for (const auto& r : records) s += r.sims;
    return s;
  }

  // re-place record i after its average moved; stable for ties
  void reposition(std::size_t i) {
    auto key = [](const GenRecord& r) {
      return r.sims > 0 ? r.average() : std::numeric_limits<double>::infinity();
    };
    const double k = key(records[i]);
    std::size_t j = i;
    while (j > 0 && key(records[j - 1]) > k) --j;
    if (j < i) {
      std::rotate(records.begin() + j, records.begin() + i, records.begin() + i + 1);
      return;
    }
    while (j + 1 < records.size() && key(records[j + 1]) < k) ++j;
    if (j > i) std::rotate(records.begin() + i, records.begin() + i + 1, records.begin() + j + 1);
  }

  std::size_t find_or_insert(const StrategyParams& p) {
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].params == p) return i;
    records.push_back(GenRecord{p, 0, 0, 0, 0});
    return records.size() - 1;
  }

  std::size_t best_index() const {
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].sims > 0) return i;
    throw std::invalid_argument("population has no simulated records");
  }
};

// cube-law pick: walking in increasing-average order, the first record where
// the running sims total exceeds r^3 * s
inline std::size_t select_index(const Population& pop, double r) {
  if (pop.records.empty()) throw std::invalid_argument("select_gen: empty population");
  const i64 s = pop.total_sims();
  if (s <= 0) throw std::invalid_argument("select_gen: population has no simulations");
  const double threshold = r * r * r * static_cast<double>(s);
  i64 cum = 0;
  std::size_t last_with_sims = 0;
  bool seen = false;
  for (std::size_t i = 0; i < pop.records.size(); ++i) {
    if (pop.records[i].sims == 0) continue;
    cum += pop.records[i].sims;
    last_with_sims = i;
    seen = true;
    if (static_cast<double>(cum) > threshold) return i;
  }
  (void)seen;
  return last_with_sims;  // r -> 1 boundary
}

inline const GenRecord& select_gen(const Population& pop, double r) {
  return pop.records[select_index(pop, r)];
}

struct MutationResult {
  StrategyParams params;
  bool changed = false;
};

namespace detail {

// pattern constraints are enforced only where the parent already satisfies
// them, so published seed gens that bend a rule stay mutable
inline std::vector<std::string> gen_warnings(const StrategyParams& p) {
  std::vector<std::string> w;
  validate_params(p, &w);
  return w;
}

inline bool warnings_subset(const std::vector<std::string>& child,
                            const std::vector<std::string>& parent) {
  for (const auto& c : child)
    if (std::find(parent.begin(), parent.end(), c) == parent.end()) return false;
  return true;
}

inline i64 geometric_step(i64 v, Xoshiro256pp& rng) {
  const double factor = 1.0 + 0.1 * rng.uniform01();
  const bool up = rng.bounded(2) == 0;
  const double x = up ? v * factor : v / factor;
  i64 nv = static_cast<i64>(std::llround(x));
  if (nv == v) nv += up ? 1 : -1;
  return nv < 1 ? 1 : nv;
}

}  // namespace detail

inline MutationResult mutate_gen(const StrategyParams& g, Xoshiro256pp& rng, int retries = 64) {
  struct Field {
    int kind;  // 0 ell, 1 slack, 2 goal, 3 tok1, 4 tok2, 5 tok3, 6 lfirst, 7 lrepeat, 8 desc
    std::size_t idx = 0;
  };
  std::vector<Field> fields;
  for (std::size_t i = 0; i < g.snowballs.size(); ++i) {
    fields.push_back({0, i});
    fields.push_back({1, i});
    if (g.snowballs.size() > 1) fields.push_back({2, i});
  }
  if (!g.inf_token && family_takes_gen(g.family) && g.family != Family::BinaryTokens &&
      g.family != Family::BinaryAccelerated) {
    fields.push_back({3, 0});
    fields.push_back({4, 0});
    fields.push_back({5, 0});
  }
  for (std::size_t l = 0; l < g.level_first.size(); ++l) {
    fields.push_back({6, l});
    fields.push_back({7, l});
  }
  if (g.descending > 0) fields.push_back({8, 0});
  if (fields.empty()) return {g, false};

  const auto parent_warnings = detail::gen_warnings(g);
  for (int attempt = 0; attempt < retries; ++attempt) {
    const Field f = fields[rng.bounded(fields.size())];
    StrategyParams c = g;
    const i64 delta = rng.bounded(2) == 0 ? 1 : -1;
    switch (f.kind) {
      case 0: c.snowballs[f.idx].ell += delta; break;
      case 1: c.snowballs[f.idx].slack += delta; break;
      case 2: {
        // shift one goal unit to another triple so the sum stays n
        std::size_t other = rng.bounded(c.snowballs.size() - 1);
        if (other >= f.idx) ++other;
        c.snowballs[f.idx].goal += delta;
        c.snowballs[other].goal -= delta;
        break;
      }
      case 3: c.token_first = detail::geometric_step(c.token_first, rng); break;
      case 4: c.token_second = detail::geometric_step(c.token_second, rng); break;
      case 5: c.token_repeat = detail::geometric_step(c.token_repeat, rng); break;
      case 6: c.level_first[f.idx] = detail::geometric_step(c.level_first[f.idx], rng); break;
      case 7: c.level_repeat[f.idx] = detail::geometric_step(c.level_repeat[f.idx], rng); break;
      case 8: c.descending = detail::geometric_step(c.descending, rng); break;
    }
    if (c == g) continue;
    try {
      const auto child_warnings = detail::gen_warnings(c);
      if (!detail::warnings_subset(child_warnings, parent_warnings)) continue;
    } catch (const GenError&) {
      continue;
    }
    return {c, true};
  }
  return {g, false};
}

struct TuneOptions {
  i64 budget = 0;  // total simulations to spend
  i64 batch = 100;
  double mutation_prob = 0.05;
  std::uint64_t seed = 0;
  int workers = 0;
  i64 cap = kDayCap;
  int snapshots = 20;
};

struct SnapshotRow {
  i64 snapshot = 0;  // sims consumed at this point
  double population_avg = 0.0;
  double lastgen_avg = 0.0;
  std::string best_gen;
  double best_avg = 0.0;
};

struct TuneReport {
  std::vector<SnapshotRow> rows;
  i64 consumed = 0;
};

inline TuneReport tune(Population& pop, const TuneOptions& opt) {
  TuneReport report;
  if (opt.budget <= 0) return report;
  if (pop.records.empty()) throw std::invalid_argument("tune: empty population");

  Xoshiro256pp rng(seed_for(opt.seed, ~std::uint64_t{0}));
  std::uint64_t batch_index = 0;
  const i64 cadence = std::max<i64>(1, opt.budget / std::max(opt.snapshots, 1));
  i64 next_mark = cadence;

  auto emit = [&]() {
    SnapshotRow row;
    row.snapshot = report.consumed;
    i64 s = 0, v = 0, ds = 0, dv = 0;
    for (auto& r : pop.records) {
      s += r.sims;
      v += r.total_visits;
      ds += r.sims - r.snapshot_sims;
      dv += r.total_visits - r.snapshot_visits;
      r.snapshot_sims = r.sims;
      r.snapshot_visits = r.total_visits;
    }
    row.population_avg = static_cast<double>(v) / static_cast<double>(s);
    row.lastgen_avg = ds > 0 ? static_cast<double>(dv) / static_cast<double>(ds)
                             : row.population_avg;
    const GenRecord& best = pop.records[pop.best_index()];
    row.best_gen = family_takes_gen(best.params.family) ? render_gen(best.params) : "";
    row.best_avg = best.average();
    report.rows.push_back(std::move(row));
    while (next_mark <= report.consumed) next_mark += cadence;
  };

  // seed records that never ran get their first batch up front; repositioning
  // reorders the vector, so rescan instead of holding indices
  while (report.consumed < opt.budget) {
    std::size_t i = 0;
    while (i < pop.records.size() && pop.records[i].sims > 0) ++i;
    if (i == pop.records.size()) break;
    const i64 b = std::min(opt.batch, opt.budget - report.consumed);
    SimStats st = run_batch(pop.records[i].params, b, seed_for(opt.seed, batch_index++),
                            opt.workers, opt.cap);
    pop.records[i].sims += st.runs;
    pop.records[i].total_visits += st.total_visits;
    report.consumed += st.runs;
    pop.reposition(i);
    if (report.consumed >= next_mark) emit();
  }

  while (report.consumed < opt.budget) {
    const double r = rng.uniform01();
    std::size_t target = select_index(pop, r);
    if (rng.uniform01() < opt.mutation_prob) {
      MutationResult m = mutate_gen(pop.records[target].params, rng);
      if (m.changed) target = pop.find_or_insert(m.params);
    }
    const i64 b = std::min(opt.batch, opt.budget - report.consumed);
    SimStats st = run_batch(pop.records[target].params, b, seed_for(opt.seed, batch_index++),
                            opt.workers, opt.cap);
    pop.records[target].sims += st.runs;
    pop.records[target].total_visits += st.total_visits;
    report.consumed += st.runs;
    pop.reposition(target);
    if (report.consumed >= next_mark) emit();
  }
  return report;
}

inline nlohmann::json population_to_json(const Population& pop) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : pop.records) {
    recs.push_back({{"gen", family_takes_gen(r.params.family) ? render_gen(r.params) : ""},
                    {"sims", r.sims},
                    {"total_visits", r.total_visits}});
  }
  nlohmann::json j;
  if (!pop.records.empty()) {
    const auto& p = pop.records.front().params;
    j["family"] = family_name(p.family);
    j["n"] = p.n;
    j["extra_tokens"] = p.extra_tokens;
  }
  j["records"] = recs;
  return j;
}

inline Population population_from_json(const nlohmann::json& j) {
  Population pop;
  if (!j.contains("records") || j["records"].empty()) return pop;
  const Family family = family_from(j.at("family").get<std::string>());
  const int n = j.at("n").get<int>();
  const i64 extra = j.value("extra_tokens", i64{0});
  for (const auto& rj : j.at("records")) {
    GenRecord rec;
    rec.params = parse_gen(rj.at("gen").get<std::string>(), family, n, extra);
    rec.sims = rj.at("sims").get<i64>();
    rec.total_visits = rj.at("total_visits").get<i64>();
    rec.snapshot_sims = rec.sims;
    rec.snapshot_visits = rec.total_visits;
    pop.records.push_back(std::move(rec));
  }
  std::sort(pop.records.begin(), pop.records.end(), [](const GenRecord& a, const GenRecord& b) {
    const double ka = a.sims > 0 ? a.average() : std::numeric_limits<double>::infinity();
    const double kb = b.sims > 0 ? b.average() : std::numeric_limits<double>::infinity();
    return ka < kb;
  });
  return pop;
}

}  // namespace prisoners
