// Command-line front end: simulate batches, exact expectations, bound tables,
// snowball-length queries, tuning sessions, and figure-style CSV reports.
//
// Exit codes: 0 success, 1 usage error, 2 safety/conformance violation,
// 3 resource bound (state space, day cap) exceeded.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prisoners/analysis.hpp"
#include "prisoners/markov.hpp"
#include "prisoners/sim.hpp"
#include "prisoners/tuner.hpp"

using nlohmann::ordered_json;
using namespace prisoners;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSafety = 2;
constexpr int kExitResource = 3;

Variant variant_from(const std::string& s) {
  if (s == "a2") return Variant::A2;
  if (s == "b2") return Variant::B2;
  if (s == "c2") return Variant::C2;
  throw GenError("unknown variant: " + s + " (want a2|b2|c2)");
}

Variant default_variant(Family f) {
  if (family_takes_gen(f)) return Variant::A2;
  if (f == Family::SingleCounter) return Variant::B2;
  return Variant::C2;  // nc2 and discard-first families
}

StrategyParams build_params(const std::string& family, int n, const std::string& variant,
                            const std::string& gen, i64 extra_tokens, double p_release) {
  const Family f = family_from(family);
  StrategyParams p;
  if (!gen.empty()) {
    p = parse_gen(gen, f, n, extra_tokens);
  } else {
    p.family = f;
    p.n = n;
    p.extra_tokens = extra_tokens;
  }
  p.variant = variant.empty() ? default_variant(f) : variant_from(variant);
  p.p_release = p_release;
  if (f == Family::Nc2Waiting && p.p_release == 0.0)
    p.p_release = 1.0 / n;  // default release rate
  validate_params(p);
  return p;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Args {
  std::string family, variant, gen, mode = "single";
  int n = 0;
  i64 runs = 0, budget = 0, batch = 100, extra_tokens = 0, cap = kDayCap, max_states = 2'000'000;
  std::uint64_t seed = 0;
  int workers = 0, verify = 0, snapshots = 20;
  double p_release = 0.0, mutation_prob = 0.05;
  std::string t_range, save, load, csv;
  bool binary = false, baseline = false, two_level = false;
  std::vector<std::string> sims;
};

int cmd_simulate(const Args& a) {
  StrategyParams p =
      build_params(a.family, a.n, a.variant, a.gen, a.extra_tokens, a.p_release);

  int bad_transcripts = 0;
  ordered_json vio = ordered_json::array();
  if (a.verify > 0) {
    Schedule sched(p);
    for (int i = 0; i < a.verify; ++i) {
      Transcript tr;
      run_once(sched, seed_for(a.seed, static_cast<std::uint64_t>(i)), a.cap, &tr);
      VerifyReport rep = verify_transcript(tr);
      if (!rep.ok()) {
        ++bad_transcripts;
        for (const auto& v : rep.violations)
          vio.push_back({{"sample", i}, {"night", v.night}, {"rule", v.rule},
                         {"detail", v.detail}});
      }
    }
  }

  SimStats st = run_batch(p, a.runs, a.seed, a.workers, a.cap);
  ordered_json out{{"family", family_name(p.family)},
                   {"n", p.n},
                   {"gen", family_takes_gen(p.family) ? render_gen(p) : ""},
                   {"runs", st.runs},
                   {"capped", st.capped},
                   {"mean", st.mean()},
                   {"stderr", st.stderror()},
                   {"ci95", st.ci95()},
                   {"total_visits", st.total_visits},
                   {"seed", a.seed}};
  if (a.verify > 0) {
    out["verified_samples"] = a.verify;
    out["violations"] = vio;
  }
  std::cout << out.dump(2) << "\n";
  if (bad_transcripts > 0) return kExitSafety;
  if (st.capped > 0) return kExitResource;
  return kExitOk;
}

int cmd_exact(const Args& a) {
  StrategyParams p =
      build_params(a.family, a.n, a.variant, a.gen, a.extra_tokens, a.p_release);
  markov::Model model(p, static_cast<std::size_t>(a.max_states));
  const long double e = model.solve();
  ordered_json out{{"family", family_name(p.family)},
                   {"n", p.n},
                   {"expected", static_cast<double>(e)},
                   {"states", model.state_count()}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_snowball(const Args& a) {
  analysis::SnowballLength r = a.mode == "binary" ? analysis::snowball_length_binary(a.n)
                                                  : analysis::snowball_length_single(a.n);
  ordered_json out{{"mode", a.mode}, {"n", a.n}, {"ell", r.ell}, {"boundary", r.boundary}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_bounds(const Args& a) {
  std::string out = "kind,n,t,value\n";
  if (a.two_level) {
    i64 lo = 1, hi = 0;
    const auto dots = a.t_range.find("..");
    if (a.t_range.empty()) {
      hi = a.n - 1;
    } else if (dots == std::string::npos) {
      lo = hi = std::stoll(a.t_range);
    } else {
      lo = std::stoll(a.t_range.substr(0, dots));
      hi = std::stoll(a.t_range.substr(dots + 2));
    }
    for (i64 t = lo; t <= hi; ++t)
      out += "two_level," + std::to_string(a.n) + "," + std::to_string(t) + "," +
             fixed6(analysis::lower_bound_two_level(a.n, static_cast<int>(t))) + "\n";
  }
  if (a.binary)
    out += "binary," + std::to_string(a.n) + ",," + fixed6(analysis::lower_bound_binary(a.n)) +
           "\n";
  if (a.baseline)
    out += "baseline," + std::to_string(a.n) + ",," + fixed6(analysis::baseline_b(a.n)) + "\n";
  std::cout << out;
  return kExitOk;
}

int cmd_tune(const Args& a) {
  Population pop;
  if (!a.load.empty()) {
    std::ifstream in(a.load);
    if (!in) throw GenError("cannot read population file: " + a.load);
    nlohmann::json j;
    in >> j;
    pop = population_from_json(j);
  }
  if (!a.gen.empty()) {
    const Family f = family_from(a.family);
    StrategyParams seed_gen = parse_gen(a.gen, f, a.n, a.extra_tokens);
    validate_params(seed_gen);
    pop.find_or_insert(seed_gen);
  }
  if (pop.records.empty()) throw GenError("tune needs --gen or --load");

  TuneOptions opt;
  opt.budget = a.budget;
  opt.batch = a.batch;
  opt.mutation_prob = a.mutation_prob;
  opt.seed = a.seed;
  opt.workers = a.workers;
  opt.cap = a.cap;
  opt.snapshots = a.snapshots;
  TuneReport rep = tune(pop, opt);

  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    out << "snapshot,population_avg,lastgen_avg,best_gen\n";
    for (const auto& row : rep.rows)
      out << row.snapshot << "," << fixed6(row.population_avg) << ","
          << fixed6(row.lastgen_avg) << "," << csv_quote(row.best_gen) << "\n";
  }
  if (!a.save.empty()) {
    std::ofstream out(a.save);
    out << population_to_json(pop).dump(2) << "\n";
  }

  const GenRecord& best = pop.records[pop.best_index()];
  ordered_json out{{"consumed", rep.consumed},
                   {"records", pop.records.size()},
                   {"best_gen", render_gen(best.params)},
                   {"best_avg", best.average()},
                   {"best_sims", best.sims},
                   {"snapshots", rep.rows.size()}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

// rows: "n;family;gen" simulated at --runs, reported as mean - b(n)
int cmd_report(const Args& a) {
  std::string out = "n,family,mean,ci95,mean_minus_b,runs\n";
  for (const auto& spec : a.sims) {
    const auto p1 = spec.find(';');
    const auto p2 = spec.find(';', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos)
      throw GenError("--sim wants \"n;family;gen\" (gen may be empty)");
    const int n = std::stoi(spec.substr(0, p1));
    const std::string family = spec.substr(p1 + 1, p2 - p1 - 1);
    const std::string gen = spec.substr(p2 + 1);
    StrategyParams p = build_params(family, n, a.variant, gen, a.extra_tokens, a.p_release);
    SimStats st = run_batch(p, a.runs, a.seed, a.workers, a.cap);
    out += std::to_string(n) + "," + family + "," + fixed6(st.mean()) + "," +
           fixed6(st.ci95()) + "," + fixed6(st.mean() - analysis::baseline_b(n)) + "," +
           std::to_string(st.runs) + "\n";
  }
  std::cout << out;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"n-prisoners switch-room strategy toolkit"};
  app.require_subcommand(1);
  Args a;

  auto add_family_flags = [&](CLI::App* c, bool need_family) {
    c->add_option("--n", a.n, "number of prisoners")->required();
    auto* fam = c->add_option("--family", a.family, "strategy family");
    if (need_family) fam->required();
    c->add_option("--variant", a.variant, "a2|b2|c2 (default fits the family)");
    c->add_option("--gen", a.gen, "gen string, e.g. \"((3,0,5),inf)\"");
    c->add_option("--extra-tokens", a.extra_tokens, "extra token blocks (binary gens)");
    c->add_option("--p-release", a.p_release, "release probability (nc2-waiting)");
  };

  auto* sim = app.add_subcommand("simulate", "Monte Carlo batch; prints SimStats as JSON");
  add_family_flags(sim, true);
  sim->add_option("--runs", a.runs, "number of runs")->required();
  sim->add_option("--seed", a.seed, "master seed");
  sim->add_option("--workers", a.workers, "worker threads (0 = PRISONERS_WORKERS or cores)");
  sim->add_option("--cap", a.cap, "per-run day cap");
  sim->add_option("--verify", a.verify, "record and verify this many sample transcripts");

  auto* exa = app.add_subcommand("exact", "exact expected visits via the absorbing chain");
  add_family_flags(exa, true);
  exa->add_option("--max-states", a.max_states, "state-space bound");

  auto* snow = app.add_subcommand("snowball", "snowball phase length from the growth model");
  snow->add_option("--n", a.n, "number of prisoners")->required();
  snow->add_option("--mode", a.mode, "single|binary")->check(CLI::IsMember({"single", "binary"}));

  auto* bnd = app.add_subcommand("bounds", "lower-bound and baseline tables as CSV");
  bnd->add_option("--n", a.n, "number of prisoners")->required();
  bnd->add_flag("--two-level", a.two_level, "two-level count bound over t");
  bnd->add_option("--t", a.t_range, "t or t range lo..hi (with --two-level)");
  bnd->add_flag("--binary", a.binary, "binary token-passing bound");
  bnd->add_flag("--baseline", a.baseline, "b(n) = (pi/2) n ln^2 n");

  auto* tun = app.add_subcommand("tune", "evolutionary gen search");
  add_family_flags(tun, false);
  tun->add_option("--budget", a.budget, "total simulations")->required();
  tun->add_option("--batch", a.batch, "simulations per selected gen");
  tun->add_option("--mutation-prob", a.mutation_prob, "per-batch mutation probability");
  tun->add_option("--seed", a.seed, "master seed");
  tun->add_option("--workers", a.workers, "worker threads");
  tun->add_option("--snapshots", a.snapshots, "snapshot count over the budget");
  tun->add_option("--load", a.load, "population JSON to resume");
  tun->add_option("--save", a.save, "write population JSON here");
  tun->add_option("--csv", a.csv, "write snapshot series CSV here");

  auto* rep = app.add_subcommand("report", "figure-style series: mean - b(n) per row");
  rep->add_option("--sim", a.sims, "row spec \"n;family;gen\" (repeatable)")->required();
  rep->add_option("--runs", a.runs, "runs per row")->required();
  rep->add_option("--seed", a.seed, "master seed");
  rep->add_option("--workers", a.workers, "worker threads");
  rep->add_option("--cap", a.cap, "per-run day cap");
  rep->add_option("--variant", a.variant, "a2|b2|c2 override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(a);
    if (exa->parsed()) return cmd_exact(a);
    if (snow->parsed()) return cmd_snowball(a);
    if (bnd->parsed()) return cmd_bounds(a);
    if (tun->parsed()) return cmd_tune(a);
    if (rep->parsed()) return cmd_report(a);
  } catch (const GenError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << " (rule " << e.rule << ", night " << e.night_index
              << ")\n";
    return kExitSafety;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
