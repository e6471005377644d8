// vsrank: mine rules, learn a ranking from pairwise answers, evaluate, serve.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <glob.h>

#include "vsrank/evalkit.hpp"
#include "vsrank/io.hpp"
#include "vsrank/pipeline.hpp"
#include "vsrank/service.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace vsrank;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

// Bad arguments, unreadable inputs, unwritable outputs.
class UsageError : public Error {
 public:
  using Error::Error;
};

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path);
}

RuleTable load_rules(const std::string& path) {
  require_file(path, "rules CSV");
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read rules CSV: " + path);
  return read_rules_csv(in);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

std::vector<std::size_t> parse_cutoffs(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& tok : detail::split(s, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("invalid cutoff '" + tok + "'");
    }
  }
  if (out.empty()) throw UsageError("no cutoffs given");
  return out;
}

Oracle build_oracle(const std::string& text, const std::string& input) {
  const auto spec = parse_oracle_spec(text);
  if (!spec) throw UsageError("unknown oracle '" + text + "' (phi, surprise, choquet:<capacity.json>)");
  switch (spec->kind) {
    case OracleKind::phi: return Oracle::phi();
    case OracleKind::surprise:
      if (input.empty()) throw UsageError("the surprise oracle needs --input (transaction file)");
      require_file(input, "transaction file");
      return Oracle::surprise(load_transactions_file(input));
    case OracleKind::hidden_choquet:
      require_file(spec->capacity_path, "capacity JSON");
      return Oracle::hidden_choquet(load_capacity_file(spec->capacity_path));
    case OracleKind::human: break;
  }
  throw UsageError("unsupported oracle");
}

std::string artifact_stem(std::uint64_t seed, int fold) {
  return "seed" + std::to_string(seed) + "_fold" + std::to_string(fold);
}

// ---------------------------------------------------------------------------

struct MineArgs {
  std::string input, out;
  std::size_t min_support = 10;
  double min_confidence = 0.99;
  std::size_t max_rules = 100000;
  std::size_t max_length = 0;
  std::vector<std::string> measures;
};

int cmd_mine(const MineArgs& a) {
  require_file(a.input, "transaction file");
  const auto db = load_transactions_file(a.input);
  std::vector<MeasureKind> kinds;
  if (a.measures.empty()) kinds = default_features();
  for (const auto& m : a.measures) {
    auto k = parse_measure(m);
    if (!k) throw UsageError("unknown measure '" + m + "'");
    kinds.push_back(*k);
  }
  const auto rules = mine_rules(db, {a.min_support, a.min_confidence, a.max_rules, a.max_length});
  const auto table = make_rule_table(rules, kinds);
  if (a.out.empty() || a.out == "-") {
    write_rules_csv(std::cout, table);
  } else {
    auto out = open_out(a.out);
    write_rules_csv(out, table);
  }
  std::cerr << "mined " << rules.size() << " rules from " << db.size() << " transactions\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct LearnArgs {
  std::string rules, oracle = "phi", input, out_dir = ".";
  std::string center = "chebyshev", selection = "bnb", bound_mode = "paper";
  int k = 2, iterations = 100, folds = 1;
  std::uint64_t seed = 0;
  bool exact_cut_verification = false, keep_going_on_ties = false;
  double search_ratio = 0.5;
  std::size_t leaf_capacity = 8;
};

int cmd_learn(const LearnArgs& a) {
  SessionConfig cfg;
  cfg.k = a.k;
  cfg.max_iterations = a.iterations;
  cfg.seed = a.seed;
  cfg.exact_cut_verification = a.exact_cut_verification;
  cfg.stop_on_indifference = !a.keep_going_on_ties;
  cfg.search_ratio = a.search_ratio;
  cfg.leaf_capacity = a.leaf_capacity;
  if (auto c = parse_center_kind(a.center)) cfg.center_kind = *c; else throw UsageError("unknown center " + a.center);
  if (auto s = parse_selection(a.selection)) cfg.selection = *s; else throw UsageError("unknown selection " + a.selection);
  if (auto m = parse_bound_mode(a.bound_mode)) cfg.bound_mode = *m; else throw UsageError("unknown bound mode " + a.bound_mode);
  if (a.folds < 1) throw UsageError("--folds must be >= 1");

  const RuleTable table = load_rules(a.rules);
  const Oracle oracle = build_oracle(a.oracle, a.input);
  if (table.rules.size() < 2) throw UsageError("need at least 2 rules");
  const FeatureTable ft = normalize_features(table.values, table.measure_names);
  try {
    cfg.validate(static_cast<int>(ft.dim()));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto scores = oracle_scores(oracle, table, ft);

  ojson manifest;
  manifest["rules"] = a.rules;
  manifest["rule_count"] = table.rules.size();
  manifest["distinct_feature_rows"] = ft.rows();
  manifest["measures"] = ft.names;
  manifest["oracle"] = a.oracle;
  manifest["folds"] = a.folds;
  manifest["config"] = session_config_to_json(cfg);
  ojson fold_summaries = ojson::array();

  bool any_failed = false;
  for (int f = 0; f < a.folds; ++f) {
    const FoldSplit split = fold_split(ft.rows(), a.folds, f, a.seed);
    if (split.train.size() < 2) throw UsageError("fold " + std::to_string(f) + " has fewer than 2 training rules");
    auto problem = std::make_shared<const LearningProblem>(make_problem(select_rows(ft.normalized, split.train), cfg.k));
    Answerer ask = [&](std::size_t i, std::size_t j) {
      return compare_scores(scores[split.train[i]], scores[split.train[j]]);
    };
    GbsResult res = run_gbs(problem, ask, cfg);
    // local training positions -> rule ids of the CSV
    for (auto& r : res.records) {
      r.i = ft.kept[split.train[r.i]];
      r.j = ft.kept[split.train[r.j]];
    }
    const std::string stem = artifact_stem(a.seed, f);
    {
      auto out = open_out(fs::path(a.out_dir) / ("session_" + stem + ".jsonl"));
      write_log(out, res.records, {a.seed, f, a.folds});
    }
    {
      auto out = open_out(fs::path(a.out_dir) / ("capacity_" + stem + ".json"));
      out << capacity_to_json(res.capacity).dump(2) << '\n';
    }

    const std::vector<Vec> test_psi = [&] {
      std::vector<Vec> v;
      for (std::size_t r : split.test) v.push_back(augment(ft.normalized[r], problem->index));
      return v;
    }();
    const auto learned = rank_by_capacity(res.capacity, test_psi);
    const auto truth = order_by_scores(scores, split.test);
    ojson fs_;
    fs_["fold"] = f;
    fs_["answered"] = res.records.size();
    fs_["ties"] = res.ties;
    fs_["state"] = to_string(res.state);
    fs_["status"] = res.status;
    std::cout << "fold " << f << ": " << res.records.size() << " answers, " << res.status;
    for (std::size_t k : {5, 10, 15})
      if (k <= learned.size()) {
        const double p = precision_at_k(learned, truth, k);
        fs_["precision@" + std::to_string(k)] = p;
        std::cout << ", precision@" << k << " " << format_double(p);
      }
    std::cout << '\n';
    fold_summaries.push_back(std::move(fs_));
    if (res.state == SessionState::failed) {
      any_failed = true;
      std::cerr << "fold " << f << " failed: " << res.status << '\n';
    }
  }
  manifest["results"] = std::move(fold_summaries);
  auto out = open_out(fs::path(a.out_dir) / ("manifest_seed" + std::to_string(a.seed) + ".json"));
  out << manifest.dump(2) << '\n';
  return any_failed ? kRuntime : kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string logs, rules, oracle, input, out, cutoffs = "5,10,15";
  std::size_t jaccard_k = 15;
};

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_eval(const EvalArgs& a) {
  const auto files = expand_glob(a.logs);
  if (files.empty()) throw UsageError("no session logs match " + a.logs);
  ReportOptions opt;
  opt.cutoffs = parse_cutoffs(a.cutoffs);
  const RuleTable table = load_rules(a.rules);
  const FeatureTable ft = normalize_features(table.values, table.measure_names);
  std::map<std::size_t, std::size_t> local_of;
  for (std::size_t r = 0; r < ft.rows(); ++r) local_of[ft.kept[r]] = r;
  std::optional<Oracle> oracle;
  if (!a.oracle.empty()) oracle = build_oracle(a.oracle, a.input);
  const std::vector<double> scores = oracle ? oracle_scores(*oracle, table, ft) : std::vector<double>{};
  std::optional<TransactionDatabase> db;
  if (!a.input.empty()) {
    require_file(a.input, "transaction file");
    db = load_transactions_file(a.input);
  }

  std::vector<SessionLog> logs;
  std::vector<std::optional<EvalTarget>> targets;
  std::vector<std::vector<Vec>> rows;
  std::vector<std::vector<MetricRow>> extra;
  for (const auto& file : files) {
    const auto recs = read_log_file(file);
    if (recs.empty()) {
      std::cerr << "skipping empty log " << file << '\n';
      continue;
    }
    const LogContext ctx = recs.front().context;
    SessionLog log{std::to_string(ctx.seed), std::to_string(ctx.fold), {}};
    for (const auto& r : recs) log.records.push_back(r.record);
    const auto k = order_for_dimension(static_cast<int>(ft.dim()), log.records.front().center.size());
    if (!k) throw UsageError(file + ": center dimension does not fit the rule measures");
    const SubsetIndex index(static_cast<int>(ft.dim()), *k);
    auto psi_of = [&](std::size_t rule_id) {
      auto it = local_of.find(rule_id);
      if (it == local_of.end()) throw UsageError(file + ": rule id " + std::to_string(rule_id) + " not in the rules CSV");
      return augment(ft.normalized[it->second], index);
    };

    std::vector<Vec> hs;
    for (const auto& r : log.records) {
      Vec h = subtract(psi_of(r.i), psi_of(r.j));
      for (double& v : h) v *= r.answer;
      hs.push_back(std::move(h));
    }
    rows.push_back(std::move(hs));

    const FoldSplit split = fold_split(ft.rows(), ctx.folds, ctx.fold, ctx.seed);
    std::vector<Vec> test_psi;
    for (std::size_t r : split.test) test_psi.push_back(augment(ft.normalized[r], index));
    if (oracle) {
      targets.push_back(EvalTarget{test_psi, order_by_scores(scores, split.test)});
    } else {
      targets.push_back(std::nullopt);
    }

    std::vector<MetricRow> jac;
    if (db && a.jaccard_k >= 2) {
      const auto& last = log.records.back();
      const auto learned_pos = rank_by_capacity(MobiusCapacity{index, last.center}, test_psi);
      if (a.jaccard_k <= learned_pos.size()) {
        std::vector<std::size_t> learned_ids;
        for (std::size_t p : learned_pos) learned_ids.push_back(ft.kept[split.test[p]]);
        const auto pairs = jaccard_topk_diversity(*db, table.rules, learned_ids, a.jaccard_k);
        std::vector<double> vals;
        std::size_t zero = 0;
        for (const auto& p : pairs) {
          vals.push_back(p.value);
          zero += p.zero_cover;
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        jac.push_back({last.iteration, "jaccard_mean", a.jaccard_k, mean, log.seed, log.fold});
        jac.push_back({last.iteration, "jaccard_median", a.jaccard_k, median(vals), log.seed, log.fold});
        jac.push_back({last.iteration, "jaccard_zero_cover_pairs", a.jaccard_k, static_cast<double>(zero), log.seed,
                       log.fold});
      }
    }
    extra.push_back(std::move(jac));
    logs.push_back(std::move(log));
  }
  if (logs.empty()) throw UsageError("all matched logs are empty");

  auto report = convergence_report(logs, targets, rows, opt);
  for (auto& e : extra) report.insert(report.end(), e.begin(), e.end());
  if (a.out.empty() || a.out == "-") {
    write_metrics_csv(std::cout, report);
  } else {
    auto out = open_out(a.out);
    write_metrics_csv(out, report);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string rules, host = "127.0.0.1", static_dir, state_dir;
  int port = 8080;
};

Service* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const ServeArgs& a) {
  ServiceOptions opt;
  if (!a.static_dir.empty()) {
    if (!fs::is_directory(a.static_dir)) throw UsageError("static directory not found: " + a.static_dir);
    opt.static_dir = a.static_dir;
  }
  if (!a.state_dir.empty()) opt.state_dir = a.state_dir;
  Service svc(opt);
  svc.add_ruleset("default", load_rules(a.rules));
  svc.restore();
  if (!svc.bind(a.host, a.port)) throw UsageError("cannot bind " + a.host + ":" + std::to_string(a.port));
  g_service = &svc;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << a.host << ':' << a.port << std::endl;
  svc.listen();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vsrank: interactive association-rule ranking with Choquet capacities"};
  app.require_subcommand(1);

  MineArgs mine;
  auto* m = app.add_subcommand("mine", "mine rules and write the rule-feature CSV");
  m->add_option("--input", mine.input, "transaction file (one transaction of item ids per line)")->required();
  m->add_option("--min-support", mine.min_support, "minimum absolute support")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--min-confidence", mine.min_confidence, "minimum confidence")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  m->add_option("--max-rules", mine.max_rules, "keep at most this many rules")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--max-length", mine.max_length, "itemset length cap, 0 for none")->capture_default_str();
  m->add_option("--measures", mine.measures, "measures to compute (default: yules_q cosine gk_tau added_value certainty_factor)");
  m->add_option("--out", mine.out, "output CSV (default stdout)");

  LearnArgs learn;
  auto* l = app.add_subcommand("learn", "learn a capacity from simulated pairwise answers");
  l->add_option("--rules", learn.rules, "rule-feature CSV")->required();
  l->add_option("--oracle", learn.oracle, "phi | surprise | choquet:<capacity.json>")->capture_default_str();
  l->add_option("--input", learn.input, "transaction file (surprise oracle)");
  l->add_option("--k", learn.k, "additivity")->capture_default_str();
  l->add_option("--center", learn.center, "chebyshev | minkowski")->capture_default_str();
  l->add_option("--selection", learn.selection, "bnb | random")->capture_default_str();
  l->add_option("--bound-mode", learn.bound_mode, "paper | exact")->capture_default_str();
  l->add_option("--iterations", learn.iterations, "maximum number of answered queries")->capture_default_str();
  l->add_option("--seed", learn.seed, "random seed")->capture_default_str();
  l->add_option("--folds", learn.folds, "cross-validation folds (1 = train and evaluate on all rules)")->capture_default_str();
  l->add_option("--out-dir", learn.out_dir, "directory for logs and capacities")->capture_default_str();
  l->add_option("--search-ratio", learn.search_ratio, "search target as a fraction of r_max")->capture_default_str();
  l->add_option("--leaf-capacity", learn.leaf_capacity, "ball-tree leaf size")->capture_default_str();
  l->add_flag("--exact-cut-verification", learn.exact_cut_verification, "confirm each query cuts the version space");
  l->add_flag("--keep-going-on-ties", learn.keep_going_on_ties, "do not stop at the first indifferent answer");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "per-iteration metrics from session logs");
  e->add_option("--logs", eval.logs, "glob of session logs")->required();
  e->add_option("--rules", eval.rules, "rule-feature CSV used for learning")->required();
  e->add_option("--oracle", eval.oracle, "oracle for the reference ranking (omit to skip precision)");
  e->add_option("--input", eval.input, "transaction file (surprise oracle, Jaccard diversity)");
  e->add_option("--cutoffs", eval.cutoffs, "comma-separated precision cutoffs")->capture_default_str();
  e->add_option("--jaccard-k", eval.jaccard_k, "top-k size for cover diversity")->capture_default_str();
  e->add_option("--out", eval.out, "metrics CSV (default stdout)");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "run the HTTP session service");
  s->add_option("--rules", serve.rules, "rule-feature CSV")->required();
  s->add_option("--port", serve.port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));
  s->add_option("--host", serve.host, "bind address")->capture_default_str();
  s->add_option("--static", serve.static_dir, "directory served at /");
  s->add_option("--state-dir", serve.state_dir, "session event logs, replayed at startup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  try {
    if (*m) return cmd_mine(mine);
    if (*l) return cmd_learn(learn);
    if (*e) return cmd_eval(eval);
    if (*s) return cmd_serve(serve);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const ParseError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
