#pragma once

// Generalized binary search over the version space: pick the comparison whose
// hyperplane passes closest to the center, ask, cut, repeat.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vsrank/balltree.hpp"
#include "vsrank/choquet.hpp"
#include "vsrank/oracles.hpp"
#include "vsrank/versionspace.hpp"

namespace vsrank {

enum class Selection { bnb, random };

inline std::string_view to_string(Selection s) { return s == Selection::bnb ? "bnb" : "random"; }

inline std::optional<Selection> parse_selection(std::string_view s) {
  if (s == "bnb") return Selection::bnb;
  if (s == "random") return Selection::random;
  return std::nullopt;
}

inline std::optional<CenterKind> parse_center_kind(std::string_view s) {
  if (s == "chebyshev") return CenterKind::chebyshev;
  if (s == "minkowski") return CenterKind::minkowski;
  return std::nullopt;
}

inline std::optional<BoundMode> parse_bound_mode(std::string_view s) {
  if (s == "paper") return BoundMode::paper;
  if (s == "exact") return BoundMode::exact;
  return std::nullopt;
}

struct SessionConfig {
  int k = 2;
  CenterKind center_kind = CenterKind::chebyshev;
  Selection selection = Selection::bnb;
  BoundMode bound_mode = BoundMode::paper;
  int max_iterations = 100;
  bool stop_on_indifference = true;
  bool exact_cut_verification = false;
  std::uint64_t seed = 0;
  double search_ratio = 0.5;  // SearchPair target = ratio * r_max
  std::size_t leaf_capacity = 8;
  double margin = 0.0;

  void validate(int d) const {
    if (k < 1) throw Error("k must be >= 1");
    if (k > d) throw Error("k = " + std::to_string(k) + " exceeds the number of features " + std::to_string(d));
    if (max_iterations < 1) throw Error("max_iterations must be >= 1");
    if (!(search_ratio >= 0.0)) throw Error("search_ratio must be >= 0");
    if (leaf_capacity < 1) throw Error("leaf_capacity must be >= 1");
    if (!(margin >= 0.0)) throw Error("margin must be >= 0");
  }
};

/// Candidate rules in learner space: normalized features and their
/// augmented images.
struct LearningProblem {
  SubsetIndex index;
  std::vector<Vec> features;
  std::vector<Vec> psi;

  std::size_t size() const { return psi.size(); }
};

inline LearningProblem make_problem(std::vector<Vec> features, int k) {
  if (features.size() < 2) throw Error("learning needs at least 2 rules");
  const int d = static_cast<int>(features.front().size());
  LearningProblem p{SubsetIndex(d, k), std::move(features), {}};
  p.psi.reserve(p.features.size());
  for (const auto& f : p.features) {
    if (static_cast<int>(f.size()) != d) throw Error("feature rows have inconsistent width");
    p.psi.push_back(augment(f, p.index));
  }
  return p;
}

struct IterationRecord {
  int iteration = 0;
  std::size_t i = 0, j = 0;
  int answer = 0;
  double r_max = 0.0;
  Vec center;
  double duration_ms = 0.0;
  std::string outcome;  // how the query was chosen
};

/// BnB selection: search with target ratio * r_max, accept when the pair's
/// hyperplane lies within r_max of the center. Asked pairs are masked out;
/// pairs rejected by the optional cut check are masked and the search re-run.
inline std::optional<PairResult> select_query(const ConstraintSystem& vs, const CenterEstimate& center,
                                              const BallTree& tree, const PairSet& asked, const SessionConfig& cfg,
                                              std::string* outcome = nullptr) {
  const double r_max = center.radius;
  PairSet mask = asked;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    auto found = search_pair(tree, center.point, cfg.search_ratio * r_max, cfg.bound_mode, &mask);
    if (!found) {
      if (outcome) *outcome = "exhausted";
      return std::nullopt;
    }
    const double d = pair_distance(center.point, tree.point(found->i), tree.point(found->j));
    if (d > r_max) {
      if (outcome) *outcome = "beyond_radius";
      return std::nullopt;
    }
    if (cfg.exact_cut_verification) {
      const Vec q = subtract(tree.point(found->i), tree.point(found->j));
      if (!cut_check(vs, q).intersects()) {
        mask.insert({found->i, found->j});
        continue;
      }
    }
    if (outcome) *outcome = attempt == 0 ? "bnb" : "bnb_retry";
    return found;
  }
  if (outcome) *outcome = "retries_exhausted";
  return std::nullopt;
}

/// Uniform unordered pair of [0, n) outside `asked`.
inline std::optional<std::pair<std::size_t, std::size_t>> random_select(std::size_t n, const PairSet& asked,
                                                                        std::mt19937_64& rng) {
  if (n < 2) throw Error("random_select needs at least 2 rules");
  const std::size_t total = n * (n - 1) / 2;
  if (asked.size() >= total) return std::nullopt;
  if (asked.size() * 2 < total) {
    std::uniform_int_distribution<std::size_t> U(0, n - 1);
    while (true) {
      const std::size_t a = U(rng), b = U(rng);
      if (a == b) continue;
      const auto p = ordered(a, b);
      if (!asked.count(p)) return p;
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> open;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (!asked.count({a, b})) open.emplace_back(a, b);
  if (open.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> U(0, open.size() - 1);
  return open[U(rng)];
}

class StaleAnswer : public Error {
 public:
  using Error::Error;
};

enum class SessionState { selecting, awaiting_answer, finished, failed };

inline std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::selecting: return "selecting";
    case SessionState::awaiting_answer: return "awaiting_answer";
    case SessionState::finished: return "finished";
    case SessionState::failed: return "failed";
  }
  return "?";
}

struct PendingQuery {
  int iteration = 0;
  std::size_t i = 0, j = 0;
};

/// One GBS run as an explicit state machine: select() leaves it awaiting an
/// answer (or finished), answer() applies the cut and selects again.
class Session {
 public:
  Session(std::shared_ptr<const LearningProblem> problem, SessionConfig cfg)
      : problem_(std::move(problem)), cfg_(cfg), rng_(cfg.seed) {
    if (!problem_) throw Error("session without a problem");
    cfg_.validate(problem_->index.criteria());
    if (cfg_.k != problem_->index.order()) throw Error("session k does not match the problem");
    if (problem_->size() < 2) throw Error("learning needs at least 2 rules");
    vs_ = init_version_space(problem_->index);
    if (cfg_.selection == Selection::bnb)
      tree_ = std::make_unique<BallTree>(problem_->psi, cfg_.leaf_capacity, cfg_.seed);
    select();
  }

  SessionState state() const { return state_; }
  const std::optional<PendingQuery>& pending() const { return pending_; }
  const std::vector<IterationRecord>& records() const { return records_; }
  const ConstraintSystem& version_space() const { return vs_; }
  const CenterEstimate& center() const { return center_; }
  const SessionConfig& config() const { return cfg_; }
  const LearningProblem& problem() const { return *problem_; }
  const std::string& status() const { return status_; }
  int ties() const { return ties_; }
  int answered() const { return static_cast<int>(records_.size()); }

  /// Center renormalized so the coefficients sum to one.
  MobiusCapacity capacity() const {
    MobiusCapacity m{problem_->index, center_.point};
    double s = 0.0;
    for (double v : m.coeffs) s += v;
    if (s != 0.0)
      for (double& v : m.coeffs) v /= s;
    return m;
  }

  void answer(int iteration, int preference) {
    if (state_ != SessionState::awaiting_answer || !pending_) throw StaleAnswer("no query is pending");
    if (iteration != pending_->iteration)
      throw StaleAnswer("answer for iteration " + std::to_string(iteration) + " but pending is " +
                        std::to_string(pending_->iteration));
    if (preference < -1 || preference > 1) throw Error("preference must be -1, 0 or 1");
    const auto t0 = std::chrono::steady_clock::now();
    const PendingQuery q = *pending_;
    pending_.reset();
    state_ = SessionState::selecting;
    asked_.insert(ordered(q.i, q.j));

    IterationRecord rec;
    rec.iteration = q.iteration;
    rec.i = q.i;
    rec.j = q.j;
    rec.answer = preference;
    rec.r_max = center_.radius;
    rec.center = center_.point;
    rec.outcome = pending_outcome_;
    rec.duration_ms = pending_ms_;

    if (preference == 0) {
      ++ties_;
    } else {
      vs_ = add_preference(vs_,
                           preference_constraint(problem_->psi[q.i], problem_->psi[q.j], preference, q.iteration,
                                                 cfg_.margin),
                           q.iteration);
    }
    rec.duration_ms += ms_since(t0);
    records_.push_back(std::move(rec));

    if (preference == 0 && cfg_.stop_on_indifference) return finish("stopped on indifferent answer");
    if (answered() >= cfg_.max_iterations) {
      if (refresh_center()) finish("iteration budget reached");
      return;
    }
    select();
  }

 private:
  static double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }

  void finish(std::string why) {
    state_ = SessionState::finished;
    status_ = std::move(why);
  }

  // false (and failed) when the version space has become empty
  bool refresh_center() {
    try {
      const double before = center_.radius;
      const bool had_center = !center_.point.empty();
      center_ = compute_center(vs_, cfg_.center_kind);
      // nested polytopes: LP round-off must not grow the Chebyshev radius
      if (had_center && cfg_.center_kind == CenterKind::chebyshev) center_.radius = std::min(center_.radius, before);
      return true;
    } catch (const InfeasibleVersionSpace& e) {
      state_ = SessionState::failed;
      status_ = e.what();
      return false;
    }
  }

  void select() {
    const auto t0 = std::chrono::steady_clock::now();
    state_ = SessionState::selecting;
    if (!refresh_center()) return;
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    if (cfg_.selection == Selection::bnb) {
      if (auto r = select_query(vs_, center_, *tree_, asked_, cfg_, &pending_outcome_)) pick = {r->i, r->j};
    } else {
      pending_outcome_ = "random";
      while (auto r = random_select(problem_->size(), asked_, rng_)) {
        if (problem_->psi[r->first] != problem_->psi[r->second]) {
          pick = r;
          break;
        }
        asked_.insert(*r);
      }
    }
    pending_ms_ = ms_since(t0);
    if (!pick) return finish("version space resolved at available granularity");
    pending_ = PendingQuery{answered() + 1, pick->first, pick->second};
    state_ = SessionState::awaiting_answer;
  }

  std::shared_ptr<const LearningProblem> problem_;
  SessionConfig cfg_;
  std::mt19937_64 rng_;
  ConstraintSystem vs_;
  std::unique_ptr<BallTree> tree_;
  CenterEstimate center_;
  PairSet asked_;
  std::optional<PendingQuery> pending_;
  std::string pending_outcome_;
  double pending_ms_ = 0.0;
  std::vector<IterationRecord> records_;
  SessionState state_ = SessionState::selecting;
  std::string status_;
  int ties_ = 0;
};

using Answerer = std::function<int(std::size_t, std::size_t)>;

struct GbsResult {
  MobiusCapacity capacity;
  std::vector<IterationRecord> records;
  SessionState state = SessionState::finished;
  std::string status;
  int ties = 0;
};

/// Runs a session to completion against a synchronous answer source.
inline GbsResult run_gbs(std::shared_ptr<const LearningProblem> problem, const Answerer& ask,
                         const SessionConfig& cfg) {
  Session s(std::move(problem), cfg);
  while (s.state() == SessionState::awaiting_answer) {
    const PendingQuery q = *s.pending();
    s.answer(q.iteration, ask(q.i, q.j));
  }
  return {s.capacity(), s.records(), s.state(), s.status(), s.ties()};
}

/// Answer source backed by a simulated oracle over the candidate rules.
inline Answerer oracle_answerer(const Oracle& oracle, const std::vector<Rule>& rules,
                                const std::vector<Vec>& features) {
  if (rules.size() != features.size()) throw Error("oracle_answerer: rules and features differ in length");
  auto scores = std::make_shared<std::vector<double>>();
  for (std::size_t r = 0; r < rules.size(); ++r) scores->push_back(oracle.score(rules[r], features[r]));
  return [scores](std::size_t i, std::size_t j) { return compare_scores((*scores)[i], (*scores)[j]); };
}

/// Indices sorted by descending Choquet score; ties by index.
inline std::vector<std::size_t> rank_by_capacity(const MobiusCapacity& m, const std::vector<Vec>& psi) {
  std::vector<double> s;
  s.reserve(psi.size());
  for (const auto& p : psi) s.push_back(dot(m.coeffs, p));
  std::vector<std::size_t> order(psi.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  return order;
}

}  // namespace vsrank
