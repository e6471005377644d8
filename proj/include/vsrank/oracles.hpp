#pragma once

// Preference oracles: simulated scorers and the blocking bridge used when a
// person answers the queries.

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "vsrank/choquet.hpp"
#include "vsrank/corpus.hpp"
#include "vsrank/lp.hpp"
#include "vsrank/measures.hpp"

namespace vsrank {

enum class OracleKind { phi, surprise, hidden_choquet, human };

inline std::string_view to_string(OracleKind k) {
  switch (k) {
    case OracleKind::phi: return "phi";
    case OracleKind::surprise: return "surprise";
    case OracleKind::hidden_choquet: return "hidden_choquet";
    case OracleKind::human: return "human";
  }
  return "?";
}

/// +1 if a > b, -1 if a < b, 0 on an exact tie.
inline int compare_scores(double a, double b) { return a > b ? 1 : (a < b ? -1 : 0); }

class Oracle {
 public:
  static Oracle phi() { return Oracle(OracleKind::phi); }
  static Oracle human() { return Oracle(OracleKind::human); }

  static Oracle surprise(const TransactionDatabase& db) {
    Oracle o(OracleKind::surprise);
    o.item_counts_ = db.item_counts;
    o.n_ = db.size();
    return o;
  }

  static Oracle hidden_choquet(MobiusCapacity m) {
    Oracle o(OracleKind::hidden_choquet);
    o.capacity_ = std::move(m);
    return o;
  }

  OracleKind kind() const { return kind_; }
  const std::optional<MobiusCapacity>& capacity() const { return capacity_; }

  /// Score of one rule; `features` is its normalized feature vector.
  double score(const Rule& r, std::span<const double> features) const {
    switch (kind_) {
      case OracleKind::phi: return compute_measure(r.counts, MeasureKind::phi);
      case OracleKind::surprise: return surprise_score(item_counts_, n_, r);
      case OracleKind::hidden_choquet: return choquet_eval(*capacity_, features);
      case OracleKind::human: break;
    }
    throw Error("human oracle has no score; answers arrive through the bridge");
  }

  int answer(const Rule& ri, std::span<const double> fi, const Rule& rj, std::span<const double> fj) const {
    return compare_scores(score(ri, fi), score(rj, fj));
  }

 private:
  explicit Oracle(OracleKind k) : kind_(k) {}

  OracleKind kind_;
  std::optional<MobiusCapacity> capacity_;
  std::map<Item, std::size_t> item_counts_;
  std::size_t n_ = 0;
};

/// Random interior-ish capacity: Dirichlet(1,...,1) mixture of D vertices of
/// the capacity polytope, each reached by maximizing a Gaussian objective.
inline MobiusCapacity sample_hidden_capacity(const SubsetIndex& index, std::mt19937_64& rng) {
  const ConstraintSystem cs = capacity_constraints(index);
  lp::Problem p;
  p.num_vars = index.size();
  for (const auto& r : cs.equalities) p.add_equality(r.coeffs, r.rhs);
  for (const auto& r : cs.inequalities) p.add_inequality(r.coeffs, r.rhs);
  std::normal_distribution<double> N(0.0, 1.0);
  std::gamma_distribution<double> G(1.0, 1.0);
  MobiusCapacity m{index, Vec(index.size(), 0.0)};
  double total = 0.0;
  for (std::size_t v = 0; v < index.size(); ++v) {
    p.objective.assign(index.size(), 0.0);
    for (double& c : p.objective) c = N(rng);
    const lp::Solution s = lp::solve(p);
    if (s.status != lp::Status::optimal) continue;
    const double weight = G(rng);
    total += weight;
    for (std::size_t j = 0; j < m.coeffs.size(); ++j) m.coeffs[j] += weight * s.x[j];
  }
  if (!(total > 0.0)) throw Error("sample_hidden_capacity: no vertex found");
  for (double& c : m.coeffs) c /= total;
  return m;
}

/// Single-slot handoff between a session waiting for a person and the
/// request handler delivering the answer.
class HumanBridge {
 public:
  enum class Submit { accepted, stale, duplicate, no_pending, invalid };

  void post_query(int iteration, std::size_t i, std::size_t j) {
    std::lock_guard lock(mu_);
    if (pending_ && !answer_) throw Error("human bridge: a query is already pending");
    pending_ = iteration;
    pair_ = {i, j};
    answer_.reset();
  }

  Submit submit(int iteration, int preference) {
    std::lock_guard lock(mu_);
    if (preference < -1 || preference > 1) return Submit::invalid;
    if (answered_.count(iteration)) return Submit::duplicate;
    if (!pending_) return Submit::no_pending;
    if (iteration != *pending_) return Submit::stale;
    answer_ = preference;
    answered_.insert(iteration);
    cv_.notify_all();
    return Submit::accepted;
  }

  int await_answer() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return answer_.has_value(); });
    return take();
  }

  template <class Rep, class Period>
  std::optional<int> await_answer_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return answer_.has_value(); })) return std::nullopt;
    return take();
  }

  std::optional<int> pending_iteration() const {
    std::lock_guard lock(mu_);
    return pending_;
  }
  std::pair<std::size_t, std::size_t> pending_pair() const {
    std::lock_guard lock(mu_);
    return pair_;
  }

 private:
  int take() {
    const int a = *answer_;
    answer_.reset();
    pending_.reset();
    return a;
  }

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<int> pending_;
  std::pair<std::size_t, std::size_t> pair_{0, 0};
  std::optional<int> answer_;
  std::set<int> answered_;
};

}  // namespace vsrank
