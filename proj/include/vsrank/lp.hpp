#pragma once

// Dense two-phase primal simplex over free variables.
//
//   maximize    c'x
//   subject to  A x  = b
//               C x <= d
//
// Free variables are split as x = x+ - x-. Pricing is Dantzig's rule with a
// switch to Bland's rule once a run of degenerate pivots is observed, so the
// result is deterministic for fixed inputs. The final basis is re-solved
// against the original matrix to clean up accumulated pivoting error.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "vsrank/core.hpp"

namespace vsrank::lp {

enum class Status { optimal, infeasible, unbounded, solver_error };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::solver_error: return "solver_error";
  }
  return "?";
}

struct Problem {
  std::size_t num_vars = 0;
  Vec objective;  // maximized
  std::vector<Vec> eq_rows;
  Vec eq_rhs;
  std::vector<Vec> ineq_rows;  // row . x <= rhs
  Vec ineq_rhs;

  void add_equality(Vec row, double rhs) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
  }
  void add_inequality(Vec row, double rhs) {
    ineq_rows.push_back(std::move(row));
    ineq_rhs.push_back(rhs);
  }
};

struct Solution {
  Status status = Status::solver_error;
  Vec x;
  double value = 0.0;
};

struct Options {
  double pivot_tol = 1e-9;
  double cost_tol = 1e-10;
  double feasibility_tol = 1e-8;
  std::size_t max_pivots = 200000;
  std::size_t degenerate_run_before_bland = 40;
};

/// Largest violation of the problem's constraints at x.
inline double max_violation(const Problem& p, std::span<const double> x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.eq_rows.size(); ++i)
    worst = std::max(worst, std::abs(dot(p.eq_rows[i], x) - p.eq_rhs[i]));
  for (std::size_t i = 0; i < p.ineq_rows.size(); ++i)
    worst = std::max(worst, dot(p.ineq_rows[i], x) - p.ineq_rhs[i]);
  return worst;
}

namespace detail {

class Tableau {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tableau(const Problem& p, const Options& opt) : opt_(opt), n_(p.num_vars) {
    const std::size_t m_eq = p.eq_rows.size();
    const std::size_t m_ub = p.ineq_rows.size();
    m_ = m_eq + m_ub;
    slack0_ = 2 * n_;

    // Decide which rows need an artificial basic variable.
    std::vector<bool> flip(m_, false);
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m_eq; ++i) {
      flip[i] = p.eq_rhs[i] < 0.0;
      ++n_art;
    }
    for (std::size_t i = 0; i < m_ub; ++i) {
      flip[m_eq + i] = p.ineq_rhs[i] < 0.0;
      if (flip[m_eq + i]) ++n_art;
    }
    art0_ = slack0_ + m_ub;
    cols_ = art0_ + n_art;
    rhs_ = cols_;

    original_ = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(cols_ + 1));
    basis_.assign(m_, 0);
    std::size_t next_art = art0_;
    for (std::size_t i = 0; i < m_; ++i) {
      const bool is_eq = i < m_eq;
      const Vec& row = is_eq ? p.eq_rows[i] : p.ineq_rows[i - m_eq];
      const double rhs = is_eq ? p.eq_rhs[i] : p.ineq_rhs[i - m_eq];
      if (row.size() != n_) throw Error("lp: constraint row has wrong dimension");
      const double s = flip[i] ? -1.0 : 1.0;
      auto r = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < n_; ++j) {
        original_(r, static_cast<Eigen::Index>(j)) = s * row[j];
        original_(r, static_cast<Eigen::Index>(n_ + j)) = -s * row[j];
      }
      if (!is_eq) original_(r, static_cast<Eigen::Index>(slack0_ + (i - m_eq))) = s;
      original_(r, static_cast<Eigen::Index>(rhs_)) = s * rhs;
      if (is_eq || flip[i]) {
        original_(r, static_cast<Eigen::Index>(next_art)) = 1.0;
        basis_[i] = next_art++;
      } else {
        basis_[i] = slack0_ + (i - m_eq);
      }
    }
    t_ = original_;
    obj_ = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(cols_ + 1));
    active_.assign(m_, true);
    allowed_.assign(cols_, true);
  }

  Solution solve(const Vec& objective) {
    Solution out;
    // Phase 1: maximize -sum(artificials).
    if (cols_ > art0_) {
      obj_.setZero();
      for (std::size_t j = art0_; j < cols_; ++j) obj_(static_cast<Eigen::Index>(j)) = 1.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= art0_) obj_ -= t_.row(static_cast<Eigen::Index>(i));
      const Status s1 = iterate();
      if (s1 == Status::solver_error) {
        out.status = s1;
        return out;
      }
      const double phase1 = obj_(static_cast<Eigen::Index>(rhs_));
      double scale = 1.0;
      for (std::size_t i = 0; i < m_; ++i)
        scale = std::max(scale, std::abs(original_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(rhs_))));
      if (phase1 < -opt_.feasibility_tol * scale) {
        out.status = Status::infeasible;
        return out;
      }
      drive_out_artificials();
      for (std::size_t j = art0_; j < cols_; ++j) allowed_[j] = false;
    }

    // Phase 2.
    obj_.setZero();
    auto cost = [&](std::size_t j) -> double {
      if (j < n_) return objective[j];
      if (j < 2 * n_) return -objective[j - n_];
      return 0.0;
    };
    for (std::size_t j = 0; j < cols_; ++j) obj_(static_cast<Eigen::Index>(j)) = -cost(j);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double cb = cost(basis_[i]);
      if (cb != 0.0) obj_ += cb * t_.row(static_cast<Eigen::Index>(i));
    }
    out.status = iterate();
    if (out.status != Status::optimal) return out;

    out.x = extract(t_);
    out.value = dot(objective, out.x);
    return out;
  }

  // Re-solves B x_B = b on the original rows for the final basis.
  std::optional<Vec> resolve_basis() const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m_; ++i)
      if (active_[i]) rows.push_back(i);
    const auto k = static_cast<Eigen::Index>(rows.size());
    if (k == 0) return std::nullopt;
    Eigen::MatrixXd basis_matrix(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(a)]);
      rhs(a) = original_(r, static_cast<Eigen::Index>(rhs_));
      for (Eigen::Index b = 0; b < k; ++b)
        basis_matrix(a, b) =
            original_(r, static_cast<Eigen::Index>(basis_[rows[static_cast<std::size_t>(b)]]));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_matrix);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd xb = lu.solve(rhs);
    if (!xb.allFinite()) return std::nullopt;
    Vec x(n_, 0.0);
    for (Eigen::Index a = 0; a < k; ++a) {
      const std::size_t b = basis_[rows[static_cast<std::size_t>(a)]];
      if (b < n_)
        x[b] += xb(a);
      else if (b < 2 * n_)
        x[b - n_] -= xb(a);
    }
    return x;
  }

 private:
  // Runs simplex pivots on the current objective row until optimal.
  Status iterate() {
    std::size_t degenerate_run = 0;
    for (std::size_t iter = 0; iter < opt_.max_pivots; ++iter) {
      const bool bland = degenerate_run >= opt_.degenerate_run_before_bland;
      std::size_t enter = cols_;
      double best = -opt_.cost_tol;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allowed_[j]) continue;
        const double rc = obj_(static_cast<Eigen::Index>(j));
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter == cols_) return Status::optimal;

      std::size_t leave = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      const auto e = static_cast<Eigen::Index>(enter);
      for (std::size_t i = 0; i < m_; ++i) {
        if (!active_[i]) continue;
        const auto r = static_cast<Eigen::Index>(i);
        const double a = t_(r, e);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, t_(r, static_cast<Eigen::Index>(rhs_))) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && leave < m_ && basis_[i] < basis_[leave])) {
          if (ratio < best_ratio) best_ratio = ratio;
          leave = i;
        }
      }
      if (leave == m_) return Status::unbounded;
      degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    return Status::solver_error;
  }

  void pivot(std::size_t row, std::size_t col) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto c = static_cast<Eigen::Index>(col);
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    const double f = obj_(c);
    if (f != 0.0) obj_ -= f * t_.row(r);
    basis_[row] = col;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || basis_[i] < art0_) continue;
      const auto r = static_cast<Eigen::Index>(i);
      std::size_t best = cols_;
      double best_abs = opt_.pivot_tol;
      for (std::size_t j = 0; j < art0_; ++j) {
        const double a = std::abs(t_(r, static_cast<Eigen::Index>(j)));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best == cols_)
        active_[i] = false;  // redundant equality
      else
        pivot(i, best);
    }
  }

  Vec extract(const Matrix& t) const {
    Vec x(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const std::size_t b = basis_[i];
      const double v = t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(rhs_));
      if (b < n_)
        x[b] += v;
      else if (b < 2 * n_)
        x[b - n_] -= v;
    }
    return x;
  }

 private:
  Options opt_;
  std::size_t n_ = 0, m_ = 0, cols_ = 0, rhs_ = 0, slack0_ = 0, art0_ = 0;
  Matrix original_;
  Matrix t_;
  Eigen::RowVectorXd obj_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
  std::vector<bool> allowed_;
};

}  // namespace detail

inline Solution solve(const Problem& p, const Options& opt = {}) {
  if (p.objective.size() != p.num_vars) throw Error("lp: objective has wrong dimension");
  if (p.eq_rows.size() != p.eq_rhs.size() || p.ineq_rows.size() != p.ineq_rhs.size())
    throw Error("lp: row/rhs count mismatch");
  detail::Tableau tab(p, opt);
  Solution sol = tab.solve(p.objective);
  if (sol.status != Status::optimal) return sol;
  // Keep whichever of the pivoted and re-solved points is more accurate.
  if (auto alt = tab.resolve_basis(); alt && max_violation(p, *alt) <= max_violation(p, sol.x)) {
    sol.x = std::move(*alt);
    sol.value = dot(p.objective, sol.x);
  }
  if (!std::isfinite(sol.value)) sol.status = Status::solver_error;
  return sol;
}

}  // namespace vsrank::lp
