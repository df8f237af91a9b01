#pragma once

// Exact analysis of the chain restricted to partitions of [n]: the rate
// matrix assembled from the split/merge moves, the restricted
// Poisson-Dirichlet law rho^[n] (state probability = EPPF of the state's
// shape), a detailed-balance audit over adjacent pairs, and an exact
// stationary solve by rational Gaussian elimination.
//
// Detailed balance,  rho(g) q(g,g') = rho(g') q(g',g)  for all pairs, is the
// reversibility statement; stationarity (pi Q = 0) is the strictly weaker
// invariance statement.  Both are checked by independent code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "efc/eppf.hpp"
#include "efc/partition.hpp"
#include "efc/rates.hpp"
#include "efc/rational.hpp"

namespace efc {

// Indexed enumeration of P_[n].  The order is the deterministic restricted
// growth order of enumerate_set_partitions, so independently constructed
// spaces for the same n always agree.
class StateSpace {
 public:
  explicit StateSpace(int n, int cap = kEnumerationCap)
      : n_(n), states_(enumerate_set_partitions(n, cap)) {
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  int n() const { return n_; }
  std::size_t size() const { return states_.size(); }
  const SetPartition& state(std::size_t i) const { return states_.at(i); }
  const std::vector<SetPartition>& states() const { return states_; }

  std::size_t index_of(const SetPartition& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) throw std::out_of_range("StateSpace: unknown state");
    return it->second;
  }

 private:
  int n_;
  std::vector<SetPartition> states_;
  std::map<SetPartition, std::size_t> index_;
};

// Probability vector over P_[n], indexed per StateSpace(n).
template <class T>
struct BasicDist {
  int n = 0;
  std::vector<T> probs;
};

using DistVector = BasicDist<Rational>;       // exact path
using EmpiricalDist = BasicDist<double>;      // float path

template <class T>
T tv_distance(const BasicDist<T>& a, const BasicDist<T>& b) {
  if (a.n != b.n || a.probs.size() != b.probs.size())
    throw std::invalid_argument("tv_distance: mismatched state enumerations");
  T total{};
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    T diff = a.probs[i] - b.probs[i];
    if (diff < T{}) diff = -diff;
    total += diff;
  }
  return total / T(2);
}

inline EmpiricalDist to_empirical(const DistVector& d) {
  EmpiricalDist out;
  out.n = d.n;
  out.probs.reserve(d.probs.size());
  for (const auto& p : d.probs) out.probs.push_back(p.to_double());
  return out;
}

// Sparse rate matrix over P_[n].  Off-diagonal entries are exactly the
// split/merge neighbors; each diagonal entry is the negative row sum, so
// rows sum to zero by construction.
class Generator {
 public:
  Generator(const Params& params, int n, int cap = kEnumerationCap)
      : space_(n, cap), rows_(space_.size()), diagonal_(space_.size(), Rational(0)) {
    RateTable table(params, n, cap);
    for (std::size_t from = 0; from < space_.size(); ++from) {
      const SetPartition& gamma = space_.state(from);
      int ell = static_cast<int>(gamma.block_count());
      std::map<std::size_t, Rational> row;
      for (const auto& move : coag_transitions(gamma)) {
        std::size_t to = space_.index_of(move.target);
        row[to] += table.coag(ell, static_cast<int>(move.merged.size()));
      }
      for (const auto& move : split_transitions(gamma, cap)) {
        std::size_t to = space_.index_of(move.target);
        row[to] += table.split(shape_of(move.eta));
      }
      Rational row_sum(0);
      for (auto& [to, rate] : row) {
        rows_[from].emplace_back(to, rate);
        row_sum += rate;
      }
      diagonal_[from] = -row_sum;
    }
  }

  const StateSpace& space() const { return space_; }
  int n() const { return space_.n(); }
  std::size_t size() const { return space_.size(); }

  const std::vector<std::pair<std::size_t, Rational>>& row(std::size_t i) const {
    return rows_.at(i);
  }
  const Rational& diagonal(std::size_t i) const { return diagonal_.at(i); }

  Rational rate(std::size_t from, std::size_t to) const {
    for (const auto& [j, r] : rows_.at(from))
      if (j == to) return r;
    return Rational(0);
  }

 private:
  StateSpace space_;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows_;
  std::vector<Rational> diagonal_;
};

inline Generator build_generator(const Params& params, int n, int cap = kEnumerationCap) {
  return Generator(params, n, cap);
}

// The image of PD(alpha,theta) under the paint-box restricted to [n]:
// each state gets the EPPF of its shape.
inline DistVector restricted_pd_distribution(const Params& params, int n,
                                             int cap = kEnumerationCap) {
  StateSpace space(n, cap);
  DistVector dist;
  dist.n = n;
  dist.probs.reserve(space.size());
  for (const auto& state : space.states()) dist.probs.push_back(pd_eppf(params, shape_of(state)));
  return dist;
}

struct BalanceReport {
  std::size_t pairs_checked = 0;
  Rational max_violation;                                // exact maximum over pairs
  std::vector<std::pair<std::size_t, std::size_t>> violations;  // pairs with nonzero imbalance
};

// Audits rho(g) q(g,g') = rho(g') q(g',g) over every structurally adjacent
// unordered pair; zero-rate pairs satisfy the equation trivially and are
// skipped.
inline BalanceReport check_detailed_balance(const Generator& gen, const DistVector& dist) {
  if (dist.n != gen.n() || dist.probs.size() != gen.size())
    throw std::invalid_argument("check_detailed_balance: mismatched state enumerations");
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < gen.size(); ++i)
    for (const auto& [j, rate] : gen.row(i)) pairs.emplace(std::min(i, j), std::max(i, j));
  BalanceReport report;
  report.max_violation = Rational(0);
  for (const auto& [a, b] : pairs) {
    Rational flow_ab = dist.probs[a] * gen.rate(a, b);
    Rational flow_ba = dist.probs[b] * gen.rate(b, a);
    Rational gap = (flow_ab - flow_ba).abs();
    ++report.pairs_checked;
    if (!gap.is_zero()) {
      report.violations.emplace_back(a, b);
      if (gap > report.max_violation) report.max_violation = gap;
    }
  }
  return report;
}

// Unique probability vector pi with pi Q = 0, by exact Gaussian elimination
// on Q^T.  Requires rank(Q) = #states - 1 (uniqueness); anything else means
// the rate construction is broken and is reported as such.
inline DistVector stationary_distribution(const Generator& gen) {
  std::size_t m = gen.size();
  // Dense Q^T: column j of Q becomes row j.
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m, Rational(0)));
  for (std::size_t i = 0; i < m; ++i) {
    a[i][i] = gen.diagonal(i);
    for (const auto& [j, rate] : gen.row(i)) a[j][i] = rate;
  }
  // Forward elimination with column pivoting; record pivot column per row.
  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < m; ++col) {
    std::size_t pivot = row;
    while (pivot < m && a[pivot][col].is_zero()) ++pivot;
    if (pivot == m) continue;
    std::swap(a[row], a[pivot]);
    for (std::size_t r = row + 1; r < m; ++r) {
      if (a[r][col].is_zero()) continue;
      Rational factor = a[r][col] / a[row][col];
      for (std::size_t c = col; c < m; ++c) a[r][c] -= factor * a[row][c];
    }
    pivot_col.push_back(col);
    ++row;
  }
  std::size_t rank = row;
  if (rank != m - 1)
    throw std::runtime_error("stationary_distribution: generator is reducible (rank defect)");
  // Exactly one free column: the one not used as a pivot.
  std::vector<char> is_pivot(m, 0);
  for (std::size_t c : pivot_col) is_pivot[c] = 1;
  std::size_t free_col = m;
  for (std::size_t c = 0; c < m; ++c)
    if (!is_pivot[c]) { free_col = c; break; }
  std::vector<Rational> x(m, Rational(0));
  x[free_col] = Rational(1);
  for (std::size_t r = rank; r-- > 0;) {
    std::size_t c = pivot_col[r];
    Rational acc(0);
    for (std::size_t cc = c + 1; cc < m; ++cc)
      if (!a[r][cc].is_zero()) acc += a[r][cc] * x[cc];
    x[c] = -acc / a[r][c];
  }
  Rational total(0);
  for (const auto& v : x) total += v;
  if (total.is_zero())
    throw std::runtime_error("stationary_distribution: degenerate null vector");
  DistVector dist;
  dist.n = gen.n();
  dist.probs.reserve(m);
  for (auto& v : x) dist.probs.push_back(v / total);
  for (const auto& p : dist.probs)
    if (p < Rational(0))
      throw std::runtime_error("stationary_distribution: generator is reducible (signed vector)");
  return dist;
}

// Float-path solve for state spaces too large for exact elimination: power
// iteration on the uniformized kernel P = I + Q/lambda until the residual
// ||pi Q||_inf falls below `residual_tol`.
inline EmpiricalDist stationary_distribution_float(const Generator& gen,
                                                   double residual_tol = 1e-10,
                                                   std::size_t max_iterations = 2000000) {
  std::size_t m = gen.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(m);
  std::vector<double> diag(m);
  double max_exit = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = gen.diagonal(i).to_double();
    max_exit = std::max(max_exit, -diag[i]);
    for (const auto& [j, r] : gen.row(i)) rows[i].emplace_back(j, r.to_double());
  }
  double lambda = max_exit > 0.0 ? 1.05 * max_exit : 1.0;
  std::vector<double> pi(m, 1.0 / static_cast<double>(m));
  std::vector<double> next(m);
  auto residual = [&](const std::vector<double>& v) {
    double worst = 0.0;
    std::vector<double> vq(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      vq[i] += v[i] * diag[i];
      for (const auto& [j, r] : rows[i]) vq[j] += v[i] * r;
    }
    for (double q : vq) worst = std::max(worst, std::abs(q));
    return worst;
  };
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double mass = pi[i];
      next[i] += mass * (1.0 + diag[i] / lambda);
      for (const auto& [j, r] : rows[i]) next[j] += mass * r / lambda;
    }
    double sum = 0.0;
    for (double v : next) sum += v;
    for (double& v : next) v /= sum;
    pi.swap(next);
    if (it % 16 == 0 && residual(pi) < residual_tol) break;
  }
  if (residual(pi) >= residual_tol)
    throw std::runtime_error("stationary_distribution_float: residual did not converge");
  EmpiricalDist dist;
  dist.n = gen.n();
  dist.probs = std::move(pi);
  return dist;
}

// Pushes a distribution over P_[n] forward through restriction to [n-1].
inline DistVector marginal_restriction(const DistVector& dist, int cap = kEnumerationCap) {
  if (dist.n < 2) throw std::domain_error("marginal_restriction: need n >= 2");
  StateSpace fine(dist.n, cap);
  StateSpace coarse(dist.n - 1, cap);
  if (dist.probs.size() != fine.size())
    throw std::invalid_argument("marginal_restriction: wrong vector length");
  DistVector out;
  out.n = dist.n - 1;
  out.probs.assign(coarse.size(), Rational(0));
  for (std::size_t i = 0; i < fine.size(); ++i) {
    std::size_t target = coarse.index_of(restrict_to(fine.state(i), dist.n - 1));
    out.probs[target] += dist.probs[i];
  }
  return out;
}

}  // namespace efc
