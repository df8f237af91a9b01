#pragma once

// Transition rates of the fragmentation-coalescence chain.
//
// Coagulation: a simple merge of k of the ell blocks happens at rate
//
//     c(ell, k) = int_0^1 u^{k-2} (1-u)^{ell-k+beta} du
//               = (k-2)! / (ell-k+1+beta)_{k-1},
//
// the Beta(k-1, ell-k+beta+1) integral under the measure (1-u)^beta du.
// coag_rate evaluates the closed form exactly; coag_rate_quadrature is an
// independent numerical oracle for it.
//
// Splitting: a block of size m fragments into child blocks of sizes
// (m_1, ..., m_ell) at rate
//
//     s(m_1, ..., m_ell) = (ell-2)! * prod_j -(-alpha)_{m_j} / -(-alpha)_{m},
//
// the closed form of the paint-box integral int nu(dx) p_x(m_1,...,m_ell)
// for the sigma-finite dislocation measure indexed by alpha.  The rate
// depends on the children only through their shape.
// split_rate_from_measure evaluates the same integral for a finitely
// supported measure; it exists as an oracle for the machinery, not as a
// route to the infinite measure.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "efc/eppf.hpp"
#include "efc/partition.hpp"
#include "efc/rational.hpp"

namespace efc {

inline Rational coag_rate(const Rational& beta, int ell, int k) {
  if (k < 2 || k > ell) throw std::domain_error("coag_rate: need 2 <= k <= ell");
  if (!(beta > Rational(-1))) throw std::domain_error("coag_rate: beta must exceed -1");
  Rational base = Rational(ell - k + 1) + beta;
  return Rational(factorial(static_cast<unsigned>(k - 2)), 1) /
         rising_factorial(base, static_cast<unsigned>(k - 1));
}

namespace detail {

// Adaptive Simpson with the usual |S_left + S_right - S| <= 15 tol refinement
// test.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  if (depth > 60) throw std::runtime_error("coag_rate_quadrature: did not converge");
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

template <class F>
double integrate_unit_interval(const F& f, double tol) {
  double fa = f(0.0);
  double fb = f(1.0);
  double fm = f(0.5);
  double whole = (fa + 4.0 * fm + fb) / 6.0;
  return adaptive_simpson(f, 0.0, 1.0, fa, fm, fb, whole, tol, 0);
}

}  // namespace detail

// Numerical oracle for coag_rate: integrates u^{k-2} (1-u)^c with
// c = ell-k+beta.  When c is in (-1,0) the endpoint singularity at u=1 is
// removed by the substitution u = 1 - v^m with m(c+1) >= 1.
inline double coag_rate_quadrature(double beta, int ell, int k, double abs_tol = 1e-10) {
  if (k < 2 || k > ell) throw std::domain_error("coag_rate_quadrature: need 2 <= k <= ell");
  if (!(beta > -1.0)) throw std::domain_error("coag_rate_quadrature: beta must exceed -1");
  double c = static_cast<double>(ell - k) + beta;
  auto power = [](double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
  };
  if (c >= 0.0) {
    auto f = [&](double u) { return power(u, k - 2) * std::pow(1.0 - u, c); };
    return detail::integrate_unit_interval(f, abs_tol);
  }
  int m = static_cast<int>(std::ceil(1.0 / (c + 1.0)));
  if (m < 1) m = 1;
  auto f = [&](double v) {
    double vm = std::pow(v, m);
    double tail = std::pow(v, static_cast<double>(m) * (c + 1.0) - 1.0);
    return static_cast<double>(m) * power(1.0 - vm, k - 2) * tail;
  };
  return detail::integrate_unit_interval(f, abs_tol);
}

inline Rational split_rate(const Rational& alpha, const PartitionShape& children) {
  unsigned ell = static_cast<unsigned>(children.part_count());
  if (ell < 2) throw std::domain_error("split_rate: need at least two child blocks");
  unsigned parent = static_cast<unsigned>(children.total());
  Rational product(1);
  for (int child : children.sizes()) product *= alpha_weight(alpha, static_cast<unsigned>(child));
  return Rational(factorial(ell - 2), 1) * product / alpha_weight(alpha, parent);
}

// Finitely supported measure on proper mass partitions.  Atoms must have
// positive weight and must not be the pure state (1, 0, ...), the excluded
// configuration for dislocation measures.
template <class T>
class DiscreteMeasure {
 public:
  struct Atom {
    std::vector<T> masses;
    T weight;
  };

  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& atom : atoms_) {
      if (!(atom.weight > T{})) throw std::domain_error("DiscreteMeasure: weights must be positive");
      if (atom.masses.size() == 1) throw std::domain_error("DiscreteMeasure: atom (1,0,...) excluded");
      if (!detail::paintbox_masses_proper(atom.masses))
        throw std::domain_error("DiscreteMeasure: atom masses must sum to 1");
    }
  }

  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  std::vector<Atom> atoms_;
};

// The paint-box splitting rate s(shape) = sum_atoms w * p_x(shape) for a
// finitely supported measure.  Defined for any shape; only shapes with at
// least two parts arise as genuine splitting rates.
template <class T>
T split_rate_from_measure(const DiscreteMeasure<T>& nu, const PartitionShape& shape) {
  T total{};
  for (const auto& atom : nu.atoms()) total += atom.weight * paintbox_eppf(atom.masses, shape);
  return total;
}

namespace detail {

// Number of set partitions of [k] whose shape is `sizes` (sorted decreasing):
// k! / (prod sizes_i! * prod_m mult(m)!).
inline BigInt set_partition_count(const std::vector<int>& sizes, int k) {
  BigInt count = factorial(static_cast<unsigned>(k));
  std::map<int, unsigned> multiplicity;
  for (int s : sizes) {
    count /= factorial(static_cast<unsigned>(s));
    ++multiplicity[s];
  }
  for (const auto& [size, mult] : multiplicity) count /= factorial(mult);
  return count;
}

}  // namespace detail

// Total rate at which a block of size k splits: sum over non-trivial eta in
// P_[k] of split_rate(shape(eta)), grouped by shape with multiplicities.
inline Rational total_split_rate(const Rational& alpha, int k, int cap = kEnumerationCap) {
  if (k < 1) throw std::domain_error("total_split_rate: k must be >= 1");
  if (k > cap) throw std::domain_error("total_split_rate: k exceeds enumeration cap");
  Rational total(0);
  if (k == 1) return total;
  for (const auto& sizes : integer_partitions(k)) {
    if (sizes.size() < 2) continue;
    total += Rational(detail::set_partition_count(sizes, k), 1) *
             split_rate(alpha, PartitionShape(sizes));
  }
  return total;
}

// Precomputed rates for states of P_[n]: coagulation rates c(ell,k) for
// 2 <= k <= ell <= n, splitting rates by child shape for parent sizes <= n,
// and per-size split totals.
class RateTable {
 public:
  RateTable(const Params& params, int n, int cap = kEnumerationCap) : params_(params), n_(n) {
    if (n < 1) throw std::domain_error("RateTable: n must be >= 1");
    if (n > cap) throw std::domain_error("RateTable: n exceeds enumeration cap");
    for (int ell = 2; ell <= n; ++ell)
      for (int k = 2; k <= ell; ++k) coag_.emplace(std::make_pair(ell, k), coag_rate(params.beta(), ell, k));
    split_totals_.assign(static_cast<std::size_t>(n) + 1, Rational(0));
    for (int parent = 2; parent <= n; ++parent) {
      for (const auto& sizes : integer_partitions(parent)) {
        if (sizes.size() < 2) continue;
        PartitionShape shape(sizes);
        Rational rate = split_rate(params.alpha(), shape);
        split_.emplace(shape, rate);
        split_totals_[static_cast<std::size_t>(parent)] +=
            Rational(detail::set_partition_count(sizes, parent), 1) * rate;
      }
    }
  }

  const Params& params() const { return params_; }
  int n() const { return n_; }

  const Rational& coag(int ell, int k) const {
    auto it = coag_.find(std::make_pair(ell, k));
    if (it == coag_.end()) throw std::out_of_range("RateTable: no coagulation entry (ell,k)");
    return it->second;
  }

  const Rational& split(const PartitionShape& children) const {
    auto it = split_.find(children);
    if (it == split_.end()) throw std::out_of_range("RateTable: no split entry for shape");
    return it->second;
  }

  const Rational& split_total(int block_size) const {
    if (block_size < 1 || block_size > n_)
      throw std::out_of_range("RateTable: block size out of range");
    return split_totals_[static_cast<std::size_t>(block_size)];
  }

  const std::map<std::pair<int, int>, Rational>& coag_entries() const { return coag_; }
  const std::map<PartitionShape, Rational>& split_entries() const { return split_; }

 private:
  Params params_;
  int n_;
  std::map<std::pair<int, int>, Rational> coag_;
  std::map<PartitionShape, Rational> split_;
  std::vector<Rational> split_totals_;
};

inline RateTable build_rate_table(const Params& params, int n) { return RateTable(params, n); }

}  // namespace efc
