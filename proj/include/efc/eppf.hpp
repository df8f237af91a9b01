#pragma once

// Exchangeable partition probability functions.
//
// pd_eppf evaluates the two-parameter Poisson-Dirichlet sampling formula
//
//     p(n_1, ..., n_k) = (theta/alpha)_{k} / (theta)_{n} * prod_i -(-alpha)_{n_i}
//
// in the cancelled form (1/alpha) (beta+1)_{k-1} / (theta+1)_{n-1} * prod(...)
// with beta = theta/alpha.  The two forms agree exactly for theta != 0, and
// the cancelled form stays regular at theta = 0 where it evaluates to the
// analytic limit (k-1)! / (alpha (n-1)!).  Normalization over P_[n] holds
// exactly in this convention (the tests check it), which is what forces the
// 1/alpha factor.
//
// paintbox_eppf is the EPPF of a paint-box over a finitely supported proper
// mass partition: sum over ordered tuples of distinct support indices
// (j_1,...,j_k) of prod_i x_{j_i}^{n_i}.

#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "efc/mass_partition.hpp"
#include "efc/partition.hpp"
#include "efc/rational.hpp"

namespace efc {

// The parameter pair (alpha, theta) with 0 < alpha < 1 and theta > -alpha.
// beta = theta/alpha is cached; it governs the coagulation side.
class Params {
 public:
  Params(Rational alpha, Rational theta)
      : alpha_(std::move(alpha)), theta_(std::move(theta)), beta_(theta_ / alpha_) {
    if (!(Rational(0) < alpha_ && alpha_ < Rational(1)))
      throw std::domain_error("Params: alpha must lie in (0,1)");
    if (!(theta_ > -alpha_)) throw std::domain_error("Params: theta must exceed -alpha");
  }

  static Params parse(std::string_view alpha, std::string_view theta) {
    return Params(Rational::parse(alpha), Rational::parse(theta));
  }

  const Rational& alpha() const { return alpha_; }
  const Rational& theta() const { return theta_; }
  const Rational& beta() const { return beta_; }

 private:
  Rational alpha_;
  Rational theta_;
  Rational beta_;
};

inline Rational pd_eppf(const Params& params, const PartitionShape& shape) {
  unsigned k = static_cast<unsigned>(shape.part_count());
  unsigned n = static_cast<unsigned>(shape.total());
  Rational prefactor = rising_factorial(params.beta() + Rational(1), k - 1) /
                       (params.alpha() * rising_factorial(params.theta() + Rational(1), n - 1));
  Rational product(1);
  for (int size : shape.sizes()) product *= alpha_weight(params.alpha(), static_cast<unsigned>(size));
  return prefactor * product;
}

inline constexpr std::size_t kPaintboxSupportCap = 12;

namespace detail {

template <class T>
bool paintbox_masses_proper(const std::vector<T>& masses) {
  T sum{};
  for (const T& m : masses) sum += m;
  if constexpr (std::is_floating_point_v<T>) {
    return sum > 1.0 - 1e-9 && sum < 1.0 + 1e-9;
  } else {
    return sum == T(1);
  }
}

}  // namespace detail

// Sum over ordered tuples of distinct support indices, computed by recursion
// over shape entries with memoization on (entry position, used-index mask).
// Exact when T is Rational.
template <class T>
T paintbox_eppf(const std::vector<T>& masses, const PartitionShape& shape) {
  if (masses.empty()) throw std::domain_error("paintbox_eppf: empty support");
  if (masses.size() > kPaintboxSupportCap)
    throw std::domain_error("paintbox_eppf: support size exceeds cap");
  for (const T& m : masses)
    if (!(m > T{})) throw std::domain_error("paintbox_eppf: masses must be positive");
  if (!detail::paintbox_masses_proper(masses))
    throw std::domain_error("paintbox_eppf: masses must sum to 1 (no dust)");

  const auto& sizes = shape.sizes();
  std::map<std::pair<std::size_t, unsigned>, T> memo;
  auto recurse = [&](auto&& self, std::size_t pos, unsigned used_mask) -> T {
    if (pos == sizes.size()) return T(1);
    auto key = std::make_pair(pos, used_mask);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    T total{};
    for (std::size_t j = 0; j < masses.size(); ++j) {
      if (used_mask & (1u << j)) continue;
      T term = masses[j];
      for (int rep = 1; rep < sizes[pos]; ++rep) term *= masses[j];
      total += term * self(self, pos + 1, used_mask | (1u << j));
    }
    memo.emplace(key, total);
    return total;
  };
  return recurse(recurse, 0, 0u);
}

// Float-path overload; the mass partition must be proper (zero dust).
inline double paintbox_eppf(const MassPartition& x, const PartitionShape& shape) {
  if (x.dust() > 0.0) throw std::domain_error("paintbox_eppf: mass partition carries dust");
  return paintbox_eppf<double>(x.parts(), shape);
}

// Sum of p(shape(gamma)) over all gamma in P_[n]; equals 1 for a genuine EPPF.
inline Rational eppf_normalization(const std::function<Rational(const PartitionShape&)>& p, int n,
                                   int cap = kEnumerationCap) {
  Rational total(0);
  for (const auto& gamma : enumerate_set_partitions(n, cap)) total += p(shape_of(gamma));
  return total;
}

// Prediction rule derived from ratios of the sampling formula: given a
// partition of [n] with the given shape, entry i < k is the probability the
// next element joins block i, entry k the probability it opens a new block.
inline std::vector<Rational> crp_weights(const Params& params, const PartitionShape& shape) {
  Rational n_plus_theta = Rational(shape.total()) + params.theta();
  std::vector<Rational> weights;
  weights.reserve(shape.part_count() + 1);
  for (int size : shape.sizes())
    weights.push_back((Rational(size) - params.alpha()) / n_plus_theta);
  weights.push_back((params.theta() + Rational(static_cast<long long>(shape.part_count())) *
                                          params.alpha()) /
                    n_plus_theta);
  return weights;
}

}  // namespace efc
