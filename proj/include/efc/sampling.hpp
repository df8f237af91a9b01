#pragma once

// Random generation.
//
// Stick-breaking: with independent beta factors b_1, b_2, ... the residual
// allocation sticks are xi_{n} = b_n * prod_{i<n} (1 - b_i).  Factors
// Beta(1, theta) give GEM(theta); factors Beta(1-alpha, theta+n*alpha) give
// the two-parameter family whose ranked sequence is PD(alpha, theta).
// Sticks arrive in size-biased order; rank() sorts them into a mass
// partition.  Truncation stops at a stick count or when the remaining dust
// falls below a threshold; dust is always carried explicitly.
//
// The diversity statistic L = lim n x_n^alpha (estimated here over a
// trailing index window) is the Radon-Nikodym engine between PD(alpha,0)
// and PD(alpha,theta):  PD(alpha,theta) is proportional to
// L^{theta/alpha} PD(alpha,0), which importance_estimate exploits with
// self-normalized weights.
//
// All draws reduce to a deterministic 64-bit core (mt19937_64), so a fixed
// seed and call sequence reproduce identical output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "efc/eppf.hpp"
#include "efc/mass_partition.hpp"
#include "efc/partition.hpp"

namespace efc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Substream for replica `index`: seeds a fresh engine from
  // splitmix64(master_seed ^ (index+1)), so replicas are decorrelated and the
  // assignment is reproducible from the master seed alone.
  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(detail::splitmix64(master_seed ^ (index + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::domain_error("Rng::uniform_below: n must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::domain_error("Rng::exponential: rate must be positive");
    return -std::log(uniform_pos()) / rate;
  }

  // Marsaglia polar method with a cached spare.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    have_spare_ = true;
    return u * scale;
  }

  // Marsaglia-Tsang for shape >= 1; shapes below 1 use the boost
  // G(a) = G(a+1) * U^{1/a}.  Shape 1/2 is half a chi-square with one
  // degree of freedom.  Unit scale.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("Rng::gamma: shape must be positive");
    if (shape == 0.5) {
      double z = normal();
      return 0.5 * z * z;
    }
    if (shape < 1.0) {
      double boost = std::pow(uniform_pos(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform_pos();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline double beta_sample(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("beta_sample: parameters must be positive");
  for (;;) {
    double x = rng.gamma(a);
    double y = rng.gamma(b);
    double r = x / (x + y);
    if (r > 0.0 && r < 1.0) return r;  // discard underflow endpoints
  }
}

struct Truncation {
  std::size_t max_parts = 10000;
  double dust_eps = 1e-12;
};

// GEM(theta) sticks in size-biased order, from i.i.d. Beta(1, theta) factors.
inline std::vector<double> gem_sample(double theta, Rng& rng, const Truncation& trunc = {}) {
  if (!(theta > 0.0)) throw std::domain_error("gem_sample: theta must be positive");
  std::vector<double> sticks;
  double remaining = 1.0;
  while (sticks.size() < trunc.max_parts && remaining > trunc.dust_eps) {
    double b = beta_sample(1.0, theta, rng);
    sticks.push_back(b * remaining);
    remaining *= 1.0 - b;
  }
  return sticks;
}

// Two-parameter sticks: factor n is Beta(1-alpha, theta + n*alpha).  With
// alpha = 0 this is exactly gem_sample.
inline std::vector<double> pd_stick_sample(double alpha, double theta, Rng& rng,
                                           const Truncation& trunc = {}) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::domain_error("pd_stick_sample: alpha must lie in [0,1)");
  if (!(theta > -alpha)) throw std::domain_error("pd_stick_sample: theta must exceed -alpha");
  std::vector<double> sticks;
  double remaining = 1.0;
  std::size_t n = 1;
  while (sticks.size() < trunc.max_parts && remaining > trunc.dust_eps) {
    double b = beta_sample(1.0 - alpha, theta + static_cast<double>(n) * alpha, rng);
    sticks.push_back(b * remaining);
    remaining *= 1.0 - b;
    ++n;
  }
  return sticks;
}

// Sorts a nonnegative sequence decreasingly into a mass partition; the sum
// is preserved and the shortfall from 1 becomes dust.
inline MassPartition rank(const std::vector<double>& seq) {
  std::vector<double> parts = seq;
  for (double p : parts)
    if (p < 0.0) throw std::domain_error("rank: negative entry");
  std::sort(parts.begin(), parts.end(), std::greater<double>());
  return MassPartition(std::move(parts));
}

// Paint-box over a proper mass partition: n i.i.d. color draws, two indices
// in the same block iff they drew the same color.
inline SetPartition paintbox_sample(const MassPartition& x, int n, Rng& rng) {
  if (x.dust() > 0.0) throw std::domain_error("paintbox_sample: mass partition carries dust");
  if (n < 1) throw std::domain_error("paintbox_sample: n must be >= 1");
  std::map<std::size_t, std::vector<int>> by_color;
  for (int element = 1; element <= n; ++element) {
    double u = rng.uniform() * x.sum();
    std::size_t color = x.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += x.part(i);
      if (u < acc) {
        color = i;
        break;
      }
    }
    by_color[color].push_back(element);
  }
  std::vector<std::vector<int>> blocks;
  blocks.reserve(by_color.size());
  for (auto& [color, members] : by_color) blocks.push_back(std::move(members));
  return SetPartition(n, std::move(blocks));
}

// Sequential sampler realizing the sampling formula through its prediction
// rule: element m+1 joins a block of size s with probability (s-alpha)/(m+theta)
// and opens a new block with probability (theta + k*alpha)/(m+theta).
inline SetPartition crp_sample(const Params& params, int n, Rng& rng) {
  if (n < 1) throw std::domain_error("crp_sample: n must be >= 1");
  double alpha = params.alpha().to_double();
  double theta = params.theta().to_double();
  std::vector<std::vector<int>> blocks{{1}};
  for (int element = 2; element <= n; ++element) {
    double m = static_cast<double>(element - 1);
    double u = rng.uniform() * (m + theta);
    double acc = 0.0;
    std::size_t chosen = blocks.size();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      acc += static_cast<double>(blocks[b].size()) - alpha;
      if (u < acc) {
        chosen = b;
        break;
      }
    }
    if (chosen == blocks.size()) {
      blocks.push_back({element});
    } else {
      blocks[chosen].push_back(element);
    }
  }
  return SetPartition(n, std::move(blocks));
}

// Average of i * x_i^alpha over a 1-based inclusive index window.
inline double l_estimate(const MassPartition& x, double alpha, std::size_t lo, std::size_t hi) {
  if (lo < 1 || lo > hi) throw std::domain_error("l_estimate: bad window");
  if (hi > x.size()) throw std::domain_error("l_estimate: window exceeds truncation");
  double total = 0.0;
  for (std::size_t i = lo; i <= hi; ++i)
    total += static_cast<double>(i) * std::pow(x.part(i - 1), alpha);
  return total / static_cast<double>(hi - lo + 1);
}

// Default window: trailing quarter of the sampled indices.  The statistic is
// a limit, so averaging the tail reduces variance without moving it.
inline double l_estimate(const MassPartition& x, double alpha) {
  if (x.size() == 0) throw std::domain_error("l_estimate: empty mass partition");
  std::size_t window = std::max<std::size_t>(1, x.size() / 4);
  return l_estimate(x, alpha, x.size() - window + 1, x.size());
}

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Self-normalized importance estimate of E[f] under PD(alpha,theta) from
// PD(alpha,0) stick samples, with weights L_hat^{theta/alpha}.  The unknown
// normalizing constant cancels in the ratio.  Standard error by the delta
// method on the weighted mean.
inline Estimate importance_estimate(const std::function<double(const MassPartition&)>& f,
                                    const Params& params, std::size_t replicas, Rng& rng,
                                    const Truncation& trunc = {}) {
  if (params.theta().is_zero())
    throw std::domain_error("importance_estimate: theta must be nonzero");
  if (replicas < 100) throw std::domain_error("importance_estimate: need at least 100 replicas");
  double alpha = params.alpha().to_double();
  double exponent = params.beta().to_double();
  std::vector<double> weights(replicas);
  std::vector<double> values(replicas);
  double weight_sum = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    MassPartition x = rank(pd_stick_sample(alpha, 0.0, rng, trunc));
    double w = std::pow(l_estimate(x, alpha), exponent);
    if (!std::isfinite(w)) throw std::runtime_error("importance_estimate: non-finite weight");
    weights[r] = w;
    values[r] = f(x);
    weight_sum += w;
  }
  if (!(weight_sum > 0.0))
    throw std::runtime_error("importance_estimate: degenerate weights (all ~ 0)");
  double estimate = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) estimate += weights[r] / weight_sum * values[r];
  double variance = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    double wn = weights[r] / weight_sum;
    double dev = values[r] - estimate;
    variance += wn * wn * dev * dev;
  }
  return {estimate, std::sqrt(variance)};
}

// One move of the split-and-merge chain: draw indices N, N' i.i.d. from the
// mass partition itself; distinct indices merge, a repeated index splits its
// part uniformly.  Total mass is conserved (up to float addition order).
inline MassPartition split_merge_step(const MassPartition& x, Rng& rng) {
  if (x.dust() > 0.0) throw std::domain_error("split_merge_step: mass partition carries dust");
  if (x.size() == 0) throw std::domain_error("split_merge_step: empty mass partition");
  auto draw_index = [&]() {
    double u = rng.uniform() * x.sum();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += x.part(i);
      if (u < acc) return i;
    }
    return x.size() - 1;
  };
  std::size_t first = draw_index();
  std::size_t second = draw_index();
  std::vector<double> parts = x.parts();
  if (first != second) {
    double merged = parts[first] + parts[second];
    std::size_t hi = std::max(first, second);
    std::size_t lo = std::min(first, second);
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(hi));
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(lo));
    parts.push_back(merged);
  } else {
    double u = rng.uniform();
    double whole = parts[first];
    parts[first] = u * whole;
    parts.push_back((1.0 - u) * whole);
  }
  std::sort(parts.begin(), parts.end(), std::greater<double>());
  while (!parts.empty() && parts.back() == 0.0) parts.pop_back();
  return MassPartition::proper_from_parts(std::move(parts));
}

}  // namespace efc
