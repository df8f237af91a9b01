#pragma once

// Gillespie simulation of the restricted chain and the convergence
// experiments.
//
// From a state with ell blocks the total exit rate is
//
//     sum_{k=2}^{ell} C(ell,k) c(ell,k)  +  sum_{blocks of size k >= 2} S(k),
//
// where S(k) is the total split rate of a size-k block.  A step draws an
// exponential holding time at that rate, then picks a coagulation subset
// size k proportional to C(ell,k) c(ell,k) and a uniform k-subset, or a
// block proportional to S(size) and a fragmentation eta proportional to its
// split rate.
//
// Fixed-time distributions are estimated from independent replicas (one per
// substream of the master seed), never from a single long path, and compared
// to the restricted Poisson-Dirichlet law in total variation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "efc/chain.hpp"
#include "efc/partition.hpp"
#include "efc/rates.hpp"
#include "efc/sampling.hpp"

namespace efc {

struct Trajectory {
  std::vector<std::pair<double, SetPartition>> jumps;  // strictly increasing times
  double end_time = 0.0;
};

struct GillespieStep {
  double holding_time;
  SetPartition next;
};

class GillespieSimulator {
 public:
  explicit GillespieSimulator(const RateTable& table, int cap = kEnumerationCap)
      : n_(table.n()) {
    // Coagulation: per block count ell, cumulative weights C(ell,k) c(ell,k).
    coag_cum_.resize(static_cast<std::size_t>(n_) + 1);
    coag_total_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
    for (int ell = 2; ell <= n_; ++ell) {
      auto& cum = coag_cum_[static_cast<std::size_t>(ell)];
      double acc = 0.0;
      for (int k = 2; k <= ell; ++k) {
        acc += binomial(static_cast<unsigned>(ell), static_cast<unsigned>(k)).convert_to<double>() *
               table.coag(ell, k).to_double();
        cum.push_back(acc);
      }
      coag_total_[static_cast<std::size_t>(ell)] = acc;
    }
    // Splitting: per block size, the menu of non-trivial fragmentations with
    // cumulative weights.
    split_menu_.resize(static_cast<std::size_t>(n_) + 1);
    split_total_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
    for (int size = 2; size <= n_; ++size) {
      auto& menu = split_menu_[static_cast<std::size_t>(size)];
      double acc = 0.0;
      for (auto& eta : enumerate_set_partitions(size, cap)) {
        if (eta.block_count() < 2) continue;
        acc += table.split(shape_of(eta)).to_double();
        menu.emplace_back(std::move(eta), acc);
      }
      split_total_[static_cast<std::size_t>(size)] = acc;
    }
  }

  int n() const { return n_; }

  // One jump; empty when the state has no available move (the single state
  // of P_[1] is absorbing).
  std::optional<GillespieStep> step(const SetPartition& state, Rng& rng) const {
    if (state.ground_size() != n_)
      throw std::invalid_argument("GillespieSimulator: state has wrong ground size");
    std::size_t ell = state.block_count();
    double coag_total = coag_total_[ell];
    double split_total = 0.0;
    for (const auto& block : state.blocks()) split_total += split_total_[block.size()];
    double total = coag_total + split_total;
    if (total <= 0.0) return std::nullopt;
    double holding = rng.exponential(total);
    double u = rng.uniform() * total;
    if (u < coag_total) {
      const auto& cum = coag_cum_[ell];
      std::size_t pick = cum.size() - 1;
      for (std::size_t i = 0; i < cum.size(); ++i) {
        if (u < cum[i]) {
          pick = i;
          break;
        }
      }
      int k = static_cast<int>(pick) + 2;
      return GillespieStep{holding, merge_blocks(state, random_subset(ell, k, rng))};
    }
    double v = u - coag_total;
    std::size_t block_index = state.block_count() - 1;
    for (std::size_t b = 0; b < state.block_count(); ++b) {
      double w = split_total_[state.block(b).size()];
      if (v < w) {
        block_index = b;
        break;
      }
      v -= w;
    }
    const auto& menu = split_menu_[state.block(block_index).size()];
    std::size_t pick = menu.size() - 1;
    for (std::size_t i = 0; i < menu.size(); ++i) {
      if (v < menu[i].second) {
        pick = i;
        break;
      }
    }
    return GillespieStep{holding, split_block(state, block_index, menu[pick].first)};
  }

  // State occupied at t_end; optionally records every jump up to t_end.
  SetPartition run(const SetPartition& initial, double t_end, Rng& rng,
                   Trajectory* trajectory = nullptr) const {
    if (t_end < 0.0) throw std::domain_error("GillespieSimulator: t_end must be >= 0");
    if (trajectory) {
      trajectory->jumps.clear();
      trajectory->end_time = t_end;
    }
    SetPartition state = initial;
    double t = 0.0;
    for (;;) {
      auto jump = step(state, rng);
      if (!jump) return state;
      t += jump->holding_time;
      if (t > t_end) return state;
      state = jump->next;
      if (trajectory) trajectory->jumps.emplace_back(t, state);
    }
  }

 private:
  static std::vector<std::size_t> random_subset(std::size_t ell, int k, Rng& rng) {
    // Partial Fisher-Yates: uniform k-subset of {0, ..., ell-1}.
    std::vector<std::size_t> pool(ell);
    for (std::size_t i = 0; i < ell; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      std::size_t j = static_cast<std::size_t>(i) +
                      static_cast<std::size_t>(rng.uniform_below(ell - static_cast<std::size_t>(i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    return {pool.begin(), pool.begin() + k};
  }

  int n_;
  std::vector<std::vector<double>> coag_cum_;
  std::vector<double> coag_total_;
  std::vector<std::vector<std::pair<SetPartition, double>>> split_menu_;
  std::vector<double> split_total_;
};

// Convenience form; run() and the experiments reuse one compiled simulator
// instead.
inline std::optional<GillespieStep> gillespie_step(const SetPartition& state,
                                                   const RateTable& table, Rng& rng) {
  return GillespieSimulator(table).step(state, rng);
}

inline SetPartition gillespie_run(const Params& params, int n, const SetPartition& initial,
                                  double t_end, Rng& rng, Trajectory* trajectory = nullptr) {
  return GillespieSimulator(RateTable(params, n)).run(initial, t_end, rng, trajectory);
}

struct TvPoint {
  double t = 0.0;
  double tv = 0.0;
  double se = 0.0;
};

namespace detail {

// Delta-method standard error of the plug-in TV estimate: with
// g(s) = sign(phat_s - p_s), TV = (E_emp[g] - sum_s g_s p_s) / 2, so
// se(TV) = sd_emp(g) / (2 sqrt(R)).
inline double tv_standard_error(const std::vector<double>& empirical,
                                const std::vector<double>& exact, std::size_t replicas) {
  double mean_g = 0.0;
  double mean_g2 = 0.0;
  for (std::size_t s = 0; s < empirical.size(); ++s) {
    double g = empirical[s] > exact[s] ? 1.0 : (empirical[s] < exact[s] ? -1.0 : 0.0);
    mean_g += g * empirical[s];
    mean_g2 += g * g * empirical[s];
  }
  double var_g = std::max(0.0, mean_g2 - mean_g * mean_g);
  return 0.5 * std::sqrt(var_g / static_cast<double>(replicas));
}

}  // namespace detail

// Empirical distance to equilibrium: for each grid time, the empirical law
// over P_[n] from independent replicas started at `initial`, in total
// variation against the restricted Poisson-Dirichlet law.
inline std::vector<TvPoint> equilibrium_experiment(const Params& params, int n,
                                                   const std::vector<double>& time_grid,
                                                   std::size_t replicas,
                                                   const SetPartition& initial,
                                                   std::uint64_t master_seed,
                                                   int cap = kEnumerationCap) {
  if (time_grid.empty()) throw std::domain_error("equilibrium_experiment: empty time grid");
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (time_grid[i] < 0.0 || (i > 0 && time_grid[i] <= time_grid[i - 1]))
      throw std::domain_error("equilibrium_experiment: grid must be increasing and nonnegative");
  }
  if (replicas < 1000) throw std::domain_error("equilibrium_experiment: need at least 1000 replicas");
  GillespieSimulator sim(RateTable(params, n, cap), cap);
  StateSpace space(n, cap);
  EmpiricalDist exact = to_empirical(restricted_pd_distribution(params, n, cap));
  std::vector<std::vector<double>> counts(time_grid.size(),
                                          std::vector<double>(space.size(), 0.0));
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng = Rng::substream(master_seed, r);
    SetPartition state = initial;
    double t = 0.0;
    std::size_t gi = 0;
    while (gi < time_grid.size()) {
      auto jump = sim.step(state, rng);
      if (!jump) {
        for (; gi < time_grid.size(); ++gi) counts[gi][space.index_of(state)] += 1.0;
        break;
      }
      while (gi < time_grid.size() && time_grid[gi] < t + jump->holding_time) {
        counts[gi][space.index_of(state)] += 1.0;
        ++gi;
      }
      t += jump->holding_time;
      state = jump->next;
    }
  }
  std::vector<TvPoint> out(time_grid.size());
  for (std::size_t gi = 0; gi < time_grid.size(); ++gi) {
    EmpiricalDist empirical;
    empirical.n = n;
    empirical.probs.resize(space.size());
    for (std::size_t s = 0; s < space.size(); ++s)
      empirical.probs[s] = counts[gi][s] / static_cast<double>(replicas);
    out[gi].t = time_grid[gi];
    out[gi].tv = tv_distance(empirical, exact);
    out[gi].se = detail::tv_standard_error(empirical.probs, exact.probs, replicas);
  }
  return out;
}

// Means and batch-means standard errors for a stream of recorded samples.
inline Estimate batch_means(const std::vector<double>& samples, std::size_t batches = 30) {
  if (samples.empty()) throw std::domain_error("batch_means: no samples");
  batches = std::min(batches, samples.size());
  std::size_t per_batch = samples.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (std::size_t i = b * per_batch; i < (b + 1) * per_batch; ++i) sum += samples[i];
    means[b] = sum / static_cast<double>(per_batch);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  if (batches < 2) return {grand, 0.0};
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(batches - 1);
  return {grand, std::sqrt(var / static_cast<double>(batches))};
}

struct SplitMergeSummary {
  std::size_t samples = 0;
  Estimate top_above_half;   // P(x_1 > 1/2)
  Estimate mean_top;         // E[x_1]
  Estimate mean_sum_squares; // E[sum x_i^2]
};

// Long-run ergodic averages of the split-and-merge chain, started from the
// pure state (1, 0, ...).
inline SplitMergeSummary split_merge_experiment(std::size_t steps, std::size_t burn_in,
                                                std::size_t thin, Rng& rng) {
  if (steps <= burn_in) throw std::domain_error("split_merge_experiment: steps must exceed burn-in");
  if (thin == 0) throw std::domain_error("split_merge_experiment: thin must be >= 1");
  MassPartition state = MassPartition::proper_from_parts({1.0});
  std::vector<double> above_half;
  std::vector<double> top;
  std::vector<double> sum_squares;
  for (std::size_t step = 0; step < steps; ++step) {
    state = split_merge_step(state, rng);
    if (step < burn_in || (step - burn_in) % thin != 0) continue;
    double x1 = state.part(0);
    double ss = 0.0;
    for (double p : state.parts()) ss += p * p;
    above_half.push_back(x1 > 0.5 ? 1.0 : 0.0);
    top.push_back(x1);
    sum_squares.push_back(ss);
  }
  SplitMergeSummary summary;
  summary.samples = top.size();
  summary.top_above_half = batch_means(above_half);
  summary.mean_top = batch_means(top);
  summary.mean_sum_squares = batch_means(sum_squares);
  return summary;
}

}  // namespace efc
