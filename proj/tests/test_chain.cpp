#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "efc/chain.hpp"
#include "efc/partition.hpp"
#include "efc/rational.hpp"

using efc::build_generator;
using efc::check_detailed_balance;
using efc::coag_transitions;
using efc::DistVector;
using efc::EmpiricalDist;
using efc::Generator;
using efc::marginal_restriction;
using efc::Params;
using efc::Rational;
using efc::restricted_pd_distribution;
using efc::SetPartition;
using efc::split_transitions;
using efc::StateSpace;
using efc::stationary_distribution;
using efc::stationary_distribution_float;
using efc::tv_distance;

namespace {

std::vector<Params> parameter_grid() {
  return {
      Params::parse("1/2", "1/2"), Params::parse("1/2", "2"), Params::parse("1/3", "1/4"),
      Params::parse("1/2", "-1/4"), Params::parse("2/3", "1"),
  };
}

}  // namespace

TEST_CASE("two-state generator carries the worked rates") {
  Generator gen = build_generator(Params::parse("1/2", "1/2"), 2);
  StateSpace space(2);
  std::size_t merged = space.index_of(SetPartition::single_block(2));
  std::size_t split = space.index_of(SetPartition::singletons(2));
  CHECK(gen.rate(merged, split) == Rational(1));
  CHECK(gen.rate(split, merged) == Rational(1, 2));
  CHECK(gen.diagonal(merged) == Rational(-1));
  CHECK(gen.diagonal(split) == Rational(-1, 2));
}

TEST_CASE("rows sum to zero exactly and the single state of P_[1] is inert") {
  for (const Params& params : parameter_grid()) {
    for (int n = 1; n <= 5; ++n) {
      Generator gen = build_generator(params, n);
      for (std::size_t i = 0; i < gen.size(); ++i) {
        Rational sum = gen.diagonal(i);
        for (const auto& [j, rate] : gen.row(i)) {
          CHECK(rate > Rational(0));
          CHECK(j != i);
          sum += rate;
        }
        CHECK(sum == Rational(0));
      }
    }
  }
  Generator trivial = build_generator(Params::parse("1/2", "1/2"), 1);
  CHECK(trivial.size() == 1);
  CHECK(trivial.row(0).empty());
  CHECK(trivial.diagonal(0) == Rational(0));
}

TEST_CASE("each nonzero rate comes from exactly one split or one simple merge") {
  Params params = Params::parse("1/2", "1/2");
  for (int n = 2; n <= 5; ++n) {
    Generator gen = build_generator(params, n);
    const StateSpace& space = gen.space();
    for (std::size_t from = 0; from < gen.size(); ++from) {
      const SetPartition& gamma = space.state(from);
      for (const auto& [to, rate] : gen.row(from)) {
        const SetPartition& target = space.state(to);
        int generating_moves = 0;
        for (const auto& move : coag_transitions(gamma))
          if (move.target == target) ++generating_moves;
        for (const auto& move : split_transitions(gamma))
          if (move.target == target) ++generating_moves;
        CHECK(generating_moves == 1);
      }
    }
  }
}

TEST_CASE("restricted Poisson-Dirichlet law") {
  DistVector two = restricted_pd_distribution(Params::parse("1/2", "1/2"), 2);
  CHECK(two.probs == std::vector<Rational>{Rational(1, 3), Rational(2, 3)});

  DistVector one = restricted_pd_distribution(Params::parse("1/2", "1/2"), 1);
  CHECK(one.probs == std::vector<Rational>{Rational(1)});

  for (const Params& params : parameter_grid()) {
    for (int n = 1; n <= 6; ++n) {
      DistVector dist = restricted_pd_distribution(params, n);
      Rational total(0);
      for (const auto& p : dist.probs) {
        CHECK(p > Rational(0));
        total += p;
      }
      CHECK(total == Rational(1));
    }
  }
}

TEST_CASE("detailed balance holds exactly for the restricted law") {
  for (const Params& params : parameter_grid()) {
    for (int n = 2; n <= 5; ++n) {
      auto report =
          check_detailed_balance(build_generator(params, n), restricted_pd_distribution(params, n));
      CHECK(report.pairs_checked > 0);
      CHECK(report.max_violation == Rational(0));
      CHECK(report.violations.empty());
    }
  }
}

TEST_CASE("detailed balance audit detects imbalance") {
  Generator gen = build_generator(Params::parse("1/2", "1/2"), 2);
  DistVector uniform;
  uniform.n = 2;
  uniform.probs = {Rational(1, 2), Rational(1, 2)};
  auto report = check_detailed_balance(gen, uniform);
  CHECK(report.max_violation == Rational(1, 4));
  CHECK(report.violations.size() == 1);

  DistVector wrong_size;
  wrong_size.n = 3;
  wrong_size.probs = {Rational(1)};
  CHECK_THROWS_AS(check_detailed_balance(gen, wrong_size), std::invalid_argument);
}

TEST_CASE("exact stationary solve recovers the restricted law") {
  Generator two = build_generator(Params::parse("1/2", "1/2"), 2);
  CHECK(stationary_distribution(two).probs ==
        std::vector<Rational>{Rational(1, 3), Rational(2, 3)});

  Generator one = build_generator(Params::parse("1/2", "1/2"), 1);
  CHECK(stationary_distribution(one).probs == std::vector<Rational>{Rational(1)});

  for (const Params& params : parameter_grid()) {
    for (int n = 2; n <= 4; ++n) {
      DistVector solved = stationary_distribution(build_generator(params, n));
      DistVector expected = restricted_pd_distribution(params, n);
      CHECK(solved.probs == expected.probs);
    }
  }
}

TEST_CASE("float stationary solve agrees with the exact one") {
  Generator gen = build_generator(Params::parse("1/3", "1/4"), 4);
  EmpiricalDist solved = stationary_distribution_float(gen, 1e-12);
  EmpiricalDist exact =
      efc::to_empirical(restricted_pd_distribution(Params::parse("1/3", "1/4"), 4));
  CHECK(tv_distance(solved, exact) < 1e-10);
}

TEST_CASE("total variation distance") {
  EmpiricalDist a{1, {1.0, 0.0}};
  EmpiricalDist b{1, {0.0, 1.0}};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == 1.0);

  DistVector c{2, {Rational(1, 3), Rational(2, 3)}};
  DistVector d{2, {Rational(1, 2), Rational(1, 2)}};
  CHECK(tv_distance(c, d) == Rational(1, 6));
  CHECK(tv_distance(c, c) == Rational(0));

  DistVector mismatched{3, {Rational(1)}};
  CHECK_THROWS_AS(tv_distance(c, mismatched), std::invalid_argument);
}

TEST_CASE("marginals of the restricted law are consistent across n") {
  for (const Params& params : parameter_grid()) {
    for (int n = 2; n <= 6; ++n) {
      DistVector fine = restricted_pd_distribution(params, n);
      DistVector pushed = marginal_restriction(fine);
      DistVector coarse = restricted_pd_distribution(params, n - 1);
      CHECK(pushed.probs == coarse.probs);
      Rational total(0);
      for (const auto& p : pushed.probs) total += p;
      CHECK(total == Rational(1));
    }
  }
  DistVector one{1, {Rational(1)}};
  CHECK_THROWS_AS(marginal_restriction(one), std::domain_error);
}
