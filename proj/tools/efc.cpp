// Command-line surface: exact verification, rate tables, sampling and
// simulation with machine-readable outputs.
//
// Exit codes: 0 success, 1 usage/domain error, 2 verification failure
// (a nonzero detailed-balance violation on the exact path).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "efc/chain.hpp"
#include "efc/eppf.hpp"
#include "efc/partition.hpp"
#include "efc/rates.hpp"
#include "efc/rational.hpp"
#include "efc/sampling.hpp"
#include "efc/simulate.hpp"

using nlohmann::json;

namespace {

// Documented default seed; every command is reproducible from (config, seed).
constexpr std::uint64_t kDefaultSeed = 1729;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerificationFailure = 2;

std::string resolve_output_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("EFC_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::string full(dir);
  if (full.back() != '/') full += '/';
  return full + path;
}

// Writes to --out (under EFC_OUTPUT_DIR when relative) or to stdout.
void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::string resolved = resolve_output_path(out_path);
  std::ofstream file(resolved, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file: " + resolved);
  file << content;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::vector<int> parse_shape(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    size_t pos = 0;
    int value = std::stoi(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("bad shape entry: " + token);
    sizes.push_back(value);
  }
  if (sizes.empty()) throw std::invalid_argument("empty shape");
  return sizes;
}

std::vector<efc::Rational> parse_rational_list(const std::string& text) {
  std::vector<efc::Rational> values;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) values.push_back(efc::Rational::parse(token));
  if (values.empty()) throw std::invalid_argument("empty list");
  return values;
}

json partition_record(std::size_t replica, const efc::SetPartition& partition) {
  json record;
  record["replica"] = replica;
  record["partition"] = partition.str();
  record["shape"] = efc::shape_of(partition).sizes();
  return record;
}

json sticks_record(std::size_t replica, const std::vector<double>& sticks) {
  double sum = 0.0;
  for (double s : sticks) sum += s;
  json record;
  record["replica"] = replica;
  record["sticks"] = sticks;
  record["dust"] = sum < 1.0 ? 1.0 - sum : 0.0;
  return record;
}

struct SampleConfig {
  std::string kind;
  std::string alpha = "1/2";
  std::string theta = "1/2";
  std::string masses;  // explicit paint-box masses, "p/q,p/q,..."
  int n = 5;
  std::size_t replicas = 100;
  std::uint64_t seed = kDefaultSeed;
  std::size_t trunc = 10000;
  double dust_eps = 1e-12;
  std::string out;
};

int run_sample(const SampleConfig& config) {
  std::ostringstream lines;
  efc::Truncation trunc{config.trunc, config.dust_eps};
  for (std::size_t r = 0; r < config.replicas; ++r) {
    efc::Rng rng = efc::Rng::substream(config.seed, r);
    json record;
    if (config.kind == "gem") {
      record = sticks_record(r, efc::gem_sample(efc::Rational::parse(config.theta).to_double(),
                                                rng, trunc));
    } else if (config.kind == "pd") {
      efc::Params params = efc::Params::parse(config.alpha, config.theta);
      record = sticks_record(
          r, efc::pd_stick_sample(params.alpha().to_double(), params.theta().to_double(), rng,
                                  trunc));
    } else if (config.kind == "crp") {
      efc::Params params = efc::Params::parse(config.alpha, config.theta);
      record = partition_record(r, efc::crp_sample(params, config.n, rng));
    } else if (config.kind == "paintbox") {
      efc::MassPartition box = [&] {
        if (!config.masses.empty()) {
          // Explicit masses must sum to exactly 1.
          auto values = parse_rational_list(config.masses);
          efc::Rational sum(0);
          for (const auto& v : values) sum += v;
          if (sum != efc::Rational(1))
            throw std::invalid_argument("paint-box masses must sum to 1");
          std::vector<double> parts;
          parts.reserve(values.size());
          for (const auto& v : values) parts.push_back(v.to_double());
          std::sort(parts.begin(), parts.end(), std::greater<double>());
          return efc::MassPartition::proper_from_parts(std::move(parts));
        }
        // Otherwise draw sticks, rank, and renormalize the truncated parts so
        // the paint-box sees a proper mass partition.
        efc::Params params = efc::Params::parse(config.alpha, config.theta);
        auto sticks = efc::pd_stick_sample(params.alpha().to_double(),
                                           params.theta().to_double(), rng, trunc);
        double sum = 0.0;
        for (double s : sticks) sum += s;
        for (double& s : sticks) s /= sum;
        std::sort(sticks.begin(), sticks.end(), std::greater<double>());
        return efc::MassPartition::proper_from_parts(std::move(sticks));
      }();
      record = partition_record(r, efc::paintbox_sample(box, config.n, rng));
    } else {
      throw std::invalid_argument("unknown sample kind: " + config.kind);
    }
    lines << record.dump() << "\n";
  }
  emit(config.out, lines.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fragmentation-coalescence chains reversible under Poisson-Dirichlet laws: "
               "exact verification, rate tables, samplers and simulation"};
  app.require_subcommand(1);

  // ---- eppf ----------------------------------------------------------------
  struct {
    std::string alpha, theta, shape, out;
  } eppf_cfg;
  auto* eppf_cmd = app.add_subcommand("eppf", "Evaluate the sampling-formula EPPF for one shape");
  eppf_cmd->add_option("--alpha", eppf_cfg.alpha, "alpha as p/q")->required();
  eppf_cmd->add_option("--theta", eppf_cfg.theta, "theta as p/q")->required();
  eppf_cmd->add_option("--shape", eppf_cfg.shape, "block sizes n1,n2,...")->required();
  eppf_cmd->add_option("--out", eppf_cfg.out, "output file (default stdout)");

  // ---- rates ---------------------------------------------------------------
  struct {
    std::string alpha, theta, out;
    int n = 5;
  } rates_cfg;
  auto* rates_cmd = app.add_subcommand("rates", "Dump the rate table for P_[n] as CSV");
  rates_cmd->add_option("--alpha", rates_cfg.alpha, "alpha as p/q")->required();
  rates_cmd->add_option("--theta", rates_cfg.theta, "theta as p/q")->required();
  rates_cmd->add_option("--n", rates_cfg.n, "ground-set size")->required();
  rates_cmd->add_option("--out", rates_cfg.out, "output file (default stdout)");

  // ---- verify-db -----------------------------------------------------------
  struct {
    std::string alpha, theta, out;
    int n = 4;
  } verify_cfg;
  auto* verify_cmd = app.add_subcommand(
      "verify-db", "Audit detailed balance of the restricted chain exactly (exit 2 on violation)");
  verify_cmd->add_option("--alpha", verify_cfg.alpha, "alpha as p/q")->required();
  verify_cmd->add_option("--theta", verify_cfg.theta, "theta as p/q")->required();
  verify_cmd->add_option("--n", verify_cfg.n, "ground-set size")->required();
  verify_cmd->add_option("--out", verify_cfg.out, "output file (default stdout)");

  // ---- stationary ----------------------------------------------------------
  struct {
    std::string alpha, theta, out;
    int n = 4;
    int exact_max = 7;
  } stationary_cfg;
  auto* stationary_cmd = app.add_subcommand(
      "stationary", "Solve pi Q = 0 and report the distance to the restricted law");
  stationary_cmd->add_option("--alpha", stationary_cfg.alpha, "alpha as p/q")->required();
  stationary_cmd->add_option("--theta", stationary_cfg.theta, "theta as p/q")->required();
  stationary_cmd->add_option("--n", stationary_cfg.n, "ground-set size")->required();
  stationary_cmd->add_option("--exact-max", stationary_cfg.exact_max,
                             "largest n solved exactly (float solve beyond)");
  stationary_cmd->add_option("--out", stationary_cfg.out, "output file (default stdout)");

  // ---- sample --------------------------------------------------------------
  SampleConfig sample_cfg;
  auto* sample_cmd =
      app.add_subcommand("sample", "Draw replicas from gem|pd|crp|paintbox as JSON lines");
  sample_cmd->add_option("kind", sample_cfg.kind, "gem|pd|crp|paintbox")->required();
  sample_cmd->add_option("--alpha", sample_cfg.alpha, "alpha as p/q");
  sample_cmd->add_option("--theta", sample_cfg.theta, "theta as p/q");
  sample_cmd->add_option("--n", sample_cfg.n, "partition size for crp/paintbox");
  sample_cmd->add_option("--replicas", sample_cfg.replicas, "number of replicas");
  sample_cmd->add_option("--seed", sample_cfg.seed, "master seed");
  sample_cmd->add_option("--trunc", sample_cfg.trunc, "maximum stick count");
  sample_cmd->add_option("--dust-eps", sample_cfg.dust_eps, "stop sticks below this dust");
  sample_cmd->add_option("--x", sample_cfg.masses,
                         "explicit paint-box masses p/q,p/q,... (must sum to 1)");
  sample_cmd->add_option("--out", sample_cfg.out, "output file (default stdout)");

  // ---- simulate ------------------------------------------------------------
  struct {
    std::string alpha, theta, out;
    int n = 4;
    double t_end = 10.0;
    int grid = 8;
    std::size_t replicas = 20000;
    std::uint64_t seed = kDefaultSeed;
  } simulate_cfg;
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "Estimate the distance to equilibrium on a geometric time grid (CSV)");
  simulate_cmd->add_option("--alpha", simulate_cfg.alpha, "alpha as p/q")->required();
  simulate_cmd->add_option("--theta", simulate_cfg.theta, "theta as p/q")->required();
  simulate_cmd->add_option("--n", simulate_cfg.n, "ground-set size")->required();
  simulate_cmd->add_option("--t-end", simulate_cfg.t_end, "final time");
  simulate_cmd->add_option("--grid", simulate_cfg.grid, "number of grid points (incl. t = 0)");
  simulate_cmd->add_option("--replicas", simulate_cfg.replicas, "independent replicas");
  simulate_cmd->add_option("--seed", simulate_cfg.seed, "master seed");
  simulate_cmd->add_option("--out", simulate_cfg.out, "output file (default stdout)");

  // ---- split-merge ---------------------------------------------------------
  struct {
    std::size_t steps = 1100000;
    std::size_t burn_in = 100000;
    std::size_t thin = 10;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
  } sm_cfg;
  auto* sm_cmd = app.add_subcommand(
      "split-merge", "Long-run functionals of the discrete split-and-merge chain (JSON)");
  sm_cmd->add_option("--steps", sm_cfg.steps, "total steps");
  sm_cmd->add_option("--burn-in", sm_cfg.burn_in, "discarded prefix");
  sm_cmd->add_option("--thin", sm_cfg.thin, "record every thin-th step");
  sm_cmd->add_option("--seed", sm_cfg.seed, "seed");
  sm_cmd->add_option("--out", sm_cfg.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (eppf_cmd->parsed()) {
      efc::Params params = efc::Params::parse(eppf_cfg.alpha, eppf_cfg.theta);
      efc::PartitionShape shape(parse_shape(eppf_cfg.shape));
      efc::Rational value = efc::pd_eppf(params, shape);
      json out;
      out["alpha"] = params.alpha().str();
      out["theta"] = params.theta().str();
      out["shape"] = shape.sizes();
      out["eppf"] = value.str();
      out["eppf_float"] = value.to_double();
      emit(eppf_cfg.out, out.dump(2) + "\n");
      return kExitOk;
    }

    if (rates_cmd->parsed()) {
      efc::Params params = efc::Params::parse(rates_cfg.alpha, rates_cfg.theta);
      efc::RateTable table = efc::build_rate_table(params, rates_cfg.n);
      std::ostringstream csv;
      csv << "kind,args,rate_exact,rate_float\n";
      for (const auto& [key, rate] : table.coag_entries())
        csv << "coag,l=" << key.first << ";k=" << key.second << "," << rate.str() << ","
            << format_double(rate.to_double()) << "\n";
      for (const auto& [shape, rate] : table.split_entries()) {
        csv << "split,";
        const auto& sizes = shape.sizes();
        for (std::size_t i = 0; i < sizes.size(); ++i) csv << (i ? "+" : "") << sizes[i];
        csv << "," << rate.str() << "," << format_double(rate.to_double()) << "\n";
      }
      for (int k = 1; k <= rates_cfg.n; ++k) {
        const efc::Rational& total = table.split_total(k);
        csv << "split_total,k=" << k << "," << total.str() << ","
            << format_double(total.to_double()) << "\n";
      }
      emit(rates_cfg.out, csv.str());
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      efc::Params params = efc::Params::parse(verify_cfg.alpha, verify_cfg.theta);
      efc::Generator gen = efc::build_generator(params, verify_cfg.n);
      efc::DistVector rho = efc::restricted_pd_distribution(params, verify_cfg.n);
      efc::BalanceReport report = efc::check_detailed_balance(gen, rho);
      json out;
      out["n"] = verify_cfg.n;
      out["alpha"] = params.alpha().str();
      out["theta"] = params.theta().str();
      out["pairs_checked"] = report.pairs_checked;
      out["max_violation"] = report.max_violation.str();
      out["exact"] = true;
      emit(verify_cfg.out, out.dump(2) + "\n");
      return report.max_violation.is_zero() ? kExitOk : kExitVerificationFailure;
    }

    if (stationary_cmd->parsed()) {
      efc::Params params = efc::Params::parse(stationary_cfg.alpha, stationary_cfg.theta);
      efc::Generator gen = efc::build_generator(params, stationary_cfg.n);
      efc::DistVector rho = efc::restricted_pd_distribution(params, stationary_cfg.n);
      json out;
      out["n"] = stationary_cfg.n;
      out["alpha"] = params.alpha().str();
      out["theta"] = params.theta().str();
      if (stationary_cfg.n <= stationary_cfg.exact_max) {
        efc::DistVector pi = efc::stationary_distribution(gen);
        efc::Rational tv = efc::tv_distance(pi, rho);
        out["exact"] = true;
        out["tv_to_pd"] = tv.to_double();
        out["tv_to_pd_exact"] = tv.str();
      } else {
        efc::EmpiricalDist pi = efc::stationary_distribution_float(gen);
        out["exact"] = false;
        out["tv_to_pd"] = efc::tv_distance(pi, efc::to_empirical(rho));
        out["residual_tol"] = 1e-10;
      }
      emit(stationary_cfg.out, out.dump(2) + "\n");
      return kExitOk;
    }

    if (sample_cmd->parsed()) return run_sample(sample_cfg);

    if (simulate_cmd->parsed()) {
      efc::Params params = efc::Params::parse(simulate_cfg.alpha, simulate_cfg.theta);
      if (simulate_cfg.grid < 2) throw std::invalid_argument("need at least two grid points");
      if (!(simulate_cfg.t_end > 0.0)) throw std::invalid_argument("t-end must be positive");
      // Geometric grid: 0, t_end / 2^(grid-2), ..., t_end.
      std::vector<double> grid = {0.0};
      for (int i = simulate_cfg.grid - 2; i >= 0; --i)
        grid.push_back(simulate_cfg.t_end / std::pow(2.0, i));
      auto curve = efc::equilibrium_experiment(params, simulate_cfg.n, grid, simulate_cfg.replicas,
                                               efc::SetPartition::single_block(simulate_cfg.n),
                                               simulate_cfg.seed);
      std::ostringstream csv;
      csv << "t,tv,se\n";
      for (const auto& point : curve)
        csv << format_double(point.t) << "," << format_double(point.tv) << ","
            << format_double(point.se) << "\n";
      emit(simulate_cfg.out, csv.str());
      return kExitOk;
    }

    if (sm_cmd->parsed()) {
      efc::Rng rng(sm_cfg.seed);
      efc::SplitMergeSummary summary =
          efc::split_merge_experiment(sm_cfg.steps, sm_cfg.burn_in, sm_cfg.thin, rng);
      json out;
      out["steps"] = sm_cfg.steps;
      out["burn_in"] = sm_cfg.burn_in;
      out["thin"] = sm_cfg.thin;
      out["seed"] = sm_cfg.seed;
      out["samples"] = summary.samples;
      out["p_top_above_half"] = {{"value", summary.top_above_half.value},
                                 {"std_error", summary.top_above_half.std_error}};
      out["mean_top"] = {{"value", summary.mean_top.value},
                         {"std_error", summary.mean_top.std_error}};
      out["mean_sum_squares"] = {{"value", summary.mean_sum_squares.value},
                                 {"std_error", summary.mean_sum_squares.std_error}};
      emit(sm_cfg.out, out.dump(2) + "\n");
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
