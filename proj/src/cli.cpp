#include "reservoir/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "reservoir/design_opt.hpp"
#include "reservoir/errors.hpp"
#include "reservoir/mc_sim.hpp"
#include "reservoir/moran.hpp"
#include "reservoir/prabhu.hpp"
#include "reservoir/report.hpp"

#ifndef RESERVOIR_VERSION
#define RESERVOIR_VERSION "dev"
#endif

namespace reservoir::cli {

namespace {

struct OutputOptions {
  std::string format = "csv";
  std::string path;
};

struct ModelOptions {
  double v = 0.0;
  int p = 0;
  double mu = 0.0;
  double m = 0.0;
};

struct DistOptions {
  ModelOptions model;
  std::size_t grid = 201;
};

struct SimulateOptions {
  ModelOptions model;
  std::uint64_t seed = 42;
  std::size_t samples = 1000000;
  std::size_t burn_in = 10000;
  std::size_t chains = 1;
  double threshold = 0.005;
};

struct OptimizeOptions {
  double v = 0.0;
  int p = 0;
  double mu = 0.0;
  std::string objective = "crossover";
  std::optional<double> lo;
  std::optional<double> hi;
};

struct MoranOptions {
  double rho = 0.0;
  std::size_t grid = 200;
  std::optional<double> z_max;
  bool simulate = false;
  double horizon = 2.0e5;
  double dt = 0.01;
  double burn_in = 100.0;
  std::size_t thin = 10;
  std::uint64_t seed = 42;
  std::size_t chains = 1;
  std::string scheme = "uniform";
  std::size_t bins = 100;
  double threshold = 0.01;
};

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", out.path, "Write the report to PATH instead of stdout");
}

void add_model_flags(CLI::App* cmd, ModelOptions& m, bool with_outflow) {
  cmd->add_option("--v", m.v, "Reservoir volume")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--p", m.p, "Gamma shape (positive integer)")
      ->required()
      ->check(CLI::Range(1, kMaxShape));
  cmd->add_option("--mu", m.mu, "Gamma rate")->required()->check(CLI::PositiveNumber);
  if (with_outflow) {
    cmd->add_option("--m", m.m, "Target outflow")->required()->check(CLI::PositiveNumber);
  }
}

Report::Json model_json(const ModelParams& params) {
  Report::Json j = Report::Json::object();
  j["v"] = params.v;
  j["p"] = params.p;
  j["mu"] = params.mu;
  j["m"] = params.m;
  return j;
}

void stamp(Report& report, const std::string& command) {
  report.params()["command"] = command;
  report.params()["tool_version"] = version();
}

void put_params(Report& report, const ModelParams& params) {
  const Report::Json model = model_json(params);
  for (const auto& [k, v] : model.items()) report.params()[k] = v;
}

void put_derived(Report& report, const DerivedParams& d) {
  report.derived()["n"] = d.n;
  report.derived()["delta"] = d.delta;
  report.derived()["lambda"] = d.lambda;
  report.derived()["kappa"] = d.kappa;
}

void put_distribution(Report& report, const StationaryDistribution& dist) {
  put_derived(report, dist.derived());
  const auto& wide = dist.alpha().alpha;
  report.results()["alpha"] = std::vector<double>(wide.begin(), wide.end());
  report.results()["spillage"] = dist.spillage_probability();
  report.results()["depletion"] = dist.depletion_probability();
  report.results()["condition"] = dist.alpha().condition;
  report.results()["residual"] = dist.alpha().residual;
}

int cmd_dist(const DistOptions& opt, Report& report) {
  const ModelParams params{opt.model.v, opt.model.p, opt.model.mu, opt.model.m};
  const StationaryDistribution dist = build_distribution(params);
  stamp(report, "dist");
  put_params(report, params);
  report.params()["grid"] = opt.grid;
  put_distribution(report, dist);

  const double v = params.v;
  const auto n = static_cast<double>(opt.grid);
  Series pdf{"pdf", {}};
  Series cdf{"cdf", {}};
  for (std::size_t i = 0; i < opt.grid; ++i) {
    const double zc = v * (static_cast<double>(i) + 0.5) / n;
    pdf.points.emplace_back(zc, dist.pdf(zc));
    const double z = i + 1 == opt.grid ? v : v * static_cast<double>(i) / (n - 1.0);
    cdf.points.emplace_back(z, dist.cdf(z));
  }
  report.add_series(std::move(pdf));
  report.add_series(std::move(cdf));
  return kOk;
}

int cmd_simulate(const SimulateOptions& opt, Report& report) {
  const ModelParams params{opt.model.v, opt.model.p, opt.model.mu, opt.model.m};
  const StationaryDistribution dist = build_distribution(params);
  SimConfig config;
  config.seed = opt.seed;
  config.samples = opt.samples;
  config.burn_in = opt.burn_in;
  config.chains = opt.chains;
  SimulationResult sim = run_chain(params, config);
  const double ks = compare(sim, dist);
  const bool pass = sim.total >= 1000 && ks < opt.threshold;

  stamp(report, "simulate");
  put_params(report, params);
  report.params()["seed"] = opt.seed;
  report.params()["samples"] = opt.samples;
  report.params()["burn_in"] = opt.burn_in;
  report.params()["chains"] = opt.chains;
  report.params()["threshold"] = opt.threshold;
  put_derived(report, dist.derived());
  auto& r = report.results();
  r["analytic_depletion"] = dist.depletion_probability();
  r["analytic_spillage"] = dist.spillage_probability();
  r["empirical_mass_at_zero"] = sim.empirical_mass_at_zero;
  r["empirical_mass_at_v"] = sim.empirical_mass_at_v;
  r["interior_fraction"] =
      static_cast<double>(sim.interior_samples.size()) / static_cast<double>(sim.total);
  r["ks_distance"] = ks;
  r["pass"] = pass;
  return pass ? kOk : kCheckFailed;
}

int cmd_optimize(const OptimizeOptions& opt, Report& report) {
  const Bracket bracket{opt.lo.value_or(0.05 * opt.v), opt.hi.value_or(0.95 * opt.v)};
  const OptimizationResult res = opt.objective == "sum"
                                     ? minimize_sum(opt.v, opt.p, opt.mu, bracket)
                                     : crossover_outflow(opt.v, opt.p, opt.mu, bracket);
  const StationaryDistribution dist =
      build_distribution(ModelParams{opt.v, opt.p, opt.mu, res.m_star});

  stamp(report, "optimize");
  report.params()["v"] = opt.v;
  report.params()["p"] = opt.p;
  report.params()["mu"] = opt.mu;
  report.params()["objective"] = opt.objective;
  report.params()["lo"] = bracket.lo;
  report.params()["hi"] = bracket.hi;
  put_derived(report, dist.derived());
  auto& r = report.results();
  r["m_star"] = res.m_star;
  r["objective_value"] = res.objective_value;
  r["evaluations"] = res.evaluations;
  r["bracket_lo"] = res.bracket.lo;
  r["bracket_hi"] = res.bracket.hi;
  r["spillage"] = dist.spillage_probability();
  r["depletion"] = dist.depletion_probability();
  return kOk;
}

int cmd_moran(const MoranOptions& opt, Report& report) {
  const moran::MoranModel model = moran::make_model(opt.rho);
  const double decay = moran::tail_decay_rate(opt.rho);
  const double z_max = opt.z_max.value_or(10.0 / std::abs(decay));
  if (!(z_max > 0.0)) throw DomainError("--z-max must be > 0");

  stamp(report, "moran");
  report.params()["rho"] = model.rho;
  report.params()["quad_upper"] = model.quad_upper;
  report.params()["quad_points"] = model.quad_points;
  report.params()["grid"] = opt.grid;
  report.params()["z_max"] = z_max;
  report.derived()["tail_decay_rate"] = decay;
  report.derived()["stationary_mean"] = moran::stationary_mean(opt.rho);

  const double total_mass = moran::numeric_laplace_transform(model, 0.0);
  auto& r = report.results();
  r["point_mass"] = moran::point_mass(model);
  r["normalization"] = total_mass;
  r["normalization_error"] = total_mass - 1.0;

  Series pdf{"pdf", {}};
  const auto n = static_cast<double>(opt.grid);
  for (std::size_t i = 0; i < opt.grid; ++i) {
    const double z = z_max * (static_cast<double>(i) + 0.5) / n;
    pdf.points.emplace_back(z, moran::daniels_pdf(model, z));
  }
  report.add_series(std::move(pdf));
  if (!opt.simulate) return kOk;

  moran::SimConfig config;
  config.horizon = opt.horizon;
  config.dt = opt.dt;
  config.burn_in = opt.burn_in;
  config.thin = opt.thin;
  config.seed = opt.seed;
  config.chains = opt.chains;
  config.scheme = opt.scheme == "lindley" ? moran::Scheme::lindley : moran::Scheme::uniform_arrival;
  const moran::Samples samples = moran::simulate_pooled(model, config);
  const moran::DanielsCdf cdf(model);
  const double ks = moran::ks_distance(samples, cdf);
  const bool pass = ks < opt.threshold;

  report.params()["horizon"] = opt.horizon;
  report.params()["dt"] = opt.dt;
  report.params()["burn_in"] = opt.burn_in;
  report.params()["thin"] = opt.thin;
  report.params()["seed"] = opt.seed;
  report.params()["chains"] = opt.chains;
  report.params()["scheme"] = opt.scheme;
  report.params()["bins"] = opt.bins;
  report.params()["threshold"] = opt.threshold;
  r["retained_samples"] = samples.total;
  r["empirical_mass_at_zero"] = samples.mass_at_zero();
  r["empirical_mean"] = samples.mean;
  r["ks_distance"] = ks;
  r["pass"] = pass;

  // Density of the continuous part, comparable with the pdf series.
  Series hist{"histogram", {}};
  const double width = z_max / static_cast<double>(opt.bins);
  std::vector<std::size_t> counts(opt.bins, 0);
  for (double z : samples.positive) {
    if (z >= z_max) break;
    ++counts[std::min(opt.bins - 1, static_cast<std::size_t>(z / width))];
  }
  for (std::size_t b = 0; b < opt.bins; ++b) {
    hist.points.emplace_back((static_cast<double>(b) + 0.5) * width,
                             static_cast<double>(counts[b]) /
                                 (static_cast<double>(samples.total) * width));
  }
  report.add_series(std::move(hist));
  return pass ? kOk : kCheckFailed;
}

}  // namespace

std::string version() { return RESERVOIR_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary storage-level distributions for finite reservoirs", "reservoir_calc"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  OutputOptions output;

  DistOptions dist_opt;
  CLI::App* dist = app.add_subcommand("dist", "Exact stationary distribution and density series");
  add_model_flags(dist, dist_opt.model, true);
  dist->add_option("--grid", dist_opt.grid, "Points per series")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  add_output_flags(dist, output);

  SimulateOptions sim_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check against the exact law");
  add_model_flags(simulate, sim_opt.model, true);
  simulate->add_option("--seed", sim_opt.seed, "Master RNG seed")->capture_default_str();
  simulate->add_option("--samples", sim_opt.samples, "Retained steps per chain")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--burn-in", sim_opt.burn_in, "Discarded steps per chain")
      ->capture_default_str();
  simulate->add_option("--chains", sim_opt.chains, "Independent chains")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--threshold", sim_opt.threshold, "KS pass threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_output_flags(simulate, output);

  OptimizeOptions opt_opt;
  CLI::App* optimize = app.add_subcommand("optimize", "Choose the target outflow m");
  ModelOptions opt_model;
  add_model_flags(optimize, opt_model, false);
  optimize->add_option("--objective", opt_opt.objective, "crossover or sum")
      ->check(CLI::IsMember({"crossover", "sum"}))
      ->capture_default_str();
  optimize->add_option("--lo", opt_opt.lo, "Bracket lower end (default 0.05 v)");
  optimize->add_option("--hi", opt_opt.hi, "Bracket upper end (default 0.95 v)");
  add_output_flags(optimize, output);

  MoranOptions moran_opt;
  CLI::App* moran_cmd = app.add_subcommand("moran", "Continuous-time Moran model (experimental)");
  moran_cmd->add_option("--rho", moran_opt.rho, "Inflow rate, 0 < rho < 1")->required();
  moran_cmd->add_option("--grid", moran_opt.grid, "Points in the density series")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}))
      ->capture_default_str();
  moran_cmd->add_option("--z-max", moran_opt.z_max, "Upper end of the density series");
  moran_cmd->add_flag("--simulate", moran_opt.simulate, "Also simulate and compare");
  moran_cmd->add_option("--horizon", moran_opt.horizon, "Simulated time per chain")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  moran_cmd->add_option("--dt", moran_opt.dt, "Time step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  moran_cmd->add_option("--burn-in", moran_opt.burn_in, "Discarded simulated time")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  moran_cmd->add_option("--thin", moran_opt.thin, "Retain every k-th step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  moran_cmd->add_option("--seed", moran_opt.seed, "Master RNG seed")->capture_default_str();
  moran_cmd->add_option("--chains", moran_opt.chains, "Independent chains")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  moran_cmd->add_option("--scheme", moran_opt.scheme, "uniform or lindley step")
      ->check(CLI::IsMember({"uniform", "lindley"}))
      ->capture_default_str();
  moran_cmd->add_option("--bins", moran_opt.bins, "Histogram bins")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}))
      ->capture_default_str();
  moran_cmd->add_option("--threshold", moran_opt.threshold, "KS pass threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_output_flags(moran_cmd, output);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Report report;
  int code = kOk;
  try {
    if (app.got_subcommand(dist)) {
      code = cmd_dist(dist_opt, report);
    } else if (app.got_subcommand(simulate)) {
      code = cmd_simulate(sim_opt, report);
    } else if (app.got_subcommand(optimize)) {
      opt_opt.v = opt_model.v;
      opt_opt.p = opt_model.p;
      opt_opt.mu = opt_model.mu;
      code = cmd_optimize(opt_opt, report);
    } else {
      code = cmd_moran(moran_opt, report);
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BracketError& e) {
    err << "error: " << e.what() << "\nhint: pass a wider --lo/--hi bracket\n";
    return kBracket;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }

  const Format format = output.format == "json" ? Format::json : Format::csv;
  if (output.path.empty()) {
    report.write(out, format);
  } else {
    std::ofstream file(output.path, std::ios::binary);
    if (!file) {
      err << "error: cannot open " << output.path << " for writing\n";
      return kUsage;
    }
    report.write(file, format);
  }
  return code;
}

}  // namespace reservoir::cli
