#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "circspat/commands.hpp"
#include "circspat/errors.hpp"

namespace {

using namespace circspat;

io::CoordFormat parse_coord_format(const std::string& s) {
  return s == "utm_m" ? io::CoordFormat::kUtmMetres
                      : io::CoordFormat::kLonLatDegrees;
}

io::DirectionUnit parse_direction_unit(const std::string& s) {
  return s == "deg" ? io::DirectionUnit::kDegrees
                    : io::DirectionUnit::kRadians;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian spatial modelling of directional data"};
  app.require_subcommand(1);

  int exit_code = 0;

  // describe: circular summary statistics and an optional rose histogram.
  auto* describe = app.add_subcommand(
      "describe", "Summarise the directions in a site CSV");
  cmd::DescribeOptions d_opt;
  std::string d_coord = "utm_m", d_unit = "deg";
  std::string d_summary, d_rose;
  describe->add_option("--data", d_opt.data, "site CSV")
      ->required()
      ->check(CLI::ExistingFile);
  describe->add_option("--coord-format", d_coord, "utm_m | lonlat_deg")
      ->check(CLI::IsMember({"utm_m", "lonlat_deg"}));
  describe->add_option("--direction-unit", d_unit, "deg | rad")
      ->check(CLI::IsMember({"deg", "rad"}));
  describe->add_option("--rose-bins", d_opt.rose_bins, "sector count")
      ->check(CLI::PositiveNumber);
  describe->add_option("--summary-out", d_summary, "write a one-row CSV");
  describe->add_option("--rose-out", d_rose, "write per-sector counts");
  describe->callback([&] {
    d_opt.coord_format = parse_coord_format(d_coord);
    d_opt.direction_unit = parse_direction_unit(d_unit);
    if (!d_summary.empty()) d_opt.summary_out = d_summary;
    if (!d_rose.empty()) d_opt.rose_out = d_rose;
    exit_code = cmd::describe(d_opt, std::cout);
  });

  // simulate: draw a synthetic data set from either model.
  auto* simulate = app.add_subcommand(
      "simulate", "Simulate directional data on random sites");
  cmd::SimulateOptions s_opt;
  std::string s_truth;
  double s_mu = 0.0;
  simulate->add_option("--model", s_opt.model, "wrapped | projected")
      ->check(CLI::IsMember({"wrapped", "projected"}));
  simulate->add_option("--n-sites", s_opt.n_sites, "number of sites")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--box-km", s_opt.box_km, "side of the square domain")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", s_opt.seed, "RNG seed");
  simulate->add_option("--out", s_opt.out, "output site CSV")->required();
  simulate->add_option("--truth-out", s_truth, "JSON with params and latent");
  simulate->add_option("--mu", s_mu, "wrapped: mean direction (radians)");
  simulate->add_option("--sigma2", s_opt.wgsp.sigma2, "wrapped: variance");
  simulate->add_option("--mu1", s_opt.pgsp.mu(0), "projected: mean, first");
  simulate->add_option("--mu2", s_opt.pgsp.mu(1), "projected: mean, second");
  simulate->add_option("--tau2", s_opt.pgsp.tau2, "projected: variance");
  simulate->add_option("--rho", s_opt.pgsp.rho, "projected: correlation");
  simulate->add_option("--phi", s_opt.wgsp.phi, "spatial decay rate");
  simulate->callback([&] {
    s_opt.wgsp.mu = wrap(s_mu);
    s_opt.pgsp.phi = s_opt.wgsp.phi;
    if (!s_truth.empty()) s_opt.truth_out = s_truth;
    exit_code = cmd::simulate(s_opt, std::cout);
  });

  // fit: run the sampler described by a config file.
  auto* fit = app.add_subcommand("fit", "Fit a model and write an archive");
  cmd::FitOptions f_opt;
  fit->add_option("--config", f_opt.config, "key = value run config")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--out", f_opt.archive_out, "archive directory")
      ->required();
  fit->callback([&] { exit_code = cmd::fit(f_opt, std::cout); });

  // krig: posterior-predictive directions at new locations.
  auto* krig = app.add_subcommand(
      "krig", "Predict directions at unobserved sites from an archive");
  cmd::KrigOptions k_opt;
  std::string k_data, k_draws;
  std::uint64_t k_seed = 0;
  krig->add_option("--archive", k_opt.archive, "fitted archive directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  krig->add_option("--targets", k_opt.targets, "target CSV")
      ->required()
      ->check(CLI::ExistingFile);
  krig->add_option("--data", k_data, "training CSV, if it moved");
  auto* k_seed_opt =
      krig->add_option("--seed", k_seed, "predictive RNG seed");
  krig->add_option("--out", k_opt.out, "predictions CSV")->required();
  krig->add_option("--draws-out", k_draws, "per-draw predictive directions");
  krig->callback([&] {
    if (!k_data.empty()) k_opt.data_override = k_data;
    if (k_seed_opt->count() > 0) k_opt.seed = k_seed;
    if (!k_draws.empty()) k_opt.draws_out = k_draws;
    exit_code = cmd::krig(k_opt, std::cout);
  });

  // eval: hold out sites, refit, score the predictions.
  auto* eval = app.add_subcommand(
      "eval", "Holdout evaluation: fit on a subset, score the rest");
  cmd::EvalOptions e_opt;
  eval->add_option("--config", e_opt.config, "key = value run config")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--n-valid", e_opt.n_valid, "held-out site count")
      ->check(CLI::PositiveNumber);
  eval->add_option("--split-seed", e_opt.split_seed, "holdout split seed");
  eval->add_option("--out", e_opt.out, "per-site score CSV")->required();
  eval->callback([&] { exit_code = cmd::eval(e_opt, std::cout); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
