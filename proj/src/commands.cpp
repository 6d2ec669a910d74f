#include "circspat/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "circspat/circular.hpp"
#include "circspat/errors.hpp"
#include "circspat/evaluation.hpp"
#include "circspat/kriging.hpp"
#include "circspat/rng.hpp"

namespace circspat::cmd {

namespace {

using io::format_full;
using io::format_sig6;

// Offset applied to the training seed so predictive draws never reuse the
// random stream the sampler consumed.
constexpr std::uint64_t kKrigSeedOffset = 1000003;

std::vector<Coord> random_box_sites(int n_sites, double box_km, Rng& rng) {
  if (n_sites <= 0) throw InvalidArgument("simulate: n_sites must be > 0");
  if (!(box_km > 0.0)) throw InvalidArgument("simulate: box_km must be > 0");
  std::vector<Coord> coords(static_cast<std::size_t>(n_sites));
  for (Coord& c : coords) {
    c = Coord{rng.uniform() * box_km, rng.uniform() * box_km};
  }
  return coords;
}

std::string sites_csv(const SiteTable& table) {
  std::ostringstream out;
  out << "site_id,x,y,direction\n";
  for (const Site& s : table) {
    out << s.id << "," << format_full(s.pos.x_km * 1000.0) << ","
        << format_full(s.pos.y_km * 1000.0) << ","
        << format_full(s.direction.radians()) << "\n";
  }
  return out.str();
}

io::PosteriorArchive make_archive(const io::RunConfig& cfg,
                                  const SiteTable& data,
                                  std::vector<ChainOutput> chains,
                                  std::vector<std::pair<std::string, double>>
                                      psrf,
                                  bool converged) {
  io::PosteriorArchive archive;
  archive.model = cfg.model;
  archive.config = cfg.to_key_values();
  for (const Site& s : data) archive.site_ids.push_back(s.id);
  archive.chains = std::move(chains);
  archive.psrf = std::move(psrf);
  archive.converged = converged;
  return archive;
}

WgspPosterior wgsp_from_archive(const io::PosteriorArchive& archive) {
  WgspPosterior post;
  post.chains = archive.chains;
  post.n_sites = static_cast<Eigen::Index>(archive.site_ids.size());
  post.psrf_by_param = archive.psrf;
  post.converged = archive.converged;
  return post;
}

PgspPosterior pgsp_from_archive(const io::PosteriorArchive& archive) {
  PgspPosterior post;
  post.chains = archive.chains;
  post.n_sites = static_cast<Eigen::Index>(archive.site_ids.size());
  post.psrf_by_param = archive.psrf;
  post.converged = archive.converged;
  return post;
}

void print_fit_report(std::ostream& out, const std::string& model,
                      std::size_t n_sites, const ChainConfig& chain_cfg,
                      const std::vector<ChainOutput>& chains,
                      const std::vector<std::pair<std::string, double>>& psrf,
                      bool converged) {
  out << "model       " << model << "\n";
  out << "sites       " << n_sites << "\n";
  out << "retained    " << chain_cfg.retained_per_chain() << " draws x "
      << chains.size() << " chain" << (chains.size() == 1 ? "" : "s") << "\n";
  if (psrf.empty()) {
    out << "psrf        (single chain; not computed)\n";
  } else {
    out << "psrf       ";
    for (const auto& [name, value] : psrf) {
      out << " " << name << "=" << format_sig6(value);
    }
    out << "\n";
  }
  for (std::size_t c = 0; c < chains.size(); ++c) {
    // Per-site latent rates (r[i]) would swamp the report; show their mean.
    double r_sum = 0.0;
    std::size_t r_count = 0;
    out << "accept[" << c << "]  ";
    for (const auto& [name, rate] : chains[c].acceptance_rates) {
      if (name.size() > 2 && name.compare(0, 2, "r[") == 0) {
        r_sum += rate;
        ++r_count;
      } else {
        out << " " << name << "=" << format_sig6(rate);
      }
    }
    if (r_count > 0) {
      out << " r(mean)=" << format_sig6(r_sum / static_cast<double>(r_count));
    }
    out << "\n";
  }
  out << "converged   " << (converged ? "yes" : "no") << "\n";
}

struct FittedModel {
  io::PosteriorArchive archive;
  // Exactly one of these is populated, matching archive.model.
  std::optional<WgspPosterior> wgsp;
  std::optional<PgspPosterior> pgsp;
};

FittedModel fit_model(const io::RunConfig& cfg, const SiteTable& data,
                      std::ostream& out) {
  FittedModel fitted;
  if (cfg.model == "wrapped") {
    WgspPosterior post = fit_wgsp(data, cfg.wgsp, cfg.chain);
    fitted.archive = make_archive(cfg, data, post.chains, post.psrf_by_param,
                                  post.converged);
    print_fit_report(out, cfg.model, data.size(), cfg.chain, post.chains,
                     post.psrf_by_param, post.converged);
    fitted.wgsp = std::move(post);
  } else {
    PgspPosterior post = fit_pgsp(data, cfg.pgsp, cfg.chain);
    fitted.archive = make_archive(cfg, data, post.chains, post.psrf_by_param,
                                  post.converged);
    print_fit_report(out, cfg.model, data.size(), cfg.chain, post.chains,
                     post.psrf_by_param, post.converged);
    fitted.pgsp = std::move(post);
  }
  return fitted;
}

std::string predictions_csv(const std::vector<KrigResult>& results) {
  std::ostringstream out;
  out << "target_id,direction_rad,direction_deg,concentration\n";
  for (const KrigResult& r : results) {
    out << r.target_id << "," << format_sig6(r.direction.radians()) << ","
        << format_sig6(r.direction.degrees()) << ","
        << format_sig6(r.concentration) << "\n";
  }
  return out.str();
}

std::string draws_csv(const std::vector<KrigResult>& results) {
  std::ostringstream out;
  out << "target_id,draw,direction_rad\n";
  for (const KrigResult& r : results) {
    for (std::size_t b = 0; b < r.draws.size(); ++b) {
      out << r.target_id << "," << b << ","
          << format_full(r.draws[b].radians()) << "\n";
    }
  }
  return out.str();
}

}  // namespace

int describe(const DescribeOptions& opt, std::ostream& out) {
  const SiteTable data =
      io::read_sites(opt.data, opt.coord_format, opt.direction_unit);
  const std::vector<Angle> dirs = data.directions();
  const CircularSummary s = summarize(dirs);

  out << "n                 " << s.n << "\n";
  out << "mean_direction    " << format_sig6(s.mean_direction.radians())
      << "\n";
  out << "median_direction  " << format_sig6(s.median_direction.radians())
      << "\n";
  out << "variance          " << format_sig6(s.variance) << "\n";
  out << "std_dev           " << format_sig6(s.std_dev) << "\n";
  out << "resultant_length  " << format_sig6(s.resultant_length) << "\n";

  if (opt.summary_out) {
    std::ostringstream csv;
    csv << "n,mean_direction,median_direction,resultant_length,variance,"
           "std_dev\n";
    csv << s.n << "," << format_full(s.mean_direction.radians()) << ","
        << format_full(s.median_direction.radians()) << ","
        << format_full(s.resultant_length) << "," << format_full(s.variance)
        << "," << format_full(s.std_dev) << "\n";
    io::write_file_atomic(*opt.summary_out, csv.str());
    out << "wrote             " << opt.summary_out->string() << "\n";
  }
  if (opt.rose_out) {
    const std::vector<RoseBin> bins = rose_histogram(dirs, opt.rose_bins);
    const double width = kTwoPi / static_cast<double>(opt.rose_bins);
    std::ostringstream csv;
    csv << "bin_start_rad,bin_end_rad,count\n";
    for (const RoseBin& b : bins) {
      csv << format_full(b.start.radians()) << ","
          << format_full(b.start.radians() + width) << "," << b.count << "\n";
    }
    io::write_file_atomic(*opt.rose_out, csv.str());
    out << "wrote             " << opt.rose_out->string() << "\n";
  }
  return 0;
}

int simulate(const SimulateOptions& opt, std::ostream& out) {
  if (opt.model != "wrapped" && opt.model != "projected") {
    throw InvalidArgument("simulate: model must be 'wrapped' or 'projected'");
  }
  Rng rng(opt.seed);
  const std::vector<Coord> coords =
      random_box_sites(opt.n_sites, opt.box_km, rng);

  nlohmann::ordered_json truth;
  truth["model"] = opt.model;
  truth["seed"] = opt.seed;
  truth["n_sites"] = opt.n_sites;
  truth["box_km"] = opt.box_km;

  std::string csv;
  if (opt.model == "wrapped") {
    const WgspSimulation sim = simulate_wgsp(coords, opt.wgsp, rng);
    csv = sites_csv(sim.table);
    truth["params"] = {{"mu", opt.wgsp.mu.radians()},
                       {"sigma2", opt.wgsp.sigma2},
                       {"phi", opt.wgsp.phi}};
    std::vector<double> latent(sim.latent.data(),
                               sim.latent.data() + sim.latent.size());
    truth["latent"] = latent;
  } else {
    opt.pgsp.validate();
    const PgspSimulation sim = simulate_pgsp(coords, opt.pgsp, rng);
    csv = sites_csv(sim.table);
    truth["params"] = {{"mu1", opt.pgsp.mu(0)},
                       {"mu2", opt.pgsp.mu(1)},
                       {"tau2", opt.pgsp.tau2},
                       {"rho", opt.pgsp.rho},
                       {"phi", opt.pgsp.phi}};
    nlohmann::ordered_json latent = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < sim.latent.rows(); ++i) {
      latent.push_back({sim.latent(i, 0), sim.latent(i, 1)});
    }
    truth["latent"] = std::move(latent);
  }

  io::write_file_atomic(opt.out, csv);
  out << "model   " << opt.model << "\n";
  out << "sites   " << opt.n_sites << "\n";
  out << "wrote   " << opt.out.string() << "\n";
  if (opt.truth_out) {
    io::write_file_atomic(*opt.truth_out, truth.dump(2) + "\n");
    out << "wrote   " << opt.truth_out->string() << "\n";
  }
  return 0;
}

int fit(const FitOptions& opt, std::ostream& out) {
  const io::RunConfig cfg = io::RunConfig::load(opt.config);
  const SiteTable data =
      io::read_sites(cfg.data, cfg.coord_format, cfg.direction_unit);
  const FittedModel fitted = fit_model(cfg, data, out);
  io::write_archive(fitted.archive, opt.archive_out);
  out << "wrote       " << opt.archive_out.string() << "\n";
  return fitted.archive.converged ? 0 : 4;
}

int krig(const KrigOptions& opt, std::ostream& out) {
  const io::PosteriorArchive archive = io::read_archive(opt.archive);
  const io::RunConfig cfg = io::RunConfig::from_key_values(archive.config);

  const std::filesystem::path data_path =
      opt.data_override ? *opt.data_override : cfg.data;
  const SiteTable data =
      io::read_sites(data_path, cfg.coord_format, cfg.direction_unit);
  if (data.size() != archive.site_ids.size()) {
    throw InvalidArgument("krig: '" + data_path.string() + "' has " +
                          std::to_string(data.size()) + " sites but the " +
                          "archive was fitted to " +
                          std::to_string(archive.site_ids.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].id != archive.site_ids[i]) {
      throw InvalidArgument("krig: site " + std::to_string(i + 1) + " is '" +
                            data[i].id + "' but the archive expects '" +
                            archive.site_ids[i] + "'");
    }
  }

  const std::vector<KrigTarget> targets =
      io::read_targets(opt.targets, cfg.coord_format);
  const std::uint64_t seed =
      opt.seed ? *opt.seed : cfg.chain.seed + kKrigSeedOffset;

  std::vector<KrigResult> results;
  if (archive.model == "wrapped") {
    results = wrap_krig(wgsp_from_archive(archive), data, targets, seed);
  } else {
    results = proj_krig(pgsp_from_archive(archive), data, targets, seed);
  }

  io::write_file_atomic(opt.out, predictions_csv(results));
  out << "model    " << archive.model << "\n";
  out << "targets  " << targets.size() << "\n";
  out << "wrote    " << opt.out.string() << "\n";
  if (opt.draws_out) {
    io::write_file_atomic(*opt.draws_out, draws_csv(results));
    out << "wrote    " << opt.draws_out->string() << "\n";
  }
  return 0;
}

int eval(const EvalOptions& opt, std::ostream& out) {
  const io::RunConfig cfg = io::RunConfig::load(opt.config);
  const SiteTable all =
      io::read_sites(cfg.data, cfg.coord_format, cfg.direction_unit);

  const HoldoutSplit split =
      holdout_split(all.size(), opt.n_valid, opt.split_seed);
  const SiteTable train = all.subset(split.train_rows);
  const SiteTable valid = all.subset(split.valid_rows);

  const FittedModel fitted = fit_model(cfg, train, out);

  std::vector<KrigTarget> targets;
  std::vector<Angle> truth;
  for (const Site& s : valid) {
    targets.push_back(KrigTarget{s.id, s.pos});
    truth.push_back(s.direction);
  }

  const std::uint64_t seed = cfg.chain.seed + kKrigSeedOffset;
  std::vector<KrigResult> results;
  if (cfg.model == "wrapped") {
    results = wrap_krig(*fitted.wgsp, train, targets, seed);
  } else {
    results = proj_krig(*fitted.pgsp, train, targets, seed);
  }

  const EvalReport report = make_eval_report(results, truth, cfg.distance,
                                             opt.split_seed, train.size());

  std::ostringstream sites_out;
  sites_out << "site_id,truth_rad,predicted_rad,concentration,circ_error,"
               "crps\n";
  for (const SiteScore& s : report.sites) {
    sites_out << s.site_id << "," << format_full(s.truth.radians()) << ","
              << format_full(s.predicted.radians()) << ","
              << format_full(s.concentration) << ","
              << format_full(s.circ_error) << "," << format_full(s.crps)
              << "\n";
  }
  io::write_file_atomic(opt.out, sites_out.str());

  std::filesystem::path summary_path = opt.out;
  summary_path.replace_filename(opt.out.stem().string() + "_summary" +
                                opt.out.extension().string());
  std::ostringstream summary;
  summary << "model,distance,ape,crps,n_train,n_valid,split_seed,converged\n";
  summary << cfg.model << "," << io::distance_name(report.distance) << ","
          << format_full(report.ape) << "," << format_full(report.crps) << ","
          << report.n_train << "," << report.n_valid << ","
          << report.split_seed << ","
          << (fitted.archive.converged ? "yes" : "no") << "\n";
  io::write_file_atomic(summary_path, summary.str());

  out << "ape         " << format_sig6(report.ape) << "\n";
  out << "crps        " << format_sig6(report.crps) << "\n";
  out << "wrote       " << opt.out.string() << "\n";
  out << "wrote       " << summary_path.string() << "\n";
  return 0;
}

}  // namespace circspat::cmd
