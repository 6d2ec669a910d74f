#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "circspat/evaluation.hpp"
#include "circspat/kriging.hpp"
#include "circspat/mcmc.hpp"
#include "circspat/pgsp.hpp"
#include "circspat/sites.hpp"
#include "circspat/wgsp.hpp"

namespace circspat::io {

enum class CoordFormat {
  kUtmMetres,      // x/y columns are UTM metres; converted to km
  kLonLatDegrees,  // x = longitude, y = latitude; projected to a local
                   // tangent plane (km) about the centroid
};

enum class DirectionUnit {
  kDegrees,  // must lie in [0, 360]
  kRadians,  // any finite value; wrapped
};

// Reads a site CSV with header columns site_id, x, y, direction (any order;
// extra columns are ignored). Problems are reported with the line number.
SiteTable read_sites(const std::filesystem::path& csv, CoordFormat format,
                     DirectionUnit unit);

// Reads a target CSV with header columns target_id, x, y.
std::vector<KrigTarget> read_targets(const std::filesystem::path& csv,
                                     CoordFormat format);

// Everything a fit/eval run needs, loadable from a flat key = value file.
// CIRCSPAT_SEED in the environment overrides the seed.
struct RunConfig {
  std::string model;  // "wrapped" | "projected"
  std::filesystem::path data;
  CoordFormat coord_format = CoordFormat::kUtmMetres;
  DirectionUnit direction_unit = DirectionUnit::kDegrees;
  AngularDistance distance = AngularDistance::kCosine;
  ChainConfig chain;
  WgspPriors wgsp;
  PgspPriors pgsp;

  static RunConfig load(const std::filesystem::path& file);

  // Canonical key/value snapshot (always every key, fixed order); parsing it
  // back through from_key_values reproduces the config exactly.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  static RunConfig from_key_values(
      const std::vector<std::pair<std::string, std::string>>& entries);

  void validate() const;
};

// A fitted posterior on disk: manifest.json plus one full-precision CSV per
// chain. Writes go to a temporary directory that is atomically renamed into
// place, so a crash never leaves a half-written archive behind.
struct PosteriorArchive {
  std::string model;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> site_ids;
  std::vector<ChainOutput> chains;
  std::vector<std::pair<std::string, double>> psrf;
  bool converged = true;
};

void write_archive(const PosteriorArchive& archive,
                   const std::filesystem::path& dir);
PosteriorArchive read_archive(const std::filesystem::path& dir);

// Full round-trip precision (archives, simulated data).
std::string format_full(double v);
// Report precision (6 significant digits).
std::string format_sig6(double v);

// Writes a whole file then renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

const char* coord_format_name(CoordFormat f);
const char* direction_unit_name(DirectionUnit u);
const char* distance_name(AngularDistance d);

}  // namespace circspat::io
