#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "circspat/io.hpp"
#include "circspat/pgsp.hpp"
#include "circspat/wgsp.hpp"

// The five top-level operations behind the command-line tool. Each takes a
// plain options struct, writes human-readable progress to `out`, and returns
// a process exit code (0 on success; fit returns 4 when the chains did not
// converge). Input problems are reported by throwing, so the CLI can map
// exception types to exit codes in one place.
namespace circspat::cmd {

struct DescribeOptions {
  std::filesystem::path data;
  io::CoordFormat coord_format = io::CoordFormat::kUtmMetres;
  io::DirectionUnit direction_unit = io::DirectionUnit::kDegrees;
  std::size_t rose_bins = 16;
  std::optional<std::filesystem::path> summary_out;  // one-row CSV
  std::optional<std::filesystem::path> rose_out;     // per-sector counts CSV
};

int describe(const DescribeOptions& opt, std::ostream& out);

struct SimulateOptions {
  std::string model = "wrapped";  // "wrapped" | "projected"
  int n_sites = 60;
  double box_km = 300.0;  // sites drawn uniformly on [0, box_km]^2
  std::uint64_t seed = 0;
  WgspParams wgsp;  // used when model == "wrapped"
  PgspParams pgsp;  // used when model == "projected"
  std::filesystem::path out;  // site CSV (UTM metres, radians)
  std::optional<std::filesystem::path> truth_out;  // JSON sidecar
};

int simulate(const SimulateOptions& opt, std::ostream& out);

struct FitOptions {
  std::filesystem::path config;
  std::filesystem::path archive_out;
};

int fit(const FitOptions& opt, std::ostream& out);

struct KrigOptions {
  std::filesystem::path archive;
  std::filesystem::path targets;
  // The archive records the training data path; override it if the file
  // moved. The sites must be the ones the archive was fitted to.
  std::optional<std::filesystem::path> data_override;
  std::optional<std::uint64_t> seed;  // default: archive seed + 1000003
  std::filesystem::path out;          // predictions CSV
  std::optional<std::filesystem::path> draws_out;  // long-format draws CSV
};

int krig(const KrigOptions& opt, std::ostream& out);

struct EvalOptions {
  std::filesystem::path config;
  std::size_t n_valid = 10;
  std::uint64_t split_seed = 1;
  std::filesystem::path out;  // per-site scores; summary lands next to it
};

int eval(const EvalOptions& opt, std::ostream& out);

}  // namespace circspat::cmd
