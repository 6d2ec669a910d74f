#include "circspat/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <unordered_map>

#include "json.hpp"

#include "circspat/errors.hpp"

namespace circspat::io {

namespace {

constexpr double kEarthRadiusKm = 6371.0088;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw IngestionError(where + ": cannot parse number from '" + token +
                         "'");
  }
  return v;
}

long long parse_int(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw IngestionError(where + ": cannot parse integer from '" + token +
                         "'");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IngestionError("cannot open '" + path.string() + "'");
  }
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (table.header.empty()) {
      table.header = split_fields(line);
      continue;
    }
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != table.header.size()) {
      throw IngestionError(path.string() + ":" + std::to_string(line_no) +
                           ": expected " + std::to_string(table.header.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) {
    throw IngestionError("'" + path.string() + "' is empty");
  }
  return table;
}

std::size_t required_column(const CsvTable& table,
                            const std::filesystem::path& path,
                            const std::string& name) {
  std::size_t found = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) {
      if (found != table.header.size()) {
        throw IngestionError(path.string() + ": duplicate column '" + name +
                             "'");
      }
      found = i;
    }
  }
  if (found == table.header.size()) {
    throw IngestionError(path.string() + ": missing required column '" +
                         name + "'");
  }
  return found;
}

std::string row_where(const std::filesystem::path& path, int line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

// Converts raw x/y readings to planar km. For lon/lat this is an
// equirectangular projection about the centroid, good for the regional
// scales this library targets.
std::vector<Coord> to_km(const std::vector<double>& xs,
                         const std::vector<double>& ys, CoordFormat format) {
  std::vector<Coord> out(xs.size());
  if (format == CoordFormat::kUtmMetres) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out[i] = Coord{xs[i] / 1000.0, ys[i] / 1000.0};
    }
    return out;
  }
  double lon0 = 0.0, lat0 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lon0 += xs[i];
    lat0 += ys[i];
  }
  lon0 /= static_cast<double>(xs.size());
  lat0 /= static_cast<double>(xs.size());
  const double deg = std::numbers::pi / 180.0;
  const double coslat = std::cos(lat0 * deg);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = Coord{kEarthRadiusKm * coslat * (xs[i] - lon0) * deg,
                   kEarthRadiusKm * (ys[i] - lat0) * deg};
  }
  return out;
}

}  // namespace

SiteTable read_sites(const std::filesystem::path& csv, CoordFormat format,
                     DirectionUnit unit) {
  const CsvTable table = read_csv(csv);
  const std::size_t c_id = required_column(table, csv, "site_id");
  const std::size_t c_x = required_column(table, csv, "x");
  const std::size_t c_y = required_column(table, csv, "y");
  const std::size_t c_dir = required_column(table, csv, "direction");
  if (table.rows.empty()) {
    throw IngestionError("'" + csv.string() + "' has no data rows");
  }

  std::vector<std::string> ids;
  std::vector<double> xs, ys;
  std::vector<Angle> dirs;
  std::unordered_map<std::string, int> first_line;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int line_no = table.line_numbers[r];
    const std::string where = row_where(csv, line_no);

    const std::string id = row[c_id];
    if (id.empty()) {
      throw IngestionError(where + ": empty site_id");
    }
    const auto [it, fresh] = first_line.emplace(id, line_no);
    if (!fresh) {
      throw IngestionError(csv.string() + ": duplicate site id '" + id +
                           "' (lines " + std::to_string(it->second) + " and " +
                           std::to_string(line_no) + ")");
    }

    const double x = parse_double(row[c_x], where + " (column x)");
    const double y = parse_double(row[c_y], where + " (column y)");
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw IngestionError(where + ": non-finite coordinate");
    }
    if (format == CoordFormat::kLonLatDegrees && std::fabs(y) > 90.0) {
      throw IngestionError(where + ": latitude outside [-90, 90]");
    }

    const double d = parse_double(row[c_dir], where + " (column direction)");
    if (!std::isfinite(d)) {
      throw IngestionError(where + ": non-finite direction");
    }
    Angle dir;
    if (unit == DirectionUnit::kDegrees) {
      if (d < 0.0 || d > 360.0) {
        throw IngestionError(where + ": direction " + format_sig6(d) +
                             " outside [0, 360] degrees");
      }
      dir = deg_to_rad(d);
    } else {
      dir = wrap(d);
    }

    ids.push_back(id);
    xs.push_back(x);
    ys.push_back(y);
    dirs.push_back(dir);
  }

  const std::vector<Coord> coords = to_km(xs, ys, format);
  std::vector<Site> sites;
  sites.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    sites.push_back(Site{ids[i], coords[i], dirs[i]});
  }
  return SiteTable(std::move(sites));
}

std::vector<KrigTarget> read_targets(const std::filesystem::path& csv,
                                     CoordFormat format) {
  const CsvTable table = read_csv(csv);
  const std::size_t c_id = required_column(table, csv, "target_id");
  const std::size_t c_x = required_column(table, csv, "x");
  const std::size_t c_y = required_column(table, csv, "y");
  if (table.rows.empty()) {
    throw IngestionError("'" + csv.string() + "' has no data rows");
  }

  std::vector<std::string> ids;
  std::vector<double> xs, ys;
  std::unordered_map<std::string, int> first_line;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int line_no = table.line_numbers[r];
    const std::string where = row_where(csv, line_no);
    const std::string id = row[c_id];
    if (id.empty()) throw IngestionError(where + ": empty target_id");
    const auto [it, fresh] = first_line.emplace(id, line_no);
    if (!fresh) {
      throw IngestionError(csv.string() + ": duplicate target id '" + id +
                           "' (lines " + std::to_string(it->second) + " and " +
                           std::to_string(line_no) + ")");
    }
    const double x = parse_double(row[c_x], where + " (column x)");
    const double y = parse_double(row[c_y], where + " (column y)");
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw IngestionError(where + ": non-finite coordinate");
    }
    if (format == CoordFormat::kLonLatDegrees && std::fabs(y) > 90.0) {
      throw IngestionError(where + ": latitude outside [-90, 90]");
    }
    ids.push_back(id);
    xs.push_back(x);
    ys.push_back(y);
  }

  const std::vector<Coord> coords = to_km(xs, ys, format);
  std::vector<KrigTarget> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.push_back(KrigTarget{ids[i], coords[i]});
  }
  return out;
}

namespace {

// Applies one config entry; throws InvalidArgument for unknown keys or bad
// values. `where` names the source (file line or snapshot key).
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value, const std::string& where) {
  auto bad = [&](const std::string& msg) {
    throw InvalidArgument("config " + where + ": " + msg);
  };
  auto as_double = [&]() {
    try {
      return parse_double(value, where);
    } catch (const IngestionError& e) {
      throw InvalidArgument(std::string("config ") + e.what());
    }
  };
  auto as_int = [&]() {
    try {
      return parse_int(value, where);
    } catch (const IngestionError& e) {
      throw InvalidArgument(std::string("config ") + e.what());
    }
  };

  if (key == "model") {
    if (value != "wrapped" && value != "projected") {
      bad("model must be 'wrapped' or 'projected'");
    }
    cfg.model = value;
  } else if (key == "data") {
    if (value.empty()) bad("data path is empty");
    cfg.data = value;
  } else if (key == "coord_format") {
    if (value == "utm_m") {
      cfg.coord_format = CoordFormat::kUtmMetres;
    } else if (value == "lonlat_deg") {
      cfg.coord_format = CoordFormat::kLonLatDegrees;
    } else {
      bad("coord_format must be 'utm_m' or 'lonlat_deg'");
    }
  } else if (key == "direction_unit") {
    if (value == "deg") {
      cfg.direction_unit = DirectionUnit::kDegrees;
    } else if (value == "rad") {
      cfg.direction_unit = DirectionUnit::kRadians;
    } else {
      bad("direction_unit must be 'deg' or 'rad'");
    }
  } else if (key == "distance") {
    if (value == "cosine") {
      cfg.distance = AngularDistance::kCosine;
    } else if (value == "arclength") {
      cfg.distance = AngularDistance::kArcLength;
    } else {
      bad("distance must be 'cosine' or 'arclength'");
    }
  } else if (key == "n_iter") {
    cfg.chain.n_iter = static_cast<int>(as_int());
  } else if (key == "burnin") {
    cfg.chain.burnin = static_cast<int>(as_int());
  } else if (key == "thin") {
    cfg.chain.thin = static_cast<int>(as_int());
  } else if (key == "n_chains") {
    cfg.chain.n_chains = static_cast<int>(as_int());
  } else if (key == "target_accept") {
    cfg.chain.target_accept = as_double();
  } else if (key == "adapt_start") {
    cfg.chain.adapt_start = static_cast<int>(as_int());
  } else if (key == "adapt_end") {
    cfg.chain.adapt_end = static_cast<int>(as_int());
  } else if (key == "seed") {
    const long long s = as_int();
    if (s < 0) bad("seed must be >= 0");
    cfg.chain.seed = static_cast<std::uint64_t>(s);
  } else if (key == "mu_prior_mean") {
    cfg.wgsp.mu_mean = as_double();
  } else if (key == "mu_prior_var") {
    cfg.wgsp.mu_var = as_double();
  } else if (key == "sigma2_shape") {
    cfg.wgsp.sigma2_shape = as_double();
  } else if (key == "sigma2_rate") {
    cfg.wgsp.sigma2_rate = as_double();
  } else if (key == "phi_lo") {
    cfg.wgsp.phi_lo = as_double();
    cfg.pgsp.phi_lo = cfg.wgsp.phi_lo;
  } else if (key == "phi_hi") {
    cfg.wgsp.phi_hi = as_double();
    cfg.pgsp.phi_hi = cfg.wgsp.phi_hi;
  } else if (key == "k_max") {
    cfg.wgsp.k_max = static_cast<int>(as_int());
  } else if (key == "mu1_prior_mean") {
    cfg.pgsp.mu_mean(0) = as_double();
  } else if (key == "mu2_prior_mean") {
    cfg.pgsp.mu_mean(1) = as_double();
  } else if (key == "mu_prior_cov") {
    // Either a single variance v (meaning v * I) or four row-major entries.
    const std::vector<std::string> parts = split_fields(value);
    if (parts.size() == 1) {
      const double v = as_double();
      cfg.pgsp.mu_cov = Eigen::Matrix2d::Identity() * v;
    } else if (parts.size() == 4) {
      for (int i = 0; i < 4; ++i) {
        cfg.pgsp.mu_cov(i / 2, i % 2) = parse_double(parts[static_cast<std::size_t>(i)], where);
      }
    } else {
      bad("mu_prior_cov needs 1 or 4 comma-separated numbers");
    }
  } else if (key == "tau2_shape") {
    cfg.pgsp.tau2_shape = as_double();
  } else if (key == "tau2_rate") {
    cfg.pgsp.tau2_rate = as_double();
  } else {
    bad("unknown key '" + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (model != "wrapped" && model != "projected") {
    throw InvalidArgument("config: model must be 'wrapped' or 'projected'");
  }
  if (data.empty()) {
    throw InvalidArgument("config: data path is required");
  }
  chain.validate();
  wgsp.validate();
  pgsp.validate();
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw InvalidArgument("cannot open config '" + file.string() + "'");
  }

  RunConfig cfg;
  std::unordered_map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;

    const std::size_t eq = line.find('=');
    const std::string where =
        file.string() + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw InvalidArgument("config " + where + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw InvalidArgument("config " + where + ": empty key");
    }
    const auto [it, fresh] = seen.emplace(key, line_no);
    if (!fresh) {
      throw InvalidArgument("config " + where + ": key '" + key +
                            "' already set on line " +
                            std::to_string(it->second));
    }
    apply_config_entry(cfg, key, value, where);
  }

  if (seen.find("model") == seen.end()) {
    throw InvalidArgument("config '" + file.string() +
                          "': required key 'model' is missing");
  }
  if (seen.find("data") == seen.end()) {
    throw InvalidArgument("config '" + file.string() +
                          "': required key 'data' is missing");
  }

  if (const char* env = std::getenv("CIRCSPAT_SEED")) {
    const std::string t = trim(env);
    unsigned long long s = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw InvalidArgument(
          "CIRCSPAT_SEED must be a non-negative integer, got '" + t + "'");
    }
    cfg.chain.seed = s;
  }

  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_key_values()
    const {
  auto fi = [](long long v) { return std::to_string(v); };
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("model", model);
  kv.emplace_back("data", data.string());
  kv.emplace_back("coord_format", coord_format_name(coord_format));
  kv.emplace_back("direction_unit", direction_unit_name(direction_unit));
  kv.emplace_back("distance", distance_name(distance));
  kv.emplace_back("n_iter", fi(chain.n_iter));
  kv.emplace_back("burnin", fi(chain.burnin));
  kv.emplace_back("thin", fi(chain.thin));
  kv.emplace_back("n_chains", fi(chain.n_chains));
  kv.emplace_back("target_accept", format_full(chain.target_accept));
  kv.emplace_back("adapt_start", fi(chain.adapt_start));
  kv.emplace_back("adapt_end", fi(chain.adapt_end));
  kv.emplace_back("seed", std::to_string(chain.seed));
  kv.emplace_back("mu_prior_mean", format_full(wgsp.mu_mean));
  kv.emplace_back("mu_prior_var", format_full(wgsp.mu_var));
  kv.emplace_back("sigma2_shape", format_full(wgsp.sigma2_shape));
  kv.emplace_back("sigma2_rate", format_full(wgsp.sigma2_rate));
  kv.emplace_back("phi_lo", format_full(wgsp.phi_lo));
  kv.emplace_back("phi_hi", format_full(wgsp.phi_hi));
  kv.emplace_back("k_max", fi(wgsp.k_max));
  kv.emplace_back("mu1_prior_mean", format_full(pgsp.mu_mean(0)));
  kv.emplace_back("mu2_prior_mean", format_full(pgsp.mu_mean(1)));
  kv.emplace_back("mu_prior_cov",
                  format_full(pgsp.mu_cov(0, 0)) + "," +
                      format_full(pgsp.mu_cov(0, 1)) + "," +
                      format_full(pgsp.mu_cov(1, 0)) + "," +
                      format_full(pgsp.mu_cov(1, 1)));
  kv.emplace_back("tau2_shape", format_full(pgsp.tau2_shape));
  kv.emplace_back("tau2_rate", format_full(pgsp.tau2_rate));
  return kv;
}

RunConfig RunConfig::from_key_values(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  RunConfig cfg;
  for (const auto& [key, value] : entries) {
    apply_config_entry(cfg, key, value, "snapshot key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_sig6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write '" + tmp.string() + "'");
    }
    out << contents;
    if (!out.flush()) {
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

const char* coord_format_name(CoordFormat f) {
  return f == CoordFormat::kUtmMetres ? "utm_m" : "lonlat_deg";
}

const char* direction_unit_name(DirectionUnit u) {
  return u == DirectionUnit::kDegrees ? "deg" : "rad";
}

const char* distance_name(AngularDistance d) {
  return d == AngularDistance::kCosine ? "cosine" : "arclength";
}

namespace {

std::string chain_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "chain_%02zu.csv", index);
  return buf;
}

// Doubles that must survive a JSON round trip byte-for-byte (including
// +inf from degenerate PSRF traces) travel as %.17g strings.
double parse_stored_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw IngestionError(where + ": bad stored number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_archive(const PosteriorArchive& archive,
                   const std::filesystem::path& dir) {
  if (archive.chains.empty()) {
    throw InvalidArgument("write_archive: no chains");
  }
  const std::vector<std::string>& names = archive.chains.front().param_names;
  for (const ChainOutput& c : archive.chains) {
    if (c.param_names != names) {
      throw InvalidArgument("write_archive: chains disagree on parameters");
    }
  }

  nlohmann::ordered_json manifest;
  manifest["model"] = archive.model;
  manifest["converged"] = archive.converged;
  manifest["site_ids"] = archive.site_ids;
  manifest["param_names"] = names;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : archive.config) config[k] = v;
  manifest["config"] = std::move(config);
  nlohmann::ordered_json psrf_json = nlohmann::ordered_json::array();
  for (const auto& [name, value] : archive.psrf) {
    psrf_json.push_back({name, format_full(value)});
  }
  manifest["psrf"] = std::move(psrf_json);

  nlohmann::ordered_json chains_json = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < archive.chains.size(); ++c) {
    const ChainOutput& chain = archive.chains[c];
    nlohmann::ordered_json cj;
    cj["file"] = chain_file_name(c);
    cj["seed"] = chain.seed;
    cj["k_underflow_rejects"] = chain.k_underflow_rejects;
    nlohmann::ordered_json acc = nlohmann::ordered_json::array();
    for (const auto& [name, value] : chain.acceptance_rates) {
      acc.push_back({name, format_full(value)});
    }
    cj["acceptance"] = std::move(acc);
    chains_json.push_back(std::move(cj));
  }
  manifest["chains"] = std::move(chains_json);

  // Stage everything in a scratch directory, then swap it into place.
  std::filesystem::path tmp = dir;
  tmp += ".tmp";
  std::filesystem::remove_all(tmp);
  std::filesystem::create_directories(tmp);

  {
    std::ofstream out(tmp / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
    if (!out.flush()) throw Error("cannot write archive manifest");
  }
  for (std::size_t c = 0; c < archive.chains.size(); ++c) {
    const ChainOutput& chain = archive.chains[c];
    std::ofstream out(tmp / chain_file_name(c), std::ios::binary);
    for (std::size_t j = 0; j < names.size(); ++j) {
      out << (j ? "," : "") << names[j];
    }
    out << "\n";
    for (Eigen::Index i = 0; i < chain.draws.rows(); ++i) {
      for (Eigen::Index j = 0; j < chain.draws.cols(); ++j) {
        out << (j ? "," : "") << format_full(chain.draws(i, j));
      }
      out << "\n";
    }
    if (!out.flush()) throw Error("cannot write archive chain file");
  }

  std::filesystem::remove_all(dir);
  std::filesystem::rename(tmp, dir);
}

PosteriorArchive read_archive(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw IngestionError("cannot open archive manifest '" +
                         manifest_path.string() + "'");
  }
  nlohmann::ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("archive manifest '" + manifest_path.string() +
                         "' is not valid JSON: " + e.what());
  }

  PosteriorArchive archive;
  try {
    archive.model = manifest.at("model").get<std::string>();
    archive.converged = manifest.at("converged").get<bool>();
    archive.site_ids =
        manifest.at("site_ids").get<std::vector<std::string>>();
    const auto names =
        manifest.at("param_names").get<std::vector<std::string>>();
    for (const auto& [k, v] : manifest.at("config").items()) {
      archive.config.emplace_back(k, v.get<std::string>());
    }
    for (const auto& entry : manifest.at("psrf")) {
      archive.psrf.emplace_back(
          entry.at(0).get<std::string>(),
          parse_stored_double(entry.at(1).get<std::string>(),
                              manifest_path.string() + " psrf"));
    }
    for (const auto& cj : manifest.at("chains")) {
      ChainOutput chain;
      chain.param_names = names;
      chain.seed = cj.at("seed").get<std::uint64_t>();
      chain.k_underflow_rejects = cj.at("k_underflow_rejects").get<long>();
      for (const auto& entry : cj.at("acceptance")) {
        chain.acceptance_rates.emplace_back(
            entry.at(0).get<std::string>(),
            parse_stored_double(entry.at(1).get<std::string>(),
                                manifest_path.string() + " acceptance"));
      }

      const std::filesystem::path chain_path =
          dir / cj.at("file").get<std::string>();
      const CsvTable table = read_csv(chain_path);
      if (table.header != names) {
        throw IngestionError("archive chain '" + chain_path.string() +
                             "' does not match the manifest parameters");
      }
      chain.draws.resize(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(names.size()));
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t j = 0; j < names.size(); ++j) {
          chain.draws(static_cast<Eigen::Index>(r),
                      static_cast<Eigen::Index>(j)) =
              parse_double(table.rows[r][j],
                           row_where(chain_path, table.line_numbers[r]));
        }
      }
      archive.chains.push_back(std::move(chain));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("archive manifest '" + manifest_path.string() +
                         "' is malformed: " + e.what());
  }
  if (archive.chains.empty()) {
    throw IngestionError("archive '" + dir.string() + "' has no chains");
  }
  return archive;
}

}  // namespace circspat::io
