#include "circspat/sites.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "circspat/errors.hpp"

namespace circspat {

SiteTable::SiteTable(std::vector<Site> sites) : sites_(std::move(sites)) {
  std::unordered_set<std::string> seen;
  seen.reserve(sites_.size());
  for (const Site& s : sites_) {
    if (s.id.empty()) {
      throw InvalidArgument("site table: empty site id");
    }
    if (!std::isfinite(s.pos.x_km) || !std::isfinite(s.pos.y_km)) {
      throw InvalidArgument("site table: non-finite coordinates for site '" +
                            s.id + "'");
    }
    if (!seen.insert(s.id).second) {
      throw InvalidArgument("site table: duplicate site id '" + s.id + "'");
    }
  }
}

std::vector<Coord> SiteTable::coords() const {
  std::vector<Coord> out;
  out.reserve(sites_.size());
  for (const Site& s : sites_) out.push_back(s.pos);
  return out;
}

std::vector<Angle> SiteTable::directions() const {
  std::vector<Angle> out;
  out.reserve(sites_.size());
  for (const Site& s : sites_) out.push_back(s.direction);
  return out;
}

std::ptrdiff_t SiteTable::find(const std::string& id) const {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (sites_[i].id == id) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

SiteTable SiteTable::subset(const std::vector<std::size_t>& rows) const {
  std::vector<Site> keep;
  keep.reserve(rows.size());
  for (const std::size_t r : rows) {
    if (r >= sites_.size()) {
      throw InvalidArgument("site table subset: row index out of range");
    }
    keep.push_back(sites_[r]);
  }
  return SiteTable(std::move(keep));
}

}  // namespace circspat
