#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "circspat/angle.hpp"

namespace circspat {

// Planar position in kilometres (ingestion converts UTM metres or lon/lat
// degrees into this frame).
struct Coord {
  double x_km = 0.0;
  double y_km = 0.0;
};

struct Site {
  std::string id;
  Coord pos;
  Angle direction;
};

// An ordered set of observation sites with unique ids and finite coordinates.
class SiteTable {
 public:
  SiteTable() = default;
  explicit SiteTable(std::vector<Site> sites);  // validates the invariants

  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  std::vector<Coord> coords() const;
  std::vector<Angle> directions() const;

  // Index of the site with this id, or -1.
  std::ptrdiff_t find(const std::string& id) const;

  // New table containing the given row indices, in the given order.
  SiteTable subset(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<Site> sites_;
};

}  // namespace circspat
