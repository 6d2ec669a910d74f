#include "circspat/angle.hpp"

#include <cmath>

#include "circspat/errors.hpp"

namespace circspat {

Angle wrap(double radians) {
  if (!std::isfinite(radians)) {
    throw InvalidArgument("wrap: angle must be finite");
  }
  double w = std::fmod(radians, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod keeps |w| < 2*pi, but the += above can round up to exactly 2*pi.
  if (w >= kTwoPi) w = 0.0;
  return Angle(w);
}

Angle deg_to_rad(double degrees) {
  if (!std::isfinite(degrees)) {
    throw InvalidArgument("deg_to_rad: angle must be finite");
  }
  return wrap(degrees * std::numbers::pi / 180.0);
}

Angle atan2_pos(double sin_component, double cos_component) {
  if (!std::isfinite(sin_component) || !std::isfinite(cos_component)) {
    throw InvalidArgument("atan2_pos: components must be finite");
  }
  if (sin_component == 0.0 && cos_component == 0.0) {
    throw UndefinedDirection("atan2_pos: direction of the zero vector");
  }
  return wrap(std::atan2(sin_component, cos_component));
}

double circ_dist(Angle a, Angle b, AngularDistance kind) {
  const double delta = a.radians() - b.radians();
  switch (kind) {
    case AngularDistance::kCosine:
      return 1.0 - std::cos(delta);
    case AngularDistance::kArcLength: {
      const double d = std::fabs(wrap(delta).radians());
      return std::min(d, kTwoPi - d);
    }
  }
  throw InvalidArgument("circ_dist: unknown distance kind");
}

}  // namespace circspat
