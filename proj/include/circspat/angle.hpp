#pragma once

#include <numbers>

namespace circspat {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// A direction on the unit circle, stored in radians in [0, 2*pi).
// Construction goes through wrap() / deg_to_rad() / atan2_pos() so the
// invariant cannot be broken from outside.
class Angle {
 public:
  constexpr Angle() = default;

  double radians() const { return rad_; }
  double degrees() const { return rad_ * 180.0 / std::numbers::pi; }

  friend constexpr bool operator==(Angle, Angle) = default;

 private:
  constexpr explicit Angle(double wrapped) : rad_(wrapped) {}
  friend Angle wrap(double);

  double rad_ = 0.0;
};

// Reduces any finite radian value into [0, 2*pi). Throws InvalidArgument on
// NaN or infinity.
Angle wrap(double radians);

// Degrees -> wrapped radians (360 maps to 0).
Angle deg_to_rad(double degrees);

// Quadrant-aware arctangent mapped onto [0, 2*pi). Throws UndefinedDirection
// when both components are exactly zero.
Angle atan2_pos(double sin_component, double cos_component);

// How far apart two directions are.
enum class AngularDistance {
  kCosine,     // 1 - cos(a - b), range [0, 2]
  kArcLength,  // min(|a-b|, 2*pi - |a-b|), range [0, pi]
};

double circ_dist(Angle a, Angle b,
                 AngularDistance kind = AngularDistance::kCosine);

}  // namespace circspat
