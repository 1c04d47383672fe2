#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "sphcox/random.hpp"

namespace sphcox {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// A point on the unit sphere S^2. Construction normalizes, so every instance
/// satisfies x^2 + y^2 + z^2 = 1 to rounding.
class UnitVector {
 public:
  UnitVector() = default;  // north pole
  UnitVector(double x, double y, double z);

  static UnitVector north_pole() { return {}; }
  static UnitVector south_pole() { return UnitVector(0.0, 0.0, -1.0); }

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  double dot(const UnitVector& other) const {
    return x_ * other.x_ + y_ * other.y_ + z_ * other.z_;
  }

  /// Colatitude in [0, pi].
  double colatitude() const;

  bool operator==(const UnitVector&) const = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 1.0;
};

struct SphericalCoord {
  double theta = 0.0;  // colatitude, [0, pi]
  double phi = 0.0;    // longitude, [0, 2pi)

  UnitVector to_unit_vector() const;
  /// Inverse of to_unit_vector; phi is canonicalized to 0 at the poles.
  static SphericalCoord from_unit_vector(const UnitVector& u);
};

/// Great-circle distance, arccos of the clamped inner product.
double geodesic_distance(const UnitVector& u, const UnitVector& v);

/// Surface area of a spherical cap of geodesic radius r: 2pi(1 - cos r).
double cap_area(double r);

/// Observation window: a colatitude band [theta_lo, theta_hi], or the sphere
/// minus that band. The full sphere is the band [0, pi].
///
/// A band is closed; its complement is open. Circles at colatitude 0 or pi are
/// degenerate and never act as a boundary.
class BandWindow {
 public:
  static BandWindow full_sphere() { return BandWindow(0.0, kPi, false); }
  static BandWindow band(double theta_lo, double theta_hi) {
    return BandWindow(theta_lo, theta_hi, false);
  }
  /// The sphere with the band [theta_lo, theta_hi] removed (two polar caps).
  static BandWindow band_complement(double theta_lo, double theta_hi) {
    return BandWindow(theta_lo, theta_hi, true);
  }

  double theta_lo() const { return theta_lo_; }
  double theta_hi() const { return theta_hi_; }
  bool complement() const { return complement_; }
  bool is_full_sphere() const { return !complement_ && theta_lo_ == 0.0 && theta_hi_ == kPi; }

  bool contains(const UnitVector& u) const;
  double area() const;

  /// True iff the closed cap C(u, r) lies inside the window (u in W eroded by r).
  bool erosion_contains(const UnitVector& u, double r) const;
  /// Area of the eroded window; zero once nothing survives the erosion.
  double eroded_area(double r) const;

  /// Uniform draw with respect to surface measure restricted to the window.
  UnitVector sample_uniform(Rng& rng) const;

  bool operator==(const BandWindow&) const = default;

 private:
  BandWindow(double theta_lo, double theta_hi, bool complement);

  double theta_lo_;
  double theta_hi_;
  bool complement_;
};

/// Deterministic quasi-uniform lattice of nodes with surface-measure weights.
/// Immutable after construction; nearest-node queries are thread-safe.
class GridMesh {
 public:
  explicit GridMesh(std::vector<UnitVector> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<UnitVector>& nodes() const { return nodes_; }
  const std::vector<double>& node_weights() const { return weights_; }
  const UnitVector& node(std::size_t i) const { return nodes_[i]; }

  /// Index of the node closest to u; ties go to the lowest index.
  std::size_t nearest_node(const UnitVector& u) const;

 private:
  std::size_t nearest_linear(const UnitVector& u) const;
  std::size_t nearest_banded(const UnitVector& u) const;

  std::vector<UnitVector> nodes_;
  std::vector<double> weights_;
  // Latitude bands of equal colatitude width, each holding node indices.
  std::vector<std::vector<std::size_t>> bands_;
  double band_width_ = kPi;
};

/// Fibonacci (golden-angle) lattice with n nodes and equal weights 4pi/n.
GridMesh build_grid(std::size_t n_target);

/// Fibonacci lattice points without a mesh index.
std::vector<UnitVector> fibonacci_points(std::size_t n);

std::vector<UnitVector> uniform_on_sphere(std::size_t n, Rng& rng);
UnitVector uniform_on_sphere(Rng& rng);

}  // namespace sphcox
