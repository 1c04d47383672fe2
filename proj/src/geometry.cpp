#include "sphcox/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sphcox/error.hpp"

namespace sphcox {

UnitVector::UnitVector(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  require(std::isfinite(norm) && norm > 0.0, ErrorCode::kInvalidArgument,
          "cannot normalize a zero or non-finite vector");
  x_ = x / norm;
  y_ = y / norm;
  z_ = z / norm;
}

double UnitVector::colatitude() const { return std::atan2(std::hypot(x_, y_), z_); }

UnitVector SphericalCoord::to_unit_vector() const {
  const double s = std::sin(theta);
  return UnitVector(s * std::cos(phi), s * std::sin(phi), std::cos(theta));
}

SphericalCoord SphericalCoord::from_unit_vector(const UnitVector& u) {
  const double rho = std::hypot(u.x(), u.y());
  SphericalCoord c;
  c.theta = std::atan2(rho, u.z());
  if (rho == 0.0) {
    c.phi = 0.0;
    return c;
  }
  double phi = std::atan2(u.y(), u.x());
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  c.phi = phi;
  return c;
}

double geodesic_distance(const UnitVector& u, const UnitVector& v) {
  return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
}

double cap_area(double r) {
  require(r >= 0.0 && r <= kPi, ErrorCode::kOutOfRange,
          "cap radius must lie in [0, pi], got " + std::to_string(r));
  return kTwoPi * (1.0 - std::cos(r));
}

// ---------------------------------------------------------------------------
// BandWindow

BandWindow::BandWindow(double theta_lo, double theta_hi, bool complement)
    : theta_lo_(theta_lo), theta_hi_(theta_hi), complement_(complement) {
  require(theta_lo >= 0.0 && theta_lo < theta_hi && theta_hi <= kPi, ErrorCode::kInvalidArgument,
          "band limits must satisfy 0 <= lo < hi <= pi");
  if (complement) {
    require(theta_lo > 0.0 && theta_hi < kPi, ErrorCode::kInvalidArgument,
            "an excluded band must leave both polar caps non-empty");
  }
}

bool BandWindow::contains(const UnitVector& u) const {
  const double theta = u.colatitude();
  if (complement_) return theta < theta_lo_ || theta > theta_hi_;
  return theta >= theta_lo_ && theta <= theta_hi_;
}

double BandWindow::area() const {
  const double band = kTwoPi * (std::cos(theta_lo_) - std::cos(theta_hi_));
  return complement_ ? kFourPi - band : band;
}

bool BandWindow::erosion_contains(const UnitVector& u, double r) const {
  if (r == 0.0) return contains(u);
  const double theta = u.colatitude();
  if (complement_) return theta + r < theta_lo_ || theta - r > theta_hi_;
  const bool clear_of_lo = theta_lo_ == 0.0 || theta - r >= theta_lo_;
  const bool clear_of_hi = theta_hi_ == kPi || theta + r <= theta_hi_;
  return clear_of_lo && clear_of_hi;
}

double BandWindow::eroded_area(double r) const {
  if (complement_) {
    const double north = theta_lo_ - r;
    const double south = kPi - theta_hi_ - r;
    double area = 0.0;
    if (north > 0.0) area += kTwoPi * (1.0 - std::cos(north));
    if (south > 0.0) area += kTwoPi * (1.0 - std::cos(south));
    return area;
  }
  const double lo = theta_lo_ == 0.0 ? 0.0 : theta_lo_ + r;
  const double hi = theta_hi_ == kPi ? kPi : theta_hi_ - r;
  if (lo > hi) return 0.0;
  return kTwoPi * (std::cos(lo) - std::cos(hi));
}

UnitVector BandWindow::sample_uniform(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    double z;
    if (complement_) {
      const double north = 1.0 - std::cos(theta_lo_);
      const double south = 1.0 + std::cos(theta_hi_);
      const double pick = unit(rng) * (north + south);
      z = pick < north ? 1.0 - unit(rng) * north : -1.0 + unit(rng) * south;
    } else {
      const double z_lo = std::cos(theta_hi_);
      const double z_hi = std::cos(theta_lo_);
      z = z_lo + unit(rng) * (z_hi - z_lo);
    }
    const double phi = kTwoPi * unit(rng);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    UnitVector u(rho * std::cos(phi), rho * std::sin(phi), z);
    // Rounding can put a draw exactly on an open boundary; redraw then.
    if (contains(u)) return u;
  }
}

// ---------------------------------------------------------------------------
// GridMesh

namespace {

constexpr std::size_t kLinearScanLimit = 512;

}  // namespace

GridMesh::GridMesh(std::vector<UnitVector> nodes) : nodes_(std::move(nodes)) {
  require(!nodes_.empty(), ErrorCode::kInvalidArgument, "mesh needs at least one node");
  weights_.assign(nodes_.size(), kFourPi / static_cast<double>(nodes_.size()));
  if (nodes_.size() <= kLinearScanLimit) return;

  const double spacing = std::sqrt(kFourPi / static_cast<double>(nodes_.size()));
  const auto n_bands = static_cast<std::size_t>(std::ceil(kPi / spacing));
  band_width_ = kPi / static_cast<double>(n_bands);
  bands_.resize(n_bands);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto b = std::min(n_bands - 1, static_cast<std::size_t>(nodes_[i].colatitude() / band_width_));
    bands_[b].push_back(i);
  }
}

std::size_t GridMesh::nearest_node(const UnitVector& u) const {
  return bands_.empty() ? nearest_linear(u) : nearest_banded(u);
}

std::size_t GridMesh::nearest_linear(const UnitVector& u) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double d = geodesic_distance(u, nodes_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t GridMesh::nearest_banded(const UnitVector& u) const {
  const double theta = u.colatitude();
  const std::size_t n_bands = bands_.size();
  const auto home = std::min(n_bands - 1, static_cast<std::size_t>(theta / band_width_));

  std::size_t best = nodes_.size();
  double best_d = std::numeric_limits<double>::infinity();
  auto scan = [&](std::size_t b) {
    for (std::size_t i : bands_[b]) {
      const double d = geodesic_distance(u, nodes_[i]);
      if (d < best_d || (d == best_d && i < best)) {
        best_d = d;
        best = i;
      }
    }
  };

  // Seed with the nearest non-empty band, then visit every band whose colatitude
  // gap to u does not exceed the current best distance. The margin absorbs the
  // rounding difference between arccos distances and colatitude gaps.
  constexpr double kMargin = 1e-9;
  std::vector<bool> visited(n_bands, false);
  for (std::size_t step = 0; best == nodes_.size() && step < n_bands; ++step) {
    for (std::size_t b : {home - std::min(home, step), std::min(n_bands - 1, home + step)}) {
      if (!visited[b]) {
        visited[b] = true;
        scan(b);
      }
    }
  }
  for (std::size_t b = 0; b < n_bands; ++b) {
    if (visited[b]) continue;
    const double lo = static_cast<double>(b) * band_width_;
    const double hi = lo + band_width_;
    const double gap = theta < lo ? lo - theta : (theta > hi ? theta - hi : 0.0);
    if (gap <= best_d + kMargin) {
      visited[b] = true;
      scan(b);
    }
  }
  return best;
}

std::vector<UnitVector> fibonacci_points(std::size_t n) {
  std::vector<UnitVector> points;
  points.reserve(n);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / dn;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = std::fmod(golden_angle * static_cast<double>(i), kTwoPi);
    points.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return points;
}

GridMesh build_grid(std::size_t n_target) {
  require(n_target >= 12, ErrorCode::kInvalidArgument, "grid needs at least 12 nodes");
  return GridMesh(fibonacci_points(n_target));
}

UnitVector uniform_on_sphere(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double z = 2.0 * unit(rng) - 1.0;
  const double phi = kTwoPi * unit(rng);
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return UnitVector(rho * std::cos(phi), rho * std::sin(phi), z);
}

std::vector<UnitVector> uniform_on_sphere(std::size_t n, Rng& rng) {
  std::vector<UnitVector> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(uniform_on_sphere(rng));
  return points;
}

}  // namespace sphcox
