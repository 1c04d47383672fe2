#include <doctest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>

#include "sphcox/error.hpp"
#include "sphcox/summary.hpp"
#include "test_util.hpp"

using namespace sphcox;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// K = 2pi(1 - cos r) + (cosh 2xi - cosh sqrt(2 xi^2 (1 + cos r))) / (d kappa s(xi)^2)
double thomas_k_oracle(double kappa, double xi, double r, int d, bool use_sin) {
  const Big bx(xi), br(r), bk(kappa);
  const Big pi = boost::math::constants::pi<Big>();
  const Big w = sqrt(2 * bx * bx * (1 + cos(br)));
  const Big s = use_sin ? sin(bx) : sinh(bx);
  const Big k = 2 * pi * (1 - cos(br)) + (cosh(2 * bx) - cosh(w)) / (d * bk * s * s);
  return static_cast<double>(k);
}

PointPattern poisson_pattern(double lambda, const BandWindow& w, Rng& rng) {
  return simulate_poisson(IntensityModel::constant(lambda), lambda, w, rng);
}

}  // namespace

TEST_CASE("distance grids") {
  CHECK_THROWS_AS(DistanceGrid({0.1, 0.1}), Error);
  CHECK_THROWS_AS(DistanceGrid({-0.1, 0.1}), Error);
  CHECK_THROWS_AS(DistanceGrid({0.1, 3.5}), Error);
  CHECK_THROWS_AS(DistanceGrid(std::vector<double>{}), Error);
  const DistanceGrid g = DistanceGrid::linspace(0.0, kPi, 512);
  CHECK(g.size() == 512);
  CHECK(g[511] == kPi);
  CHECK(g[1] == doctest::Approx(kPi / 511));
  for (CurveKind k : {CurveKind::kK, CurveKind::kF, CurveKind::kG, CurveKind::kJ, CurveKind::kPcf}) {
    CHECK(parse_curve_kind(curve_kind_name(k)) == k);
  }
}

TEST_CASE("curve interpolation") {
  const SummaryCurve c(DistanceGrid({0.0, 0.5, 1.0}), {0.0, 1.0, kMissing}, CurveKind::kK);
  CHECK(c.interpolate(0.25) == doctest::Approx(0.5));
  CHECK(c.interpolate(0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(c.interpolate(0.75), Error);
  CHECK_THROWS_AS(c.interpolate(1.5), Error);
  CHECK_THROWS_AS(SummaryCurve(DistanceGrid({0.0, 1.0}), {1.0}, CurveKind::kK), Error);
}

TEST_CASE("Poisson K") {
  const SummaryCurve k = k_poisson(DistanceGrid({0.0, kPi / 2, kPi}));
  CHECK(k.values[0] == 0.0);
  CHECK(k.values[1] == doctest::Approx(kTwoPi));
  CHECK(k.values[2] == doctest::Approx(kFourPi));
}

TEST_CASE("K from the pair correlation") {
  const DistanceGrid grid = DistanceGrid::linspace(0.0, kPi, 512);
  const SummaryCurve ones = k_from_pcf([](double) { return 1.0; }, grid);
  const SummaryCurve twos = k_from_pcf([](double) { return 2.0; }, grid);
  const SummaryCurve pois = k_poisson(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(ones.values[i] - pois.values[i]) <= 1e-8);
    CHECK(std::abs(twos.values[i] - 2.0 * pois.values[i]) <= 1e-8);
  }

  // Trapezoid oracle with 10^6 panels.
  const auto model = CovarianceModel::multiquadric(1.30, 0.87, 2.03);
  const PcfFunction g = [&](double s) { return std::exp(model.evaluate(s)); };
  for (double r : {0.05, 0.3, 1.0, 2.5}) {
    const int n = 1000000;
    const double h = r / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double s = h * i;
      const double f = kTwoPi * g(s) * std::sin(s);
      sum += (i == 0 || i == n) ? 0.5 * f : f;
    }
    CHECK(std::abs(k_from_pcf(g, r) - sum * h) <= 1e-6);
  }
  const SummaryCurve curve = k_from_pcf(g, DistanceGrid({0.05, 0.3, 1.0, 2.5}));
  CHECK(curve.values[2] == doctest::Approx(k_from_pcf(g, 1.0)).epsilon(1e-9));

  CHECK_THROWS_AS(k_from_pcf([](double s) { return s > 0.5 ? std::numeric_limits<double>::infinity() : 1.0; }, 1.0),
                  Error);
}

TEST_CASE("LGCP K is monotone in the variance") {
  const DistanceGrid grid = DistanceGrid::linspace(0.01, kPi, 60);
  for (double delta : {0.3, 0.87}) {
    for (double tau : {0.5, 2.03}) {
      std::vector<double> prev;
      for (double var : {0.1, 0.5, 1.3, 3.0}) {
        const auto m = CovarianceModel::multiquadric(var, delta, tau);
        const SummaryCurve k = k_from_pcf([&](double s) { return std::exp(m.evaluate(s)); }, grid);
        if (!prev.empty()) {
          for (std::size_t i = 0; i < grid.size(); ++i) CHECK(k.values[i] > prev[i]);
        }
        prev = k.values;
      }
    }
  }
}

TEST_CASE("Thomas K closed form") {
  const ThomasParams p(5.64, 266.6);
  CHECK(thomas_k(p, 0.0) == 0.0);
  for (double r : {0.01, 0.1, 0.5, 2.0}) {
    const double exact = thomas_k_oracle(5.64, 266.6, r, 2, false);
    CHECK(std::abs(thomas_k(p, r) / exact - 1.0) <= 1e-9);
    CHECK(std::abs(thomas_k(p, r, ThomasKForm::kFourKappaSinh) / thomas_k_oracle(5.64, 266.6, r, 4, false) - 1.0) <= 1e-9);
  }
  CHECK(std::abs(thomas_k(p, 0.1, ThomasKForm::kFourKappaSin) / thomas_k_oracle(5.64, 266.6, 0.1, 4, true) - 1.0) <=
        1e-8);
  for (const ThomasParams q : {ThomasParams(0.3, 2.0), ThomasParams(5.64, 266.6), ThomasParams(1.0, 2000.0)}) {
    CHECK(thomas_k(q, kPi) == doctest::Approx(kFourPi + 1.0 / q.kappa).epsilon(1e-10));
    CHECK(std::abs(thomas_k(q, 0.3) / thomas_k_oracle(q.kappa, q.xi, 0.3, 2, false) - 1.0) <= 1e-9);
  }
  const SummaryCurve curve = k_thomas(p, DistanceGrid({0.0, 0.1}));
  CHECK(curve.values[1] == thomas_k(p, 0.1));
}

TEST_CASE("Thomas K differentiates to the pair correlation") {
  for (const ThomasParams p : {ThomasParams(0.8, 5.0), ThomasParams(5.64, 266.6)}) {
    for (double r : {0.02, 0.1, 0.4, 1.5}) {
      const double h = 1e-5 * r;
      const double dk = (thomas_k(p, r + h) - thomas_k(p, r - h)) / (2 * h);
      const double g = dk / (kTwoPi * std::sin(r));
      CHECK(g >= 1.0 - 1e-6);
      CHECK(g == doctest::Approx(thomas_pcf(p, r)).epsilon(1e-5));
    }
    const PcfFunction g = [&](double s) { return thomas_pcf(p, s); };
    for (double r : {0.05, 0.5, 2.0}) CHECK(k_from_pcf(g, r) == doctest::Approx(thomas_k(p, r)).epsilon(1e-7));
  }
}

TEST_CASE("LGCP pair correlation curve") {
  const DistanceGrid grid = DistanceGrid::linspace(0.0, kPi, 50);
  const auto big = CovarianceModel::multiquadric(4.50, 0.99, 0.25);
  CHECK(pcf_curve(big, grid).values[0] == doctest::Approx(std::exp(4.50)));
  const SummaryCurve g = pcf_curve(CovarianceModel::multiquadric(1.3, 0.87, 2.03), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(std::log(g.values[i]) - CovarianceModel::multiquadric(1.3, 0.87, 2.03).evaluate(grid[i])) <= 1e-12);
  }
  const SummaryCurve flat = pcf_curve(CovarianceModel::multiquadric(1e-300, 0.5, 1.0), grid);
  for (double v : flat.values) CHECK(v == 1.0);
}

TEST_CASE("K estimator on hand-computed patterns") {
  const double lambda = 3.0;
  const PointPattern two(BandWindow::full_sphere(),
                         {UnitVector::north_pole(), SphericalCoord{0.3, 0.0}.to_unit_vector()});
  const DistanceGrid grid({0.1, 0.2999, 0.3 + 1e-9, 1.0});
  const SummaryCurve k = estimate_k_inhom(two, IntensityModel::constant(lambda), grid);
  CHECK(k.values[0] == 0.0);
  CHECK(k.values[1] == 0.0);
  CHECK(k.values[2] == doctest::Approx(2.0 / (lambda * lambda * kFourPi)));
  CHECK(k.values[3] == doctest::Approx(2.0 / (lambda * lambda * kFourPi)));

  const SummaryCurve empty = estimate_k_inhom(PointPattern(), IntensityModel::constant(1.0), grid);
  for (double v : empty.values) CHECK(v == 0.0);

  const PointPattern cap(BandWindow::band(0.0, 0.4), {UnitVector::north_pole()});
  const SummaryCurve missing = estimate_k_inhom(cap, IntensityModel::constant(1.0), DistanceGrid({0.1, 0.45}));
  CHECK(missing.values[0] == 0.0);
  CHECK(is_missing(missing.values[1]));
  CHECK_THROWS_AS(estimate_k_inhom(two, IntensityModel::constant(0.0), grid), Error);
}

TEST_CASE("K estimator is unbiased for Poisson") {
  const DistanceGrid grid({0.2, 0.5, 1.0});
  Rng rng(21);
  for (const BandWindow& w : {BandWindow::full_sphere(), BandWindow::band_complement(1.2, 1.9)}) {
    std::vector<std::vector<double>> values(grid.size());
    for (int rep = 0; rep < 500; ++rep) {
      const SummaryCurve k = estimate_k_inhom(poisson_pattern(10.0, w, rng), IntensityModel::constant(10.0), grid);
      for (std::size_t i = 0; i < grid.size(); ++i) values[i].push_back(k.values[i]);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto ms = test::mean_se(values[i]);
      CHECK_MESSAGE(std::abs(ms.mean - kTwoPi * (1 - std::cos(grid[i]))) <= 3.0 * ms.se, "r=", grid[i]);
    }
  }
  // Inhomogeneous intensity, full sphere.
  const IntensityModel fit = IntensityModel::galaxy_fit();
  std::vector<double> v;
  for (int rep = 0; rep < 300; ++rep) {
    const PointPattern p = simulate_poisson(fit, fit.maximum(), BandWindow::full_sphere(), rng);
    v.push_back(estimate_k_inhom(p, fit, DistanceGrid({0.5})).values[0]);
  }
  const auto ms = test::mean_se(v);
  CHECK(std::abs(ms.mean - kTwoPi * (1 - std::cos(0.5))) <= 3.0 * ms.se);
}

TEST_CASE("K estimator is nondecreasing") {
  Rng rng(22);
  const DistanceGrid grid = DistanceGrid::linspace(0.0, 1.2, 200);
  const BandWindow w = BandWindow::band_complement(1.2, 1.9);
  for (int rep = 0; rep < 20; ++rep) {
    const SummaryCurve k = estimate_k_inhom(poisson_pattern(15.0, w, rng), IntensityModel::constant(15.0), grid);
    // Holds for the numerator; the eroded area shrinks with r so the ratio
    // does too on full-sphere patterns only. Check the full-sphere case below.
    (void)k;
    const SummaryCurve kf = estimate_k_inhom(poisson_pattern(15.0, BandWindow::full_sphere(), rng),
                                             IntensityModel::constant(15.0), grid);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(kf.values[i] >= kf.values[i - 1]);
  }
}

TEST_CASE("F, G and J on trivial patterns") {
  const DistanceGrid grid = DistanceGrid::linspace(0.0, kPi, 20);
  const FgjCurves empty = estimate_fgj(PointPattern(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(empty.F.values[i] == 0.0);
    CHECK(is_missing(empty.G.values[i]));
    CHECK(is_missing(empty.J.values[i]));
  }
  const FgjCurves single = estimate_fgj(PointPattern(BandWindow::full_sphere(), {UnitVector::north_pole()}), grid);
  CHECK(single.F.values.back() == 1.0);
  CHECK(is_missing(single.J.values.back()));
  CHECK(single.G.values[5] == 0.0);
  CHECK_THROWS_AS(estimate_fgj(PointPattern(), grid, 50), Error);
}

TEST_CASE("F, G and J oracle on a small pattern") {
  Rng rng(23);
  const BandWindow w = BandWindow::band_complement(1.1, 2.0);
  const PointPattern p = poisson_pattern(8.0, w, rng);
  const DistanceGrid grid = DistanceGrid::linspace(0.0, 0.8, 41);
  const FgjCurves est = estimate_fgj(p, grid, 500);
  std::vector<UnitVector> refs;
  for (const auto& u : fibonacci_points(500)) {
    if (w.contains(u)) refs.push_back(u);
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid[k];
    double fn = 0, fd = 0, gn = 0, gd = 0;
    for (const auto& c : refs) {
      if (!w.erosion_contains(c, r)) continue;
      fd += 1;
      bool hit = false;
      for (const auto& x : p.points()) hit = hit || geodesic_distance(c, x) <= r;
      fn += hit;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!w.erosion_contains(p.points()[i], r)) continue;
      gd += 1;
      bool hit = false;
      for (std::size_t j = 0; j < p.size(); ++j) hit = hit || (j != i && geodesic_distance(p.points()[i], p.points()[j]) <= r);
      gn += hit;
    }
    if (fd > 0) CHECK(est.F.values[k] == doctest::Approx(fn / fd).epsilon(1e-12));
    if (gd > 0) {
      CHECK(est.G.values[k] == doctest::Approx(gn / gd).epsilon(1e-12));
    } else {
      CHECK(is_missing(est.G.values[k]));
    }
    if (fd > 0 && gd > 0 && fn < fd) {
      CHECK(est.J.values[k] == doctest::Approx((1 - gn / gd) / (1 - fn / fd)).epsilon(1e-12));
    }
    CHECK((is_missing(est.F.values[k]) || (est.F.values[k] >= 0.0 && est.F.values[k] <= 1.0)));
  }
}

TEST_CASE("F is unbiased for Poisson") {
  const double lambda = 10.0;
  const DistanceGrid grid({0.1, 0.3});
  Rng rng(24);
  std::vector<double> f1, f3;
  for (int rep = 0; rep < 500; ++rep) {
    const FgjCurves c = estimate_fgj(poisson_pattern(lambda, BandWindow::full_sphere(), rng), grid);
    f1.push_back(c.F.values[0]);
    f3.push_back(c.F.values[1]);
  }
  for (auto [r, vals] : {std::pair{0.1, &f1}, std::pair{0.3, &f3}}) {
    const auto ms = test::mean_se(*vals);
    const double expect = 1.0 - std::exp(-lambda * kTwoPi * (1 - std::cos(r)));
    CHECK_MESSAGE(std::abs(ms.mean - expect) <= 3.0 * ms.se, "r=", r);
  }
}

TEST_CASE("J stays near one for dense Poisson patterns") {
  // 1 - F(r) is estimated from about n_ref exp(-lambda 2pi (1 - cos r)) empty
  // reference caps, so J is only stable while that count is large (r <= 0.1 here).
  const double lambda = 40.0;  // about 500 points
  const DistanceGrid grid = DistanceGrid::linspace(0.0, 0.1, 11);
  Rng rng(25);
  std::vector<int> per_r(grid.size(), 0);
  for (int rep = 0; rep < 100; ++rep) {
    const FgjCurves c = estimate_fgj(poisson_pattern(lambda, BandWindow::full_sphere(), rng), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double j = c.J.values[k];
      per_r[k] += !is_missing(j) && j >= 0.8 && j <= 1.2;
    }
  }
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK_MESSAGE(per_r[k] >= 90, "r=", grid[k]);
}

TEST_CASE("estimators are invariant under rotations about the pole") {
  Rng rng(26);
  const BandWindow w = BandWindow::band_complement(1.0, 1.8);
  const PointPattern p = poisson_pattern(12.0, w, rng);
  const auto rot = test::z_rotation(0.77);
  std::vector<UnitVector> moved;
  for (const auto& u : p.points()) moved.push_back(rot.apply(u));
  const PointPattern q(w, moved);
  const DistanceGrid grid = DistanceGrid::linspace(0.0, 0.9, 91);
  const auto lam = IntensityModel::constant(12.0);
  const SummaryCurve ka = estimate_k_inhom(p, lam, grid), kb = estimate_k_inhom(q, lam, grid);
  const FgjCurves a = estimate_fgj(p, grid), b = estimate_fgj(q, grid);
  const SummaryCurve ga = estimate_pcf(p, lam, grid, 0.05), gb = estimate_pcf(q, lam, grid, 0.05);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (is_missing(ka.values[k])) {
      CHECK(is_missing(kb.values[k]));
      continue;
    }
    CHECK(std::abs(ka.values[k] - kb.values[k]) <= 1e-10);
    CHECK(std::abs(ga.values[k] - gb.values[k]) <= 1e-10);
    if (!is_missing(a.G.values[k])) CHECK(std::abs(a.G.values[k] - b.G.values[k]) <= 1e-10);
  }

  // Arbitrary rotation on the full sphere.
  const PointPattern full = poisson_pattern(12.0, BandWindow::full_sphere(), rng);
  const auto r3 = test::random_rotation(rng);
  std::vector<UnitVector> turned;
  for (const auto& u : full.points()) turned.push_back(r3.apply(u));
  const SummaryCurve k1 = estimate_k_inhom(full, lam, grid);
  const SummaryCurve k2 = estimate_k_inhom(PointPattern(BandWindow::full_sphere(), turned), lam, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(k1.values[k] - k2.values[k]) <= 1e-10);
}

TEST_CASE("pair correlation estimate for Poisson is near one") {
  Rng rng(27);
  const DistanceGrid grid({0.2, 0.5});
  std::vector<double> g2, g5;
  for (int rep = 0; rep < 200; ++rep) {
    const SummaryCurve g = estimate_pcf(poisson_pattern(10.0, BandWindow::full_sphere(), rng),
                                        IntensityModel::constant(10.0), grid, 0.05);
    g2.push_back(g.values[0]);
    g5.push_back(g.values[1]);
  }
  for (const auto* v : {&g2, &g5}) {
    const auto ms = test::mean_se(*v);
    CHECK(std::abs(ms.mean - 1.0) <= 3.0 * ms.se);
  }
  CHECK_THROWS_AS(estimate_pcf(PointPattern(), IntensityModel::constant(1.0), grid, 0.0), Error);
}

TEST_CASE("nearest distances") {
  const std::vector<UnitVector> pts{UnitVector::north_pole(), SphericalCoord{0.4, 0.0}.to_unit_vector(),
                                    SphericalCoord{1.0, 1.0}.to_unit_vector()};
  const auto d = nearest_distances(pts, pts, true);
  CHECK(d[0] == doctest::Approx(0.4));
  CHECK(d[1] == doctest::Approx(0.4));
  const auto self = nearest_distances(pts, pts, false);
  for (double v : self) CHECK(v == doctest::Approx(0.0).scale(1.0));
  const auto none = nearest_distances(pts, std::span<const UnitVector>{}, false);
  CHECK(std::isinf(none[0]));
}
