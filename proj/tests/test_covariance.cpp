#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "sphcox/covariance.hpp"
#include "sphcox/error.hpp"
#include "test_util.hpp"

using namespace sphcox;

namespace {

double pos(double t) { return std::max(t, 0.0); }

// Table formulas evaluated directly.
double oracle_c0(const CovarianceModel& m, double r) {
  const ShapeParams& p = m.params();
  const double x = r / p.phi;
  switch (m.family()) {
    case Family::kPoweredExponential: return std::exp(-std::pow(r, p.alpha) / p.phi);
    case Family::kMatern:
      if (r == 0.0) return 1.0;
      return 2.0 / boost::math::tgamma(p.nu) * std::pow(r / (2.0 * p.phi), p.nu) *
             boost::math::cyl_bessel_k(p.nu, x);
    case Family::kGeneralizedCauchy: return std::pow(1.0 + std::pow(x, p.alpha), -p.tau / p.alpha);
    case Family::kDagum: {
      const double q = std::pow(x, p.tau);
      return 1.0 - std::pow(q / (1.0 + q), p.alpha / p.tau);
    }
    case Family::kMultiquadric:
      return std::pow((1 - p.delta) * (1 - p.delta) / (1 + p.delta * p.delta - 2 * p.delta * std::cos(r)), p.tau);
    case Family::kSinePower: return 1.0 - std::pow(std::sin(r / 2.0), p.alpha);
    case Family::kSpherical: return (1.0 + 0.5 * x) * pos(1.0 - x) * pos(1.0 - x);
    case Family::kAskey: return std::pow(pos(1.0 - x), p.tau);
    case Family::kC2Wendland: return (1.0 + p.tau * x) * std::pow(pos(1.0 - x), p.tau);
    case Family::kC4Wendland:
      return (1.0 + p.tau * x + (p.tau * p.tau - 1.0) / 3.0 * x * x) * std::pow(pos(1.0 - x), p.tau);
  }
  return 0.0;
}

}  // namespace

TEST_CASE("family names round trip") {
  for (Family f : kAllFamilies) CHECK(parse_family(family_name(f)) == f);
  CHECK_THROWS_AS(parse_family("gaussian"), Error);
}

TEST_CASE("parameter ranges are enforced") {
  CHECK_THROWS_AS(CovarianceModel::multiquadric(1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(CovarianceModel::multiquadric(1.0, 0.5, 0.0), Error);
  CHECK_THROWS_AS(CovarianceModel::multiquadric(0.0, 0.5, 1.0), Error);
  CHECK_THROWS_AS(CovarianceModel::matern(1.0, 0.6, 1.0), Error);
  CHECK_THROWS_AS(CovarianceModel::powered_exponential(1.0, 1.5, 1.0), Error);
  CHECK_THROWS_AS(CovarianceModel::dagum(1.0, 0.8, 1.0, 0.5), Error);
  CHECK_THROWS_AS(CovarianceModel::sine_power(1.0, 2.0), Error);
  CHECK_THROWS_AS(CovarianceModel::askey(1.0, 1.0, 1.5), Error);
  CHECK_THROWS_AS(CovarianceModel::c2_wendland(1.0, 1.0, 3.0), Error);
  CHECK_THROWS_AS(CovarianceModel::c2_wendland(1.0, 3.5, 5.0), Error);
  CHECK_THROWS_AS(CovarianceModel::c4_wendland(1.0, 1.0, 5.0), Error);
}

TEST_CASE("evaluate matches the table formulas") {
  Rng rng(101);
  for (Family f : kAllFamilies) {
    for (int draw = 0; draw < 30; ++draw) {
      const CovarianceModel m = test::random_model(f, rng);
      for (int i = 0; i <= 200; ++i) {
        const double r = kPi * i / 200.0;
        const double expect = oracle_c0(m, r);
        CHECK_MESSAGE(std::abs(m.correlation(r) - expect) <= 1e-10 * std::max(1.0, std::abs(expect)),
                      family_name(f), " r=", r);
        CHECK(m.evaluate(r) == doctest::Approx(m.variance() * m.correlation(r)));
      }
    }
  }
}

TEST_CASE("multiquadric special values") {
  const auto m = CovarianceModel::multiquadric(1.7, 0.6, 2.5);
  CHECK(m.evaluate(0.0) == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(m.evaluate(kPi) == doctest::Approx(1.7 * std::pow(0.16 / 2.56, 2.5)).epsilon(1e-13));
}

TEST_CASE("Matern at nu = 1/2 equals the exponential model") {
  for (double phi : {0.2, 1.0, 3.0}) {
    const auto mat = CovarianceModel::matern(1.0, 0.5, phi);
    const auto pe = CovarianceModel::powered_exponential(1.0, 1.0, phi);
    for (int i = 0; i <= 400; ++i) {
      const double r = kPi * i / 400.0;
      CHECK(std::abs(mat.correlation(r) - pe.correlation(r)) < 1e-10);
    }
  }
}

TEST_CASE("variogram") {
  Rng rng(3);
  for (Family f : kAllFamilies) {
    const auto m = test::random_model(f, rng);
    CHECK(m.variogram(0.0) == 0.0);
    for (double r : {1e-8, 1e-3, 0.5, 2.0}) {
      const double direct = m.evaluate(0.0) - m.evaluate(r);
      CHECK(std::abs(m.variogram(r) - direct) <= 1e-13 + 1e-9 * std::abs(direct));
    }
  }
  // Multiquadric with tau < 1: gamma <= sigma^2 p (1 - cos r) / (1 - p cos r)
  // <= p r^2 / (2 (1 - p)).
  const double p = 2 * 0.5 / (1 + 0.25);
  for (double tau : {0.1, 0.5, 0.9}) {
    const auto m = CovarianceModel::multiquadric(1.0, 0.5, tau);
    for (int i = 1; i <= 300; ++i) {
      const double r = kPi * i / 300.0;
      CHECK(m.variogram(r) <= p * r * r / (2.0 * (1.0 - p)) + 1e-15);
    }
  }
  const auto sph = CovarianceModel::spherical(1.0, 1.0);
  CHECK(sph.variogram(0.1) == doctest::Approx(1.0 - 1.05 * 0.81).epsilon(1e-14));
}

TEST_CASE("small-distance deficit is computed without cancellation") {
  const auto m = CovarianceModel::multiquadric(1.0, 0.5, 1.0);
  // 1 - c0(r) ~ p r^2 / (2 (1 - delta)^2) * tau ... check against the series.
  const double r = 1e-7;
  const double d = 0.5;
  const double q = 4 * d * std::sin(r / 2) * std::sin(r / 2) / ((1 - d) * (1 - d));
  CHECK(m.correlation_deficit(r) == doctest::Approx(q - q * q).epsilon(1e-9));
}

TEST_CASE("limit constants against the tabulated values") {
  auto check = [](const CovarianceModel& m, double A, double B) {
    const LimitConstants lc = limit_constants(m);
    CHECK(lc.A == doctest::Approx(A).epsilon(1e-14));
    CHECK(lc.B == doctest::Approx(B).epsilon(1e-14));
  };
  check(CovarianceModel::generalized_cauchy(1.0, 0.7, 1.3, 2.0), 0.7, 2.0 / (0.7 * std::pow(1.3, 0.7)));
  check(CovarianceModel::dagum(1.0, 0.4, 1.3, 0.9), 0.4, std::pow(1.3, -0.4));
  check(CovarianceModel::sine_power(1.0, 1.2), 1.2, std::pow(2.0, -1.2));
  check(CovarianceModel::spherical(1.0, 0.8), 1.0, 3.0 / (2.0 * 0.8));
  check(CovarianceModel::askey(1.0, 0.8, 3.0), 1.0, 3.0 / 0.8);
  check(CovarianceModel::c2_wendland(1.0, 0.8, 5.0), 2.0, 5.0 * 6.0 / (0.64 * 2.0));
  check(CovarianceModel::powered_exponential(1.0, 0.6, 2.0), 0.6, 0.5);
  const double nu = 0.3, phi = 0.7;
  const double a_nu = kPi / (std::sin(kPi * nu) * std::tgamma(nu));
  check(CovarianceModel::matern(1.0, nu, phi), 2 * nu, a_nu / (std::pow(2 * phi, 2 * nu) * std::tgamma(nu + 1)));
  // C4-Wendland: the small-r expansion gives (tau+1)(tau+2)/(6 phi^2).
  check(CovarianceModel::c4_wendland(1.0, 0.8, 7.0), 2.0, 8.0 * 9.0 / (6.0 * 0.64));
  CHECK_THROWS_AS(limit_constants(CovarianceModel::multiquadric(1.0, 0.5, 1.0)), Error);
  try {
    limit_constants(CovarianceModel::multiquadric(1.0, 0.5, 1.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupported);
  }
}

TEST_CASE("numeric limit ratios converge to B") {
  Rng rng(77);
  for (Family f : kAllFamilies) {
    if (f == Family::kMultiquadric) continue;
    for (int draw = 0; draw < 20; ++draw) {
      CovarianceModel m = test::random_model(f, rng);
      if (f == Family::kPoweredExponential) m = CovarianceModel::powered_exponential(1.0, 1.0, m.params().phi);
      const LimitConstants lc = limit_constants(m);
      double ratios[3];
      const double rs[3] = {1e-3, 1e-4, 1e-5};
      for (int k = 0; k < 3; ++k) ratios[k] = m.correlation_deficit(rs[k]) / std::pow(rs[k], lc.A);
      int monotone = 0;
      for (int k = 0; k < 2; ++k) {
        monotone += std::abs(ratios[k + 1] - lc.B) <= std::abs(ratios[k] - lc.B);
      }
      // Two of the three steps: from r = 1e-2 as well.
      monotone += std::abs(ratios[0] - lc.B) <= std::abs(m.correlation_deficit(1e-2) / std::pow(1e-2, lc.A) - lc.B);
      CHECK_MESSAGE(monotone >= 2, family_name(f));
      // The relative error decays at least like r^min(A, 1).
      const double err0 = std::abs(ratios[0] / lc.B - 1.0);
      const double err2 = std::abs(ratios[2] / lc.B - 1.0);
      CHECK_MESSAGE(err2 <= 2.0 * err0 * std::pow(1e-2, std::min(lc.A, 1.0)) + 1e-6, family_name(f));
    }
  }
  const auto mat = CovarianceModel::matern(1.0, 0.5, 1.0);
  CHECK(limit_constants(mat).A == doctest::Approx(1.0));
  CHECK(std::abs(mat.correlation_deficit(1e-6) / 1e-6 / limit_constants(mat).B - 1.0) < 0.01);
}

TEST_CASE("Hoelder certificates") {
  const auto mq = CovarianceModel::multiquadric(1.0, 0.5, 2.0);
  const HoelderCertificate c = holder_certificate(mq);
  CHECK(c.s == doctest::Approx(std::pow(0.2, 1.0 / 1.51)));
  CHECK(c.ell == doctest::Approx(0.98));
  CHECK(c.m == doctest::Approx(0.8));
  CHECK(holder_certificate(CovarianceModel::multiquadric(1.0, 0.01, 1.0)).s > 0.98);
  CHECK(verify_certificate(mq, c, 10000));

  // Halving m and shrinking s: may fail; only the call must be well-defined.
  HoelderCertificate weak = c;
  weak.m = c.m / 2.0;
  weak.s = 1e-3;
  (void)verify_certificate(mq, weak, 10000);

  CHECK(verify_certificate(CovarianceModel::sine_power(1.0, 1.0), {1.0, 0.9, 2.0}, 10000));
  CHECK_FALSE(verify_certificate(CovarianceModel::sine_power(1.0, 1.0), {1.0, 0.9, 1e-3}, 10000));

  Rng rng(2024);
  for (Family f : kAllFamilies) {
    for (int draw = 0; draw < 20; ++draw) {
      const auto m = test::random_model(f, rng);
      const HoelderCertificate cert = holder_certificate(m);
      CHECK(cert.s > 0.0);
      CHECK(cert.s <= 1.0);
      CHECK(cert.ell > 0.0);
      CHECK(cert.ell < 1.0);
      CHECK(cert.m > 0.0);
      CHECK_MESSAGE(verify_certificate(m, cert, 10000), family_name(f));
    }
  }
}

TEST_CASE("correlations are bounded with unit value at zero") {
  Rng rng(55);
  for (Family f : kAllFamilies) {
    for (int draw = 0; draw < 100; ++draw) {
      const auto m = test::random_model(f, rng);
      CHECK(m.correlation(0.0) == 1.0);
      for (int i = 0; i <= 100; ++i) CHECK(std::abs(m.correlation(kPi * i / 100.0)) <= 1.0);
    }
  }
}

TEST_CASE("Gram matrices are positive semidefinite") {
  Rng rng(808);
  std::uniform_int_distribution<int> size(2, 40);
  for (Family f : kAllFamilies) {
    for (int set = 0; set < 50; ++set) {
      const auto m = test::random_model(f, rng);
      const auto pts = uniform_on_sphere(static_cast<std::size_t>(size(rng)), rng);
      Eigen::MatrixXd g(pts.size(), pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < pts.size(); ++j) g(i, j) = m.evaluate(geodesic_distance(pts[i], pts[j]));
      }
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff();
      CHECK_MESSAGE(min_eig >= -1e-8 * m.variance(), family_name(f));
    }
  }
}
