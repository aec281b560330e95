#include <nsgeo/covariance.hpp>

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace nsgeo;
namespace ts = testsupport;

namespace {

NsModel unit_model(const CorrelationFamily& family) {
  NsModel m;
  m.family = family;
  return m;
}

}  // namespace

TEST_SUITE("covariance") {

TEST_CASE("stationary reductions at unit distance") {
  const NsModel expo = unit_model(ExponentialFamily{1.0});
  CHECK(ns_correlation({0, 0}, {1, 0}, expo) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const NsModel cauchy = unit_model(CauchyFamily{1.0, 1.0, std::nullopt});
  CHECK(ns_correlation({0, 0}, {0, 1}, cauchy) == doctest::Approx(0.5).epsilon(1e-12));

  const NsModel gauss = unit_model(GaussianFamily{1.0});
  CHECK(ns_correlation({0, 0}, {1, 0}, gauss) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("Matern nu = 1/2 equals the exponential family") {
  std::mt19937_64 eng(42);
  NsModel matern = ts::random_model(eng, MaternFamily{1.0, 0.5, std::nullopt});
  NsModel expo = matern;
  expo.family = ExponentialFamily{1.0};
  for (int i = 0; i < 100; ++i) {
    const Point x = ts::random_point(eng, -4.0, 4.0);
    const Point y = ts::random_point(eng, -4.0, 4.0);
    CHECK(ns_correlation(x, y, matern) ==
          doctest::Approx(ns_correlation(x, y, expo)).epsilon(1e-10));
  }
}

TEST_CASE("matern_correlation limits and domain") {
  CHECK(matern_correlation(1.5, 0.0) == 1.0);
  CHECK(matern_correlation(0.5, 1e-12) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(matern_correlation(25.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(matern_correlation(0.5, 650.0) >= 0.0);
  CHECK(matern_correlation(0.5, 650.0) < 1e-200);
  CHECK_THROWS_AS(matern_correlation(60.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(matern_correlation(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("correlation is 1 on the diagonal and symmetric") {
  std::mt19937_64 eng(1234);
  for (int rep = 0; rep < 20; ++rep) {
    const NsModel model = ts::random_model(eng, ExponentialFamily{1.0});
    const Point x = ts::random_point(eng, -5.0, 5.0);
    const Point y = ts::random_point(eng, -5.0, 5.0);
    CHECK(ns_correlation(x, x, model) == 1.0);
    CHECK(ns_correlation(x, y, model) ==
          doctest::Approx(ns_correlation(y, x, model)).epsilon(1e-14));
    CHECK(std::abs(ns_correlation(x, y, model)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("ns_covariance: sigma contract") {
  NsModel m = unit_model(ExponentialFamily{1.0});
  m.sigma = constant_field(2.0);
  CHECK(ns_covariance({1, 1}, {1, 1}, m) == doctest::Approx(4.0));

  std::mt19937_64 eng(99);
  const NsModel model = ts::random_model(eng, CauchyFamily{1.0, 1.2, std::nullopt});
  for (int i = 0; i < 20; ++i) {
    const Point x = ts::random_point(eng, -4.0, 4.0);
    const Point y = ts::random_point(eng, -4.0, 4.0);
    CHECK(ns_covariance(x, y, model) ==
          doctest::Approx(model.sigma(x) * model.sigma(y) * ns_correlation(x, y, model))
              .epsilon(1e-14));
  }
}

TEST_CASE("sigma(x) = 1, sigma(y) = 3 with rho = 0.5 gives 1.5") {
  NsModel m = unit_model(ExponentialFamily{1.0});
  m.sigma = [](Point p) { return p.x < 0.5 ? 1.0 : 3.0; };
  const Point x{0.0, 0.0};
  const Point y{std::log(2.0), 0.0};  // rho = exp(-log 2) = 0.5
  CHECK(ns_correlation(x, y, m) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ns_covariance(x, y, m) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("stationary fields depend on the lag only") {
  std::mt19937_64 eng(7);
  NsModel model = unit_model(MaternFamily{1.0, 1.7, std::nullopt});
  model.anisotropy = constant_field(AnisotropyParams(1.6, 0.9, 0.8));
  model.sigma = constant_field(1.3);
  for (int i = 0; i < 50; ++i) {
    const Point x = ts::random_point(eng, -3.0, 3.0);
    const Point y = ts::random_point(eng, -3.0, 3.0);
    const Point shift = ts::random_point(eng, -10.0, 10.0);
    const double c0 = ns_covariance(x, y, model);
    const double c1 = ns_covariance(x + shift, y + shift, model);
    CHECK(c0 == doctest::Approx(c1).epsilon(1e-12));
  }
}

TEST_CASE("varying Matern order: pair order is the average") {
  MaternFamily family{1.0, 1.0, ScalarField([](Point p) { return p.x < 0.0 ? 1.0 : 3.0; })};
  CHECK(matern_pair_order(family, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(2.0));
  CHECK(matern_pair_order(family, {-1.0, 0.0}, {-2.0, 0.0}) == doctest::Approx(1.0));

  // Gamma-ratio prefactor keeps the correlation within [-1, 1].
  NsModel m = unit_model(CorrelationFamily(family));
  std::mt19937_64 eng(5);
  for (int i = 0; i < 50; ++i) {
    const Point x = ts::random_point(eng, -3.0, 3.0);
    const Point y = ts::random_point(eng, -3.0, 3.0);
    CHECK(std::abs(ns_correlation(x, y, m)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("covariance_matrix: single point and decay limit") {
  NsModel m = unit_model(ExponentialFamily{1.0});
  m.sigma = constant_field(2.0);
  const Eigen::MatrixXd c1 = covariance_matrix({{0.5, 0.5}}, m);
  CHECK(c1.rows() == 1);
  CHECK(c1(0, 0) == doctest::Approx(4.0));

  // Widely separated points: approximately diagonal.
  std::vector<Point> far = {{0, 0}, {1000, 0}, {0, 1000}};
  const Eigen::MatrixXd c = covariance_matrix(far, m);
  for (int i = 0; i < 3; ++i) {
    CHECK(c(i, i) == doctest::Approx(4.0));
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(c(i, j)) < 1e-12);
  }
}

TEST_CASE("covariance_matrix rejects duplicate points") {
  const NsModel m = unit_model(ExponentialFamily{1.0});
  CHECK_THROWS_AS(covariance_matrix({{0, 0}, {0, 0}}, m), std::invalid_argument);
}

TEST_CASE("positive definiteness across families (random smooth fields)") {
  std::mt19937_64 eng(20240812);
  const std::vector<CorrelationFamily> families = {
      ExponentialFamily{1.0}, GaussianFamily{1.0}, MaternFamily{1.0, 1.5, std::nullopt},
      CauchyFamily{1.0, 0.8, std::nullopt}};
  for (int rep = 0; rep < 20; ++rep) {
    const CorrelationFamily family = families[static_cast<std::size_t>(rep) % families.size()];
    const NsModel model = ts::random_model(eng, family);
    std::uniform_int_distribution<std::size_t> nn(8, 40);
    const std::vector<Point> pts = ts::scatter(eng, nn(eng), 0.0, 8.0);
    const Eigen::MatrixXd c = covariance_matrix(pts, model);
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    CHECK(lo >= -1e-8 * hi);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(c).info() == Eigen::Success);
  }
}

TEST_CASE("stationary baseline: nugget and spherical structures") {
  StationaryBaseline nugget_only;
  nugget_only.structures.push_back(NuggetStructure{1.0});
  CHECK(stationary_covariance({0, 0}, nugget_only) == doctest::Approx(1.0));
  CHECK(stationary_covariance({0.1, 0}, nugget_only) == doctest::Approx(0.0));

  StationaryBaseline sph;
  StationaryStructure s;
  s.profile = StationaryStructure::Profile::spherical;
  s.sill = 1.0;
  s.ranges = AnisotropyParams(2.0, 2.0, 0.0);
  sph.structures.push_back(s);
  CHECK(stationary_covariance({2.0, 0.0}, sph) == doctest::Approx(0.0));
  CHECK(stationary_covariance({1.0, 0.0}, sph) == doctest::Approx(0.3125));

  StationaryBaseline nested;
  nested.structures.push_back(NuggetStructure{0.5});
  nested.structures.push_back(s);
  CHECK(nested.total_sill() == doctest::Approx(1.5));
  CHECK(stationary_covariance({0, 0}, nested) == doctest::Approx(1.5));
  CHECK(stationary_covariance({1.0, 0.0}, nested) == doctest::Approx(0.3125));
}

}  // TEST_SUITE
