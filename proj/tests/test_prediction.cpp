#include <nsgeo/prediction.hpp>

#include <nsgeo/simulation.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace nsgeo;
namespace ts = testsupport;

namespace {

Dataset simulated_dataset(std::mt19937_64& eng, const NsModel& model, std::size_t n, double lo,
                          double hi, std::uint64_t seed) {
  const std::vector<Point> pts = ts::scatter(eng, n, lo, hi);
  return Dataset(pts, unconditional_simulate(model, pts, seed, {0, true}));
}

}  // namespace

TEST_SUITE("prediction") {

TEST_CASE("exact interpolation at a data location, sd = 0") {
  std::mt19937_64 eng(20240818);
  const NsModel model = ts::random_model(eng, ExponentialFamily{1.0});
  const Dataset data = simulated_dataset(eng, model, 25, 0.0, 6.0, 4);

  const KrigingResult r = krige(data, {data.locations[7]}, model);
  CHECK(r.predictions[0] == doctest::Approx(data.values[7]).epsilon(1e-8));
  CHECK(r.sd[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("single observation reduces to the hand-solved 1x1 system") {
  NsModel model;
  model.family = ExponentialFamily{1.0};
  model.mean = [](Point p) { return 1.0 + 0.5 * p.x; };
  model.sigma = [](Point p) { return p.x < 0.5 ? 2.0 : 1.0; };
  const Dataset data({{0.0, 0.0}}, {3.0});
  const Point s0{1.0, 0.0};

  const double rho = ns_correlation({0, 0}, s0, model);
  const double m0 = model.mean(s0);
  const double m1 = model.mean({0, 0});
  const double s_at0 = model.sigma({0, 0});
  const double s_at_target = model.sigma(s0);
  const double eta = s_at_target * s_at0 * rho / (s_at0 * s_at0);

  const KrigingResult r = krige(data, {s0}, model);
  CHECK(r.predictions[0] == doctest::Approx(m0 + eta * (3.0 - m1)).epsilon(1e-12));
  const double q = s_at_target * s_at_target * (1.0 - rho * rho);
  CHECK(r.sd[0] == doctest::Approx(std::sqrt(q)).epsilon(1e-12));
}

TEST_CASE("far targets revert to the mean with prior variance") {
  NsModel model;
  model.family = ExponentialFamily{1.0};
  model.mean = constant_field(5.0);
  model.sigma = constant_field(1.7);
  const Dataset data({{0, 0}, {1, 1}, {2, 0}}, {4.0, 6.0, 5.5});
  const KrigingResult r = krige(data, {{500.0, 500.0}}, model);
  CHECK(r.predictions[0] == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(r.sd[0] == doctest::Approx(1.7).epsilon(1e-10));
}

TEST_CASE("kriging variance bounds and exactness on random models") {
  std::mt19937_64 eng(20240819);
  for (int rep = 0; rep < 10; ++rep) {
    const NsModel model = ts::random_model(eng, rep % 2 == 0
                                                    ? CorrelationFamily(ExponentialFamily{1.0})
                                                    : CorrelationFamily(MaternFamily{1.0, 1.2, {}}));
    const Dataset data = simulated_dataset(eng, model, 20, 0.0, 6.0, 100 + rep);
    const std::vector<Point> targets = ts::scatter(eng, 15, 0.0, 6.0);
    const KrigingResult r = krige(data, targets, model);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const double prior = model.sigma(targets[t]) * model.sigma(targets[t]);
      CHECK(r.sd[t] >= 0.0);
      CHECK(r.sd[t] * r.sd[t] <= prior + 1e-10);
    }
  }
}

TEST_CASE("linearity: a*Y + b kriges to a*pred + b") {
  std::mt19937_64 eng(20240820);
  NsModel model = ts::random_model(eng, ExponentialFamily{1.0});
  model.mean = [](Point p) { return 0.3 * p.x; };
  const Dataset data = simulated_dataset(eng, model, 18, 0.0, 5.0, 9);

  const double a = 2.5, b = -4.0;
  NsModel scaled = model;
  const ScalarField base_mean = model.mean;
  const ScalarField base_sigma = model.sigma;
  scaled.mean = [=](Point p) { return a * base_mean(p) + b; };
  scaled.sigma = [=](Point p) { return a * base_sigma(p); };
  Dataset sdata = data;
  for (double& v : sdata.values) v = a * v + b;

  const std::vector<Point> targets = ts::scatter(eng, 8, 0.0, 5.0);
  const KrigingResult r0 = krige(data, targets, model);
  const KrigingResult r1 = krige(sdata, targets, scaled);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    CHECK(r1.predictions[t] == doctest::Approx(a * r0.predictions[t] + b).epsilon(1e-9));
    CHECK(r1.sd[t] == doctest::Approx(a * r0.sd[t]).epsilon(1e-9));
  }
}

TEST_CASE("duplicated observation (equal value) leaves predictions unchanged") {
  std::mt19937_64 eng(20240821);
  const NsModel model = ts::random_model(eng, ExponentialFamily{1.0});
  const Dataset data = simulated_dataset(eng, model, 15, 0.0, 5.0, 3);

  Dataset dup = data;
  dup.locations.push_back(data.locations[4]);
  dup.values.push_back(data.values[4]);

  const std::vector<Point> targets = ts::scatter(eng, 6, 0.0, 5.0);
  const KrigingResult r0 = krige(data, targets, model);
  const KrigingResult r1 = krige(dup, targets, model);
  for (std::size_t t = 0; t < targets.size(); ++t)
    CHECK(r1.predictions[t] == doctest::Approx(r0.predictions[t]).epsilon(1e-6));
}

TEST_CASE("baseline: pure nugget predicts the constant mean with sd = sqrt(sill)") {
  StationaryBaseline nugget;
  nugget.structures.push_back(NuggetStructure{1.0});
  nugget.mean = 2.5;
  const Dataset data({{0, 0}, {1, 0}, {0, 1}}, {1.0, 4.0, 2.0});
  const KrigingResult r = krige_baseline(data, {{0.5, 0.5}, {3.0, 3.0}}, nugget);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(r.predictions[t] == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(r.sd[t] == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("baseline: symmetric 2-point configuration gets equal weights") {
  StationaryBaseline expo;
  StationaryStructure s;
  s.sill = 1.0;
  s.ranges = AnisotropyParams(2.0, 2.0, 0.0);
  expo.structures.push_back(s);
  expo.mean = 0.0;
  const Dataset data({{-1.0, 0.0}, {1.0, 0.0}}, {2.0, 4.0});

  // Hand-solved: by symmetry eta_1 = eta_2 = C(d)/(1 + C(2)).
  const double c_target = std::exp(-0.5);  // distance 1, range 2
  const double c_pair = std::exp(-1.0);    // distance 2
  const double eta = c_target / (1.0 + c_pair);
  const double expected = eta * (2.0 + 4.0);
  const KrigingResult r = krige_baseline(data, {{0.0, 0.0}}, expo);
  CHECK(r.predictions[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("constant-field NsModel and baseline agree") {
  NsModel ns;
  ns.family = ExponentialFamily{1.0};
  ns.sigma = constant_field(1.3);
  ns.mean = constant_field(0.7);
  ns.anisotropy = constant_field(AnisotropyParams(2.0, 1.0, 0.5));

  StationaryBaseline st;
  StationaryStructure s;
  s.sill = 1.3 * 1.3;
  s.ranges = AnisotropyParams(2.0, 1.0, 0.5);
  st.structures.push_back(s);
  st.mean = 0.7;

  std::mt19937_64 eng(20240822);
  const Dataset data = simulated_dataset(eng, ns, 20, 0.0, 5.0, 77);
  const std::vector<Point> targets = ts::scatter(eng, 10, 0.0, 5.0);
  const KrigingResult rn = krige(data, targets, ns);
  const KrigingResult rs = krige_baseline(data, targets, st);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    CHECK(rn.predictions[t] == doctest::Approx(rs.predictions[t]).epsilon(1e-10));
    CHECK(rn.sd[t] == doctest::Approx(rs.sd[t]).epsilon(1e-10));
  }
}

TEST_CASE("knn policy approximates global kriging") {
  std::mt19937_64 eng(20240823);
  const NsModel model = ts::random_model(eng, ExponentialFamily{1.0});
  const Dataset data = simulated_dataset(eng, model, 60, 0.0, 8.0, 11);
  const std::vector<Point> targets = ts::scatter(eng, 5, 1.0, 7.0);

  NeighborhoodPolicy knn;
  knn.force_knn = true;
  knn.k = 40;
  const KrigingResult global = krige(data, targets, model);
  const KrigingResult local = krige(data, targets, model, knn);
  for (std::size_t t = 0; t < targets.size(); ++t)
    CHECK(local.predictions[t] == doctest::Approx(global.predictions[t]).epsilon(0.05));
}

}  // TEST_SUITE
