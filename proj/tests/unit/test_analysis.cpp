#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "samplesize/analysis.hpp"
#include "samplesize/error.hpp"

using namespace samplesize;

namespace {

const CurveModel kInverse(ModelKind::Inverse, {0.1, 0.5, -0.5});

CurvePoint at(std::int64_t count, double accuracy) {
  CurvePoint p;
  p.count = count;
  p.fraction = count / 10000.0;
  p.accuracy = accuracy;
  p.role = Role::Test;
  return p;
}

}  // namespace

TEST_CASE("size grid") {
  auto g = SizeGrid::uniform(10000);
  REQUIRE(g.size() == 100);
  CHECK(g.fractions()[0] == 0.01);
  CHECK(g.fractions()[99] == 1.0);
  CHECK(g.counts()[5] == 600);
  CHECK(g.counts()[99] == 10000);
  CHECK(std::is_sorted(g.counts().begin(), g.counts().end()));

  auto tiny = SizeGrid::uniform(10, 0.01);
  CHECK(tiny.counts()[0] == 1);  // rounds to 0, floored at 1

  CHECK_THROWS_AS(SizeGrid(0, {0.5}), InvalidArgument);
  CHECK_THROWS_AS(SizeGrid(100, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(SizeGrid(100, {0.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(SizeGrid(100, {0.5, 1.5}), InvalidArgument);
}

TEST_CASE("predict_curve") {
  SUBCASE("constant inverse") {
    CurveModel flat(ModelKind::Inverse, {0.1, 0.0, -0.5});
    for (const auto& p : predict_curve(flat, SizeGrid::uniform(777, 0.05)))
      CHECK(p.accuracy == doctest::Approx(0.9).epsilon(1e-15));
  }
  SUBCASE("exp at ten percent") {
    CurveModel m(ModelKind::Exp, {0.7, 0.05});
    auto pts = predict_curve(m, SizeGrid(10000, {0.1}));
    CHECK(pts[0].count == 1000);
    CHECK(pts[0].accuracy == doctest::Approx(0.98877628123592801).epsilon(1e-14));
  }
  SUBCASE("clamp above one") {
    CurveModel m(ModelKind::Exp, {1.07, 0.0});
    auto pts = predict_curve(m, SizeGrid(100, {0.5}));
    CHECK(pts[0].accuracy == 1.0);
    CHECK(pts[0].raw == doctest::Approx(1.07));
    CHECK(pts[0].clamped);
  }
}

TEST_CASE("clamp flag iff raw leaves [0,1]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(0.0, 2.0), b(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    CurveModel m(ModelKind::Exp, {a(rng), b(rng)});
    for (const auto& p : predict_curve(m, SizeGrid::uniform(5000, 0.05))) {
      bool outside = p.raw < 0.0 || p.raw > 1.0;
      CHECK(p.clamped == outside);
      CHECK(p.accuracy >= 0.0);
      CHECK(p.accuracy <= 1.0);
    }
  }
}

TEST_CASE("mae") {
  // Inverse(0.2, 0, c) predicts 0.8 everywhere.
  CurveModel at08(ModelKind::Inverse, {0.2, 0.0, -1.0});
  std::vector<CurvePoint> pts = {at(100, 0.82), at(200, 0.78)};
  auto r = mae(at08, pts);
  CHECK(r.mae == doctest::Approx(0.02).epsilon(1e-12));
  REQUIRE(r.abs_errors.size() == 2);

  std::vector<CurvePoint> own;
  for (std::int64_t n = 100; n <= 1000; n += 100)
    own.push_back(at(n, evaluate(kInverse, n)));
  CHECK(mae(kInverse, own).mae < 1e-9);

  CHECK_THROWS_AS(mae(kInverse, std::vector<CurvePoint>{}), InvalidArgument);
}

TEST_CASE("mae uses clamped predictions") {
  CurveModel over(ModelKind::Exp, {1.1, 0.0});
  std::vector<CurvePoint> pts = {at(100, 0.95)};
  CHECK(mae(over, pts).mae == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("mae is order independent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  std::vector<CurvePoint> pts;
  for (std::int64_t n = 100; n <= 3000; n += 100) pts.push_back(at(n, u(rng)));
  double base = mae(kInverse, pts).mae;
  for (int i = 0; i < 20; ++i) {
    std::shuffle(pts.begin(), pts.end(), rng);
    CHECK(mae(kInverse, pts).mae == base);
  }
}

TEST_CASE("saturation closed form") {
  auto s = find_saturation(kInverse, SizeGrid::uniform(10000), 0.2);
  CHECK(s.saturated);
  CHECK(s.saturation_count == 600);
  CHECK(s.saturation_fraction == 0.06);
  // 0.9 - 0.5 / sqrt(600)
  CHECK(s.predicted_accuracy ==
        doctest::Approx(0.87958758547680685).epsilon(1e-14));
  CHECK_FALSE(s.l1_distance.has_value());

  auto l1 = l1_at_reference(s, 0.90);
  REQUIRE(l1.l1_distance.has_value());
  CHECK(*l1.l1_distance == doctest::Approx(2.0412414523193151).epsilon(1e-12));
  CHECK(*l1_at_reference(s, s.predicted_accuracy).l1_distance == 0.0);
}

TEST_CASE("saturation edge cases") {
  SUBCASE("constant model saturates at the second point") {
    CurveModel flat(ModelKind::Inverse, {0.1, 0.0, -0.5});
    auto g = SizeGrid::uniform(10000);
    auto s = find_saturation(flat, g, 0.01);
    CHECK(s.saturated);
    CHECK(s.saturation_count == g.counts()[1]);
  }
  SUBCASE("gain exactly alpha is not saturation") {
    // N / 2^16 on a grid of 128-example steps gains exactly 2^-9 per step.
    CurveModel linear(ModelKind::Exp, {std::ldexp(1.0, -16), 1.0});
    auto g = SizeGrid::uniform(12800);
    auto s = find_saturation(linear, g, 100.0 * std::ldexp(1.0, -9));
    CHECK_FALSE(s.saturated);
    CHECK(s.saturation_count == 12800);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(find_saturation(kInverse, SizeGrid::uniform(100), 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(find_saturation(kInverse, SizeGrid(100, {1.0}), 0.2),
                    InvalidArgument);
    CHECK_THROWS_AS(
        find_saturation(kInverse, SizeGrid(100, {0.1, 0.2, 0.5}), 0.2),
        InvalidArgument);
  }
}

TEST_CASE("smaller alpha never saturates earlier") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> a(0.05, 0.3), b(0.1, 3.0),
      c(-1.0, -0.1);
  auto g = SizeGrid::uniform(20000);
  for (int i = 0; i < 50; ++i) {
    CurveModel m(ModelKind::Inverse, {a(rng), b(rng), c(rng)});
    std::int64_t prev = 0;
    for (double alpha : {2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.01}) {
      auto s = find_saturation(m, g, alpha);
      CHECK(s.saturation_count >= prev);
      prev = s.saturation_count;
    }
  }
}

TEST_CASE("required size") {
  auto g = SizeGrid::uniform(10000);
  auto r = required_size(kInverse, 0.875, g);
  CHECK(r.reachable);
  CHECK(r.count == 400);
  CHECK(r.predicted_accuracy == 0.875);

  auto far = required_size(kInverse, 0.95, g);
  CHECK_FALSE(far.reachable);
  REQUIRE(far.asymptote.has_value());
  CHECK(*far.asymptote == doctest::Approx(0.9).epsilon(1e-15));

  auto zero = required_size(kInverse, 0.0, g);
  CHECK(zero.reachable);
  CHECK(zero.count == g.counts()[0]);

  CHECK_THROWS_AS(required_size(kInverse, 1.5, g), InvalidArgument);
}

TEST_CASE("domain errors name the grid point") {
  CurveModel bad(ModelKind::Pow4, {0.9, -1.0, 10.0, 0.5});
  try {
    predict_curve(bad, SizeGrid::uniform(100, 0.5));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("count") != std::string::npos);
  }
}
