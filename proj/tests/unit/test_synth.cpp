#include <cmath>
#include <vector>

#include "doctest.h"
#include "samplesize/error.hpp"
#include "samplesize/synth.hpp"

using namespace samplesize;

TEST_CASE("noiseless generation is the formula") {
  for (auto kind : kBaseKinds) {
    std::vector<double> params;
    if (kind == ModelKind::Exp) params = {0.45, 0.05};
    if (kind == ModelKind::Inverse) params = {0.1, 0.5, -0.5};
    if (kind == ModelKind::Pow4) params = {0.9, 0.01, 1.5, 0.8};
    CurveModel g(kind, params);
    SynthSpec spec{g, 25000, default_schedule(), {}, 0, "clean"};
    auto ds = generate(spec);
    REQUIRE(ds.points.size() == 28);
    for (const auto& p : ds.points) {
      CHECK(p.accuracy == evaluate(g, static_cast<double>(p.count)));
      CHECK(p.count == count_for_fraction(p.fraction, 25000));
    }
    CHECK(ds.with_role(Role::Train).size() == 10);
    CHECK(ds.with_role(Role::Test).size() == 10);
    CHECK(ds.with_role(Role::Gap).size() == 8);
  }
}

TEST_CASE("same seed, same dataset") {
  SynthSpec spec{CurveModel(ModelKind::Inverse, {0.1, 0.5, -0.5}), 25000,
                 default_schedule(), {0.01, false}, 12, "seeded"};
  auto a = generate(spec);
  CHECK(a == generate(spec));
  spec.rng_seed = 13;
  CHECK_FALSE(a == generate(spec));
}

TEST_CASE("accuracy is clamped") {
  SynthSpec spec{CurveModel(ModelKind::Exp, {0.99, 0.0}), 1000,
                 default_schedule(), {0.5, false}, 3, "loud"};
  for (const auto& p : generate(spec).points) {
    CHECK(p.accuracy >= 0.0);
    CHECK(p.accuracy <= 1.0);
  }
}

TEST_CASE("size-decay noise shrinks with sqrt of count") {
  // Fractions 0.01 and 1.0 of 10000 give counts 100 and 10000.
  SplitSchedule sched{{0.01}, {1.0}, {}};
  CurveModel flat(ModelKind::Inverse, {0.5, 0.0, -1.0});
  const int seeds = 1000;
  double s_small = 0.0, s_large = 0.0;
  for (int s = 0; s < seeds; ++s) {
    SynthSpec spec{flat, 10000, sched, {0.5, true},
                   static_cast<std::uint64_t>(s), "sd"};
    auto ds = generate(spec);
    s_small += std::pow(ds.points[0].accuracy - 0.5, 2);
    s_large += std::pow(ds.points[1].accuracy - 0.5, 2);
  }
  const double ratio = std::sqrt(s_large / s_small);
  CHECK(ratio == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("negative sigma is rejected") {
  SynthSpec spec{CurveModel(ModelKind::Exp, {0.5, 0.05}), 1000,
                 default_schedule(), {-0.1, false}, 0, "bad"};
  CHECK_THROWS_AS(generate(spec), InvalidArgument);
}

TEST_CASE("grid oracle") {
  CurveModel truth(ModelKind::Exp, {0.5, 0.04});
  SynthSpec spec{truth, 25000, default_schedule(), {}, 0, "oracle"};
  auto train = generate(spec).with_role(Role::Train);

  OracleGrid grid{0.0, 1.0, 101, 0.0, 0.2, 101};
  auto best = grid_oracle_fit(ModelKind::Exp, train, grid);
  CHECK(best.params[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(best.params[1] == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(best.rss >= 0.0);
  CHECK(best.rss < 1e-25);

  CHECK(grid_oracle_fit(ModelKind::Exp, train).rss >= 0.0);
  CHECK_THROWS_AS(grid_oracle_fit(ModelKind::Inverse, train), InvalidArgument);
  OracleGrid huge{0.0, 1.0, 20000, 0.0, 1.0, 20000};
  CHECK_THROWS_AS(grid_oracle_fit(ModelKind::Exp, train, huge),
                  InvalidArgument);
}
