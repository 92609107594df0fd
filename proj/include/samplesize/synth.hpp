#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "samplesize/curve_models.hpp"
#include "samplesize/dataio.hpp"

namespace samplesize {

// Gaussian accuracy noise. With size_decay the standard deviation at a point
// of n examples is sigma0 / sqrt(n); otherwise it is sigma0 everywhere.
struct NoiseModel {
  double sigma0 = 0.0;
  bool size_decay = false;
};

struct SynthSpec {
  CurveModel generator;
  std::int64_t total_size = 0;
  SplitSchedule schedule = default_schedule();
  NoiseModel noise;
  std::uint64_t rng_seed = 0;
  std::string name = "synthetic";
};

// One point per scheduled fraction with accuracy
// clamp(evaluate(generator, count) + noise, 0, 1). Deterministic in the seed.
CurveDataset generate(const SynthSpec& spec);

// A regular grid over the two parameters of Exp, inclusive of both ends.
struct OracleGrid {
  double a_lower = 0.0, a_upper = 2.0;
  int a_points = 101;
  double b_lower = -1.0, b_upper = 1.0;
  int b_points = 101;
};

struct OracleFit {
  std::vector<double> params;
  double rss = 0.0;
};

// Exhaustive minimum of the unweighted RSS of a*N^b over the grid. Only Exp
// is supported; grids above 1e8 cells are rejected.
OracleFit grid_oracle_fit(ModelKind kind, std::span<const CurvePoint> points,
                          const OracleGrid& grid = {});

}  // namespace samplesize
