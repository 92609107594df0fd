#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "samplesize/curve_models.hpp"
#include "samplesize/dataio.hpp"

namespace samplesize {

// Ordered size fractions of a dataset with N_total training examples.
class SizeGrid {
 public:
  // Throws InvalidArgument unless total_size >= 1 and fractions are strictly
  // increasing within (0,1].
  SizeGrid(std::int64_t total_size, std::vector<double> fractions);

  // step, 2*step, ..., up to 1.0; the default is the 1% grid.
  static SizeGrid uniform(std::int64_t total_size, double step = 0.01);

  std::int64_t total_size() const { return total_; }
  std::span<const double> fractions() const { return fractions_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::size_t size() const { return fractions_.size(); }

 private:
  std::int64_t total_;
  std::vector<double> fractions_;
  std::vector<std::int64_t> counts_;
};

struct PredictedPoint {
  double fraction = 0.0;
  std::int64_t count = 0;
  double raw = 0.0;       // formula value
  double accuracy = 0.0;  // raw clamped to [0,1]
  bool clamped = false;
};

std::vector<PredictedPoint> predict_curve(const CurveModel& model,
                                          const SizeGrid& grid);

struct EvaluationReport {
  std::vector<double> abs_errors;
  double mae = 0.0;
  CurveModel model;
  std::vector<double> train_fractions;
  std::vector<double> test_fractions;
};

// Mean absolute error of the clamped predictions against observed accuracy.
EvaluationReport mae(const CurveModel& model,
                     std::span<const CurvePoint> test_points);

struct SaturationReport {
  double saturation_fraction = 0.0;
  std::int64_t saturation_count = 0;
  double predicted_accuracy = 0.0;  // clamped to [0,1]
  bool saturated = false;
  double alpha = 0.0;  // percentage points
  std::optional<double> reference_accuracy;
  std::optional<double> l1_distance;  // percentage points
};

// First grid point whose predicted gain over its predecessor is strictly
// below alpha / 100. alpha is in accuracy percentage points; the grid must be
// uniformly spaced with at least two points. When no point qualifies the last
// grid point is returned with saturated == false.
SaturationReport find_saturation(const CurveModel& model, const SizeGrid& grid,
                                 double alpha);

struct RequiredSize {
  bool reachable = false;
  double fraction = 0.0;
  std::int64_t count = 0;
  double predicted_accuracy = 0.0;
  std::optional<double> asymptote;  // set when unreachable and finite
};

// Smallest grid point whose prediction reaches target_accuracy.
RequiredSize required_size(const CurveModel& model, double target_accuracy,
                           const SizeGrid& grid);

SaturationReport l1_at_reference(SaturationReport saturation,
                                 double reference_accuracy);

}  // namespace samplesize
