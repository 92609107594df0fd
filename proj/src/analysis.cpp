#include "samplesize/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "samplesize/error.hpp"

namespace samplesize {

namespace {

double predict_at(const CurveModel& model, double fraction,
                  std::int64_t count) {
  try {
    return evaluate(model, static_cast<double>(count));
  } catch (const DomainError& e) {
    std::ostringstream os;
    os << "at grid point fraction=" << fraction << " count=" << count << ": "
       << e.what();
    throw DomainError(os.str());
  }
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

SizeGrid::SizeGrid(std::int64_t total_size, std::vector<double> fractions)
    : total_(total_size), fractions_(std::move(fractions)) {
  if (total_ < 1) throw InvalidArgument("grid total size must be >= 1");
  if (fractions_.empty()) throw InvalidArgument("grid has no fractions");
  for (std::size_t i = 0; i < fractions_.size(); ++i) {
    const double f = fractions_[i];
    if (!(f > 0.0 && f <= 1.0)) {
      std::ostringstream os;
      os << "grid fraction " << f << " outside (0,1]";
      throw InvalidArgument(os.str());
    }
    if (i > 0 && !(f > fractions_[i - 1])) {
      throw InvalidArgument("grid fractions must be strictly increasing");
    }
    counts_.push_back(count_for_fraction(f, total_));
  }
}

SizeGrid SizeGrid::uniform(std::int64_t total_size, double step) {
  if (!(step > 0.0 && step <= 1.0)) {
    throw InvalidArgument("grid step must be in (0,1]");
  }
  const double inverse = 1.0 / step;
  const double rounded = std::round(inverse);
  const bool divides = std::abs(inverse - rounded) < 1e-9 * inverse;
  const auto steps = static_cast<std::int64_t>(
      divides ? rounded : std::floor(inverse));
  std::vector<double> fractions;
  fractions.reserve(static_cast<std::size_t>(steps));
  for (std::int64_t k = 1; k <= steps; ++k) {
    // k / steps is correctly rounded, so 1% grids hit 0.07 rather than
    // 7 * 0.01.
    fractions.push_back(divides ? static_cast<double>(k) / rounded
                                : static_cast<double>(k) * step);
  }
  return SizeGrid(total_size, std::move(fractions));
}

std::vector<PredictedPoint> predict_curve(const CurveModel& model,
                                          const SizeGrid& grid) {
  std::vector<PredictedPoint> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid.fractions()[i];
    const auto n = grid.counts()[i];
    const double raw = predict_at(model, f, n);
    const double reported = clamp_unit(raw);
    out.push_back({f, n, raw, reported, reported != raw});
  }
  return out;
}

EvaluationReport mae(const CurveModel& model,
                     std::span<const CurvePoint> test_points) {
  if (test_points.empty()) throw InvalidArgument("MAE needs test points");
  EvaluationReport report{{}, 0.0, model, {}, {}};
  report.abs_errors.reserve(test_points.size());
  for (const auto& pt : test_points) {
    const double predicted =
        clamp_unit(predict_at(model, pt.fraction, pt.count));
    report.abs_errors.push_back(std::abs(predicted - pt.accuracy));
    report.test_fractions.push_back(pt.fraction);
  }
  // Summing sorted errors makes the mean independent of point order.
  std::vector<double> sorted = report.abs_errors;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double e : sorted) total += e;
  report.mae = total / static_cast<double>(sorted.size());
  return report;
}

SaturationReport find_saturation(const CurveModel& model, const SizeGrid& grid,
                                 double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (grid.size() < 2) {
    throw InvalidArgument("saturation needs a grid with at least 2 points");
  }
  const auto fractions = grid.fractions();
  const double spacing = fractions[1] - fractions[0];
  for (std::size_t i = 2; i < fractions.size(); ++i) {
    if (std::abs((fractions[i] - fractions[i - 1]) - spacing) >
        1e-9 * std::max(1.0, spacing)) {
      throw InvalidArgument("saturation needs a uniformly spaced grid");
    }
  }

  const double threshold = alpha / 100.0;
  const auto counts = grid.counts();
  double previous = predict_at(model, fractions[0], counts[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double current = predict_at(model, fractions[k], counts[k]);
    if (current - previous < threshold) {
      return {fractions[k], counts[k], clamp_unit(current), true, alpha,
              std::nullopt, std::nullopt};
    }
    previous = current;
  }
  return {fractions.back(), counts.back(), clamp_unit(previous), false, alpha,
          std::nullopt, std::nullopt};
}

RequiredSize required_size(const CurveModel& model, double target_accuracy,
                           const SizeGrid& grid) {
  if (!(target_accuracy >= 0.0 && target_accuracy <= 1.0)) {
    throw InvalidArgument("target accuracy must be in [0, 1]");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double predicted =
        predict_at(model, grid.fractions()[i], grid.counts()[i]);
    if (predicted >= target_accuracy) {
      return {true, grid.fractions()[i], grid.counts()[i],
              clamp_unit(predicted), std::nullopt};
    }
  }
  RequiredSize out;
  out.asymptote = asymptote(model);
  return out;
}

SaturationReport l1_at_reference(SaturationReport saturation,
                                 double reference_accuracy) {
  if (!(reference_accuracy >= 0.0 && reference_accuracy <= 1.0)) {
    throw InvalidArgument("reference accuracy must be in [0, 1]");
  }
  saturation.reference_accuracy = reference_accuracy;
  saturation.l1_distance =
      std::abs(saturation.predicted_accuracy - reference_accuracy) * 100.0;
  return saturation;
}

}  // namespace samplesize
