#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "samplesize/report.hpp"

namespace samplesize {

struct PipelineOptions {
  double train_max_fraction = 0.10;
  double alpha = 0.2;                       // percentage points
  std::optional<double> reference_accuracy;  // else the point at fraction 1
  double grid_step = 0.01;
};

// fit -> evaluate on test points -> saturate, as run by the `fit`
// subcommand. Train points are those with role train and fraction at most
// train_max_fraction.
FitReport run_fit_pipeline(const CurveDataset& dataset, ModelKind kind,
                           const FitConfig& config,
                           const PipelineOptions& options = {});

// Tab-separated table: fraction, count, observed, one column per model,
// role. One row per schedule fraction.
std::string plot_table(const CurveDataset& dataset,
                       const SplitSchedule& schedule,
                       const std::vector<std::pair<std::string, CurveModel>>&
                           models);

// Entry point of the command-line tool. Returns 0 on success, 2 on usage
// errors and 1 on computation errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace samplesize
