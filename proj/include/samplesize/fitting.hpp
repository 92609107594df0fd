#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "samplesize/curve_models.hpp"
#include "samplesize/dataio.hpp"

namespace samplesize {

enum class Optimizer { NLS, GD };
enum class Weighting { Unweighted, SizeProportional };
enum class EnsembleWeighting { InverseRss, Uniform };

std::string_view to_string(Optimizer opt);
std::string_view to_string(Weighting w);
std::string_view to_string(EnsembleWeighting w);
Optimizer parse_optimizer(std::string_view name);
Weighting parse_weighting(std::string_view name);
EnsembleWeighting parse_ensemble_weighting(std::string_view name);

// Closed box constraints, one interval per parameter.
struct ParamBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static ParamBounds defaults(ModelKind kind);
  bool contains(std::span<const double> params) const;
  void project(std::span<double> params) const;
};

struct FitConfig {
  Optimizer optimizer = Optimizer::NLS;
  Weighting weighting = Weighting::Unweighted;
  EnsembleWeighting ensemble_weighting = EnsembleWeighting::InverseRss;
  // nullopt selects the optimizer default (500 for NLS, 200 for GD).
  std::optional<int> max_iterations;
  double learning_rate = 1e-5;
  double convergence_tol = 1e-10;
  int restarts = 5;
  std::uint64_t rng_seed = 0;
  // Per-kind overrides; kinds without an entry use ParamBounds::defaults.
  std::optional<ParamBounds> exp_bounds;
  std::optional<ParamBounds> inverse_bounds;
  std::optional<ParamBounds> pow4_bounds;

  int iterations() const;
  ParamBounds bounds(ModelKind kind) const;
  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct FitResult {
  CurveModel model;
  double train_rss = 0.0;  // weighted residual sum of squares
  bool converged = false;
  int iterations_used = 0;
  int restart_index = 0;
  // NLS: loss at each accepted iterate, starting with the initial point.
  // GD: best-so-far loss after each iteration, starting with the initial
  // point.
  std::vector<double> loss_trace;
  // Ensemble only: Exp, Inverse, Pow4 in that order. A component that failed
  // on every restart has converged == false and a non-finite train_rss.
  std::vector<FitResult> component_results;
};

// One entry per point; Unweighted gives all ones, SizeProportional gives
// count / mean(count) so the entries sum to the number of points.
std::vector<double> compute_weights(std::span<const CurvePoint> points,
                                    Weighting mode);

// Starting parameters for the given restart. Restart 0 is a deterministic
// heuristic; later restarts scale each heuristic parameter by a uniform
// factor in [0.5, 1.5] drawn from (rng_seed, restart_index).
std::vector<double> initialize(ModelKind kind,
                               std::span<const CurvePoint> points,
                               int restart_index, std::uint64_t rng_seed);

// Weighted residual sum of squares of a model on the given points.
double weighted_rss(const CurveModel& model,
                    std::span<const CurvePoint> points,
                    std::span<const double> weights);

// Levenberg-Marquardt with box projection, best of config.restarts.
FitResult fit_nls(ModelKind kind, std::span<const CurvePoint> points,
                  const FitConfig& config);

// Adam with box projection, best of config.restarts.
FitResult fit_gd(ModelKind kind, std::span<const CurvePoint> points,
                 const FitConfig& config);

// Dispatches on config.optimizer. Ensemble fits the three base families
// independently and combines them; failed components get weight 0.
FitResult fit(ModelKind kind, std::span<const CurvePoint> points,
              const FitConfig& config);

}  // namespace samplesize
