#include "samplesize/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "samplesize/error.hpp"

namespace samplesize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRssFloor = 1e-12;
constexpr int kAdamWindow = 1000;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_points(ModelKind kind, std::span<const CurvePoint> points) {
  std::set<std::int64_t> distinct;
  for (const auto& pt : points) {
    if (pt.count < 1) throw InvalidArgument("point sizes must be positive");
    if (!(pt.accuracy >= 0.0 && pt.accuracy <= 1.0)) {
      std::ostringstream os;
      os << "accuracy " << pt.accuracy << " at size " << pt.count
         << " outside [0,1]";
      throw InvalidArgument(os.str());
    }
    distinct.insert(pt.count);
  }
  if (distinct.size() < arity(kind)) {
    std::ostringstream os;
    os << to_string(kind) << " needs at least " << arity(kind)
       << " points with distinct sizes, got " << distinct.size();
    throw InvalidArgument(os.str());
  }
}

// Residuals (model - observed), Jacobian and weighted loss of a base family
// at one parameter vector.
struct Linearization {
  Eigen::MatrixXd jacobian;  // points x params
  Eigen::VectorXd residual;
  double loss = kInf;
};

// Returns false, with the reason in *why, when the parameters leave the
// family's domain or produce a non-finite loss.
bool linearize(ModelKind kind, const std::vector<double>& params,
               std::span<const CurvePoint> points,
               std::span<const double> weights, Linearization& out,
               std::string* why = nullptr) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto m = static_cast<Eigen::Index>(params.size());
  out.jacobian.resize(n, m);
  out.residual.resize(n);
  std::array<double, 4> grad{};
  double loss = 0.0;
  try {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& pt = points[static_cast<std::size_t>(i)];
      const double value = evaluate_with_gradient(
          kind, params, static_cast<double>(pt.count), grad);
      const double r = value - pt.accuracy;
      out.residual(i) = r;
      for (Eigen::Index j = 0; j < m; ++j) out.jacobian(i, j) = grad[j];
      loss += weights[static_cast<std::size_t>(i)] * r * r;
    }
  } catch (const DomainError& e) {
    if (why) *why = e.what();
    out.loss = kInf;
    return false;
  }
  out.loss = loss;
  if (!std::isfinite(loss) || !out.jacobian.allFinite()) {
    if (why) *why = "non-finite loss";
    out.loss = kInf;
    return false;
  }
  return true;
}

struct RestartOutcome {
  std::optional<FitResult> result;
  std::string diagnostic;
};

RestartOutcome run_lm(ModelKind kind, std::span<const CurvePoint> points,
                      std::span<const double> weights,
                      const ParamBounds& bounds, std::vector<double> params,
                      const FitConfig& config, int restart_index) {
  bounds.project(params);
  std::string why;
  Linearization lin, trial_lin;
  if (!linearize(kind, params, points, weights, lin, &why)) {
    return {std::nullopt, "initial point not evaluable: " + why};
  }

  const Eigen::Map<const Eigen::VectorXd> w(weights.data(),
                                            static_cast<Eigen::Index>(weights.size()));
  std::vector<double> trace{lin.loss};
  double lambda = 1e-3;
  int iteration = 0;
  bool converged = false;
  const int max_iterations = config.iterations();

  while (iteration < max_iterations) {
    if (lin.loss == 0.0) {
      converged = true;
      break;
    }
    ++iteration;

    const Eigen::MatrixXd wj = lin.jacobian.array().colwise() * w.array();
    const Eigen::MatrixXd normal = lin.jacobian.transpose() * wj;
    const Eigen::VectorXd gradient = wj.transpose() * lin.residual;
    Eigen::VectorXd scale = normal.diagonal();
    const double max_diag = scale.maxCoeff();
    scale = scale.cwiseMax(max_diag > 0.0 ? 1e-12 * max_diag : 1.0);

    // Parameters held at a bound by the descent direction stay fixed; the
    // damped system is solved over the remaining free ones.
    std::vector<Eigen::Index> free;
    for (std::size_t j = 0; j < params.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const bool pinned_low = params[j] <= bounds.lower[j] && gradient(jj) > 0.0;
      const bool pinned_high = params[j] >= bounds.upper[j] && gradient(jj) < 0.0;
      if (!pinned_low && !pinned_high) free.push_back(jj);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd damped(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      rhs(a) = -gradient(free[a]);
      for (Eigen::Index b = 0; b < nf; ++b) {
        damped(a, b) = normal(free[a], free[b]);
      }
      damped(a, a) += lambda * scale(free[a]);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(rhs);

    std::vector<double> trial(params);
    bool accepted = false;
    if (nf > 0 && step.allFinite()) {
      for (Eigen::Index a = 0; a < nf; ++a) trial[free[a]] += step(a);
      bounds.project(trial);
      accepted = linearize(kind, trial, points, weights, trial_lin) &&
                 trial_lin.loss < lin.loss;
    }

    if (accepted) {
      const double relative = (lin.loss - trial_lin.loss) / lin.loss;
      params = std::move(trial);
      std::swap(lin, trial_lin);
      trace.push_back(lin.loss);
      lambda *= 0.1;
      if (relative < config.convergence_tol) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e10) {
        converged = true;
        break;
      }
    }
  }

  FitResult result{CurveModel(kind, params), lin.loss, converged, iteration,
                   restart_index, std::move(trace), {}};
  return {std::move(result), {}};
}

RestartOutcome run_adam(ModelKind kind, std::span<const CurvePoint> points,
                        std::span<const double> weights,
                        const ParamBounds& bounds, std::vector<double> params,
                        const FitConfig& config, int restart_index) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  bounds.project(params);
  std::string why;
  Linearization lin;
  if (!linearize(kind, params, points, weights, lin, &why)) {
    return {std::nullopt, "initial point not evaluable: " + why};
  }

  const std::size_t m = params.size();
  std::vector<double> first(m, 0.0), second(m, 0.0);
  std::vector<double> best = params;
  double best_loss = lin.loss;
  std::vector<double> trace{lin.loss};
  double beta1_t = 1.0, beta2_t = 1.0;
  bool converged = false;
  int iteration = 0;
  const int max_iterations = config.iterations();

  while (iteration < max_iterations) {
    if (lin.loss == 0.0) {
      converged = true;
      break;
    }
    ++iteration;

    beta1_t *= beta1;
    beta2_t *= beta2;
    for (std::size_t j = 0; j < m; ++j) {
      double g = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        g += 2.0 * weights[i] * lin.residual(ii) *
             lin.jacobian(ii, static_cast<Eigen::Index>(j));
      }
      first[j] = beta1 * first[j] + (1.0 - beta1) * g;
      second[j] = beta2 * second[j] + (1.0 - beta2) * g * g;
      const double m_hat = first[j] / (1.0 - beta1_t);
      const double v_hat = second[j] / (1.0 - beta2_t);
      params[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
    bounds.project(params);

    if (!linearize(kind, params, points, weights, lin, &why)) {
      std::ostringstream os;
      os << "non-finite loss at iteration " << iteration << ": " << why;
      return {std::nullopt, os.str()};
    }
    if (lin.loss < best_loss) {
      best_loss = lin.loss;
      best = params;
    }
    trace.push_back(best_loss);
    // Adam does not settle, so convergence is judged on the best-so-far
    // loss over a trailing window of iterations.
    if (iteration >= kAdamWindow) {
      const double past = trace[trace.size() - 1 - kAdamWindow];
      if (best_loss == 0.0 ||
          (past - best_loss) <= config.convergence_tol * past) {
        converged = true;
        break;
      }
    }
  }

  FitResult result{CurveModel(kind, best), best_loss, converged, iteration,
                   restart_index, std::move(trace), {}};
  return {std::move(result), {}};
}

using RestartRunner = RestartOutcome (*)(ModelKind, std::span<const CurvePoint>,
                                         std::span<const double>,
                                         const ParamBounds&,
                                         std::vector<double>, const FitConfig&,
                                         int);

FitResult best_of_restarts(ModelKind kind, std::span<const CurvePoint> points,
                           const FitConfig& config, RestartRunner runner) {
  config.validate();
  check_points(kind, points);
  const auto weights = compute_weights(points, config.weighting);
  const ParamBounds bounds = config.bounds(kind);

  std::optional<FitResult> best;
  std::ostringstream failures;
  for (int r = 0; r < config.restarts; ++r) {
    auto outcome =
        runner(kind, points, weights, bounds,
               initialize(kind, points, r, config.rng_seed), config, r);
    if (!outcome.result) {
      failures << " [restart " << r << ": " << outcome.diagnostic << "]";
      continue;
    }
    // Ties keep the lower restart index.
    if (!best || outcome.result->train_rss < best->train_rss) {
      best = std::move(outcome.result);
    }
  }
  if (!best) {
    throw FitError(std::string(to_string(kind)) + " fit failed on all " +
                   std::to_string(config.restarts) + " restarts:" +
                   failures.str());
  }
  return *std::move(best);
}

FitResult fit_ensemble(std::span<const CurvePoint> points,
                       const FitConfig& config) {
  config.validate();
  std::vector<FitResult> components;
  std::array<double, 3> raw{};
  std::ostringstream failures;
  int succeeded = 0;
  for (std::size_t i = 0; i < kBaseKinds.size(); ++i) {
    const ModelKind k = kBaseKinds[i];
    try {
      components.push_back(fit(k, points, config));
      raw[i] = config.ensemble_weighting == EnsembleWeighting::Uniform
                   ? 1.0
                   : 1.0 / std::max(components.back().train_rss, kRssFloor);
      ++succeeded;
    } catch (const Error& e) {
      failures << " [" << to_string(k) << ": " << e.what() << "]";
      // Placeholder parameters at the middle of the box; never evaluated
      // because the component's weight is 0.
      const ParamBounds b = config.bounds(k);
      std::vector<double> mid(arity(k));
      for (std::size_t j = 0; j < mid.size(); ++j) {
        mid[j] = 0.5 * (b.lower[j] + b.upper[j]);
      }
      components.push_back(
          FitResult{CurveModel(k, std::move(mid)), kInf, false, 0, 0, {}, {}});
      raw[i] = 0.0;
    }
  }
  if (succeeded == 0) {
    throw FitError("ensemble fit failed on every component:" +
                   failures.str());
  }

  const double sum = raw[0] + raw[1] + raw[2];
  EnsembleWeights weights{raw[0] / sum, raw[1] / sum, raw[2] / sum};
  CurveModel model = combine_ensemble(components[0].model,
                                      components[1].model,
                                      components[2].model, weights);
  const auto w = compute_weights(points, config.weighting);
  const double rss = weighted_rss(model, points, w);
  bool converged = true;
  int iterations = 0;
  for (const auto& c : components) {
    converged = converged && c.converged;
    iterations += c.iterations_used;
  }
  return FitResult{std::move(model), rss, converged, iterations, 0, {},
                   std::move(components)};
}

}  // namespace

std::string_view to_string(Optimizer opt) {
  return opt == Optimizer::NLS ? "nls" : "gd";
}

std::string_view to_string(Weighting w) {
  return w == Weighting::Unweighted ? "unweighted" : "size";
}

std::string_view to_string(EnsembleWeighting w) {
  return w == EnsembleWeighting::InverseRss ? "inverse-rss" : "uniform";
}

Optimizer parse_optimizer(std::string_view name) {
  const auto s = lowercase(name);
  if (s == "nls" || s == "lm") return Optimizer::NLS;
  if (s == "gd" || s == "adam") return Optimizer::GD;
  throw InvalidArgument("unknown optimizer '" + std::string(name) + "'");
}

Weighting parse_weighting(std::string_view name) {
  const auto s = lowercase(name);
  if (s == "none" || s == "unweighted") return Weighting::Unweighted;
  if (s == "size" || s == "size-proportional") {
    return Weighting::SizeProportional;
  }
  throw InvalidArgument("unknown weighting '" + std::string(name) + "'");
}

EnsembleWeighting parse_ensemble_weighting(std::string_view name) {
  const auto s = lowercase(name);
  if (s == "inverse-rss" || s == "rss") return EnsembleWeighting::InverseRss;
  if (s == "uniform") return EnsembleWeighting::Uniform;
  throw InvalidArgument("unknown ensemble weighting '" + std::string(name) +
                        "'");
}

ParamBounds ParamBounds::defaults(ModelKind kind) {
  // Open lower bounds of Pow4's b and d are closed off just above zero.
  constexpr double tiny = 1e-12;
  switch (kind) {
    case ModelKind::Exp:
      return {{0.0, -1.0}, {2.0, 1.0}};
    case ModelKind::Inverse:
      return {{-0.5, 0.0, -5.0}, {1.0, 10.0, 0.0}};
    case ModelKind::Pow4:
      return {{0.0, tiny, 1e-6, tiny}, {1.5, 10.0, 10.0, 5.0}};
    case ModelKind::Ensemble:
      break;
  }
  throw InvalidArgument("ensemble has no parameter bounds of its own");
}

bool ParamBounds::contains(std::span<const double> params) const {
  if (params.size() != lower.size()) return false;
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!(params[j] >= lower[j] && params[j] <= upper[j])) return false;
  }
  return true;
}

void ParamBounds::project(std::span<double> params) const {
  for (std::size_t j = 0; j < params.size(); ++j) {
    params[j] = std::clamp(params[j], lower[j], upper[j]);
  }
}

int FitConfig::iterations() const {
  if (max_iterations) return *max_iterations;
  return optimizer == Optimizer::NLS ? 500 : 200;
}

ParamBounds FitConfig::bounds(ModelKind kind) const {
  const std::optional<ParamBounds>* custom = nullptr;
  switch (kind) {
    case ModelKind::Exp:
      custom = &exp_bounds;
      break;
    case ModelKind::Inverse:
      custom = &inverse_bounds;
      break;
    case ModelKind::Pow4:
      custom = &pow4_bounds;
      break;
    case ModelKind::Ensemble:
      break;
  }
  if (custom && custom->has_value()) return **custom;
  return ParamBounds::defaults(kind);
}

void FitConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (!(convergence_tol > 0.0)) {
    throw InvalidArgument("convergence_tol must be positive");
  }
  if (max_iterations && *max_iterations < 0) {
    throw InvalidArgument("max_iterations must be non-negative");
  }
  if (restarts < 1) throw InvalidArgument("restarts must be at least 1");
  for (ModelKind k : kBaseKinds) {
    const ParamBounds b = bounds(k);
    if (b.lower.size() != arity(k) || b.upper.size() != arity(k)) {
      throw InvalidArgument(std::string(to_string(k)) +
                            " bounds have the wrong arity");
    }
    for (std::size_t j = 0; j < b.lower.size(); ++j) {
      if (!(b.lower[j] < b.upper[j])) {
        throw InvalidArgument(std::string(to_string(k)) + " bound " +
                              std::to_string(j) + " has lower >= upper");
      }
    }
  }
}

std::vector<double> compute_weights(std::span<const CurvePoint> points,
                                    Weighting mode) {
  if (points.empty()) throw InvalidArgument("cannot weight an empty point set");
  for (const auto& pt : points) {
    if (pt.count < 1) throw InvalidArgument("point sizes must be positive");
  }
  std::vector<double> weights(points.size(), 1.0);
  if (mode == Weighting::Unweighted) return weights;

  double total = 0.0;
  for (const auto& pt : points) total += static_cast<double>(pt.count);
  const double mean = total / static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    weights[i] = static_cast<double>(points[i].count) / mean;
  }
  return weights;
}

std::vector<double> initialize(ModelKind kind,
                               std::span<const CurvePoint> points,
                               int restart_index, std::uint64_t rng_seed) {
  if (kind == ModelKind::Ensemble) {
    throw InvalidArgument("ensemble components are initialized separately");
  }
  if (restart_index < 0) throw InvalidArgument("restart index is negative");
  check_points(kind, points);

  double max_acc = 0.0, mean_size = 0.0;
  bool all_positive = true;
  for (const auto& pt : points) {
    max_acc = std::max(max_acc, pt.accuracy);
    mean_size += static_cast<double>(pt.count);
    all_positive = all_positive && pt.accuracy > 0.0;
  }
  mean_size /= static_cast<double>(points.size());

  std::vector<double> params;
  bool perturb = restart_index > 0;
  switch (kind) {
    case ModelKind::Exp:
      if (all_positive) {
        // log(acc) = log(a) + b * log(N)
        double mx = 0.0, my = 0.0;
        for (const auto& pt : points) {
          mx += std::log(static_cast<double>(pt.count));
          my += std::log(pt.accuracy);
        }
        mx /= static_cast<double>(points.size());
        my /= static_cast<double>(points.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& pt : points) {
          const double dx = std::log(static_cast<double>(pt.count)) - mx;
          sxy += dx * (std::log(pt.accuracy) - my);
          sxx += dx * dx;
        }
        const double b = sxy / sxx;
        params = {std::exp(my - b * mx), b};
      } else {
        params = {std::max(max_acc, 0.1), 0.01};
        perturb = true;
      }
      break;
    case ModelKind::Inverse:
      params = {1.0 - max_acc - 0.05, 0.5, -0.5};
      break;
    case ModelKind::Pow4:
      params = {max_acc + 0.05, 1.0 / mean_size, 1.0, 0.5};
      break;
    case ModelKind::Ensemble:
      break;
  }

  if (perturb) {
    std::seed_seq seq{static_cast<std::uint32_t>(rng_seed),
                      static_cast<std::uint32_t>(rng_seed >> 32),
                      static_cast<std::uint32_t>(restart_index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> factor(0.5, 1.5);
    for (double& p : params) p *= factor(rng);
  }
  return params;
}

double weighted_rss(const CurveModel& model,
                    std::span<const CurvePoint> points,
                    std::span<const double> weights) {
  if (weights.size() != points.size()) {
    throw InvalidArgument("weight vector length differs from point count");
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r =
        evaluate(model, static_cast<double>(points[i].count)) -
        points[i].accuracy;
    rss += weights[i] * r * r;
  }
  return rss;
}

FitResult fit_nls(ModelKind kind, std::span<const CurvePoint> points,
                  const FitConfig& config) {
  if (kind == ModelKind::Ensemble) {
    FitConfig nls = config;
    nls.optimizer = Optimizer::NLS;
    return fit_ensemble(points, nls);
  }
  return best_of_restarts(kind, points, config, &run_lm);
}

FitResult fit_gd(ModelKind kind, std::span<const CurvePoint> points,
                 const FitConfig& config) {
  if (kind == ModelKind::Ensemble) {
    FitConfig gd = config;
    gd.optimizer = Optimizer::GD;
    return fit_ensemble(points, gd);
  }
  return best_of_restarts(kind, points, config, &run_adam);
}

FitResult fit(ModelKind kind, std::span<const CurvePoint> points,
              const FitConfig& config) {
  if (kind == ModelKind::Ensemble) return fit_ensemble(points, config);
  return config.optimizer == Optimizer::NLS ? fit_nls(kind, points, config)
                                            : fit_gd(kind, points, config);
}

}  // namespace samplesize
