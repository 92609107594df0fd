#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace samplesize {

enum class ModelKind { Exp, Inverse, Pow4, Ensemble };

// Number of entries in a parameter vector of the given kind. Ensemble packs
// the 2 + 3 + 4 component parameters followed by the 3 combination weights.
std::size_t arity(ModelKind kind);

std::string_view to_string(ModelKind kind);
// Accepts "exp", "inverse" (or "inv"), "pow4", "ensemble"; case-insensitive.
ModelKind parse_model_kind(std::string_view name);

// The three base families in ensemble component order.
inline constexpr std::array<ModelKind, 3> kBaseKinds = {
    ModelKind::Exp, ModelKind::Inverse, ModelKind::Pow4};

struct EnsembleWeights {
  double exp = 1.0 / 3.0;
  double inv = 1.0 / 3.0;
  double pow4 = 1.0 / 3.0;

  // Throws InvalidArgument unless each weight is in [0,1] and they sum to
  // 1 within 1e-12.
  void validate() const;
  double operator[](std::size_t i) const;
};

// A curve family tag plus its parameter vector. Accuracies are fractions in
// [0,1]; sizes are absolute example counts.
//
//   Exp      a * N^b
//   Inverse  (1 - a) - b * N^c
//   Pow4     a - (b * N + c)^(-d)
//   Ensemble w_exp * Exp + w_inv * Inverse + w_pow4 * Pow4
class CurveModel {
 public:
  // Throws InvalidArgument on arity mismatch, non-finite values, or invalid
  // ensemble weights.
  CurveModel(ModelKind kind, std::vector<double> params);

  ModelKind kind() const { return kind_; }
  std::span<const double> params() const { return params_; }

  // Ensemble accessors; throw InvalidArgument for base kinds.
  CurveModel component(std::size_t index) const;
  EnsembleWeights weights() const;

  bool operator==(const CurveModel&) const = default;

 private:
  ModelKind kind_;
  std::vector<double> params_;
};

// Raw formula value, never clamped. Throws DomainError when size < 1 or when
// Pow4's base b*N+c is not positive and d is not an integer.
double evaluate(const CurveModel& model, double size);

// Analytic partial derivatives of evaluate() with respect to each parameter,
// in parameter order. For Ensemble the last three entries are the partials
// with respect to the combination weights.
std::vector<double> param_gradient(const CurveModel& model, double size);

// Value and gradient in one pass over a raw parameter vector of a base
// family, for optimizer inner loops. Performs the same domain checks as
// evaluate() but does not validate the parameter vector itself.
double evaluate_with_gradient(ModelKind kind, std::span<const double> params,
                              double size, std::span<double> grad);

// Limit of evaluate() as N grows without bound; nullopt means divergent.
std::optional<double> asymptote(const CurveModel& model);

CurveModel combine_ensemble(const CurveModel& exp, const CurveModel& inv,
                            const CurveModel& pow4,
                            const EnsembleWeights& weights);

}  // namespace samplesize
