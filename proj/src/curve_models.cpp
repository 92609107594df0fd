#include "samplesize/curve_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "samplesize/error.hpp"

namespace samplesize {

namespace {

constexpr std::size_t kEnsembleWeightOffset = 9;

// Offsets of each component block inside an ensemble parameter vector.
constexpr std::array<std::size_t, 3> kComponentOffset = {0, 2, 5};

void check_size(double size) {
  if (!(size >= 1.0) || !std::isfinite(size)) {
    std::ostringstream os;
    os << "size must be a finite count >= 1, got " << size;
    throw DomainError(os.str());
  }
}

// Base of the Pow4 power term; rejects bases that would yield a complex or
// infinite value.
double pow4_base(std::span<const double> p, double size) {
  const double base = p[1] * size + p[2];
  const double d = p[3];
  const bool integer_d = std::floor(d) == d;
  if (base < 0.0 && !integer_d) {
    std::ostringstream os;
    os << "pow4 base b*N+c = " << base << " is negative with non-integer d="
       << d << " (b=" << p[1] << ", c=" << p[2] << ", N=" << size << ")";
    throw DomainError(os.str());
  }
  if (base == 0.0 && d > 0.0) {
    std::ostringstream os;
    os << "pow4 base b*N+c is zero (b=" << p[1] << ", c=" << p[2]
       << ", N=" << size << ")";
    throw DomainError(os.str());
  }
  return base;
}

double evaluate_base(ModelKind kind, std::span<const double> p, double size) {
  switch (kind) {
    case ModelKind::Exp:
      return p[0] * std::pow(size, p[1]);
    case ModelKind::Inverse:
      return (1.0 - p[0]) - p[1] * std::pow(size, p[2]);
    case ModelKind::Pow4:
      return p[0] - std::pow(pow4_base(p, size), -p[3]);
    case ModelKind::Ensemble:
      break;
  }
  throw InvalidArgument("evaluate_base called with ensemble kind");
}

double value_and_gradient_base(ModelKind kind, std::span<const double> p,
                               double size, std::span<double> out) {
  switch (kind) {
    case ModelKind::Exp: {
      const double nb = std::pow(size, p[1]);
      out[0] = nb;
      out[1] = p[0] * nb * std::log(size);
      return p[0] * nb;
    }
    case ModelKind::Inverse: {
      const double nc = std::pow(size, p[2]);
      out[0] = -1.0;
      out[1] = -nc;
      out[2] = -p[1] * nc * std::log(size);
      return (1.0 - p[0]) - p[1] * nc;
    }
    case ModelKind::Pow4: {
      const double u = pow4_base(p, size);
      const double d = p[3];
      const double u_md = std::pow(u, -d);
      const double u_md1 = u_md / u;
      out[0] = 1.0;
      out[1] = d * u_md1 * size;
      out[2] = d * u_md1;
      out[3] = u_md * std::log(u);
      return p[0] - u_md;
    }
    case ModelKind::Ensemble:
      break;
  }
  throw InvalidArgument("value_and_gradient_base called with ensemble kind");
}

std::optional<double> asymptote_base(ModelKind kind,
                                     std::span<const double> p) {
  switch (kind) {
    case ModelKind::Exp: {
      const double a = p[0], b = p[1];
      if (a == 0.0 || b < 0.0) return 0.0;
      if (b == 0.0) return a;
      return std::nullopt;
    }
    case ModelKind::Inverse: {
      const double a = p[0], b = p[1], c = p[2];
      if (b == 0.0 || c < 0.0) return 1.0 - a;
      if (c == 0.0) return (1.0 - a) - b;
      return std::nullopt;
    }
    case ModelKind::Pow4: {
      const double a = p[0], b = p[1], c = p[2], d = p[3];
      if (d == 0.0) return a - 1.0;
      if (b == 0.0) {
        if (c <= 0.0) return std::nullopt;
        return a - std::pow(c, -d);
      }
      if (b > 0.0 && d > 0.0) return a;
      return std::nullopt;
    }
    case ModelKind::Ensemble:
      break;
  }
  return std::nullopt;
}

}  // namespace

std::size_t arity(ModelKind kind) {
  switch (kind) {
    case ModelKind::Exp:
      return 2;
    case ModelKind::Inverse:
      return 3;
    case ModelKind::Pow4:
      return 4;
    case ModelKind::Ensemble:
      return 12;
  }
  return 0;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Exp:
      return "exp";
    case ModelKind::Inverse:
      return "inverse";
    case ModelKind::Pow4:
      return "pow4";
    case ModelKind::Ensemble:
      return "ensemble";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "exp") return ModelKind::Exp;
  if (lower == "inverse" || lower == "inv") return ModelKind::Inverse;
  if (lower == "pow4") return ModelKind::Pow4;
  if (lower == "ensemble") return ModelKind::Ensemble;
  throw InvalidArgument("unknown model kind '" + std::string(name) + "'");
}

void EnsembleWeights::validate() const {
  for (double w : {exp, inv, pow4}) {
    if (!(w >= 0.0 && w <= 1.0)) {
      std::ostringstream os;
      os << "ensemble weight " << w << " outside [0,1]";
      throw InvalidArgument(os.str());
    }
  }
  const double sum = exp + inv + pow4;
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "ensemble weights sum to " << sum << ", expected 1";
    throw InvalidArgument(os.str());
  }
}

double EnsembleWeights::operator[](std::size_t i) const {
  switch (i) {
    case 0:
      return exp;
    case 1:
      return inv;
    case 2:
      return pow4;
  }
  throw InvalidArgument("ensemble weight index out of range");
}

CurveModel::CurveModel(ModelKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  if (params_.size() != arity(kind_)) {
    std::ostringstream os;
    os << to_string(kind_) << " expects " << arity(kind_)
       << " parameters, got " << params_.size();
    throw InvalidArgument(os.str());
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!std::isfinite(params_[i])) {
      std::ostringstream os;
      os << to_string(kind_) << " parameter " << i << " is not finite";
      throw InvalidArgument(os.str());
    }
  }
  if (kind_ == ModelKind::Ensemble) weights().validate();
}

CurveModel CurveModel::component(std::size_t index) const {
  if (kind_ != ModelKind::Ensemble) {
    throw InvalidArgument("component() requires an ensemble model");
  }
  if (index >= kBaseKinds.size()) {
    throw InvalidArgument("ensemble component index out of range");
  }
  const ModelKind k = kBaseKinds[index];
  const auto first = params_.begin() + kComponentOffset[index];
  return CurveModel(k, std::vector<double>(first, first + arity(k)));
}

EnsembleWeights CurveModel::weights() const {
  if (kind_ != ModelKind::Ensemble) {
    throw InvalidArgument("weights() requires an ensemble model");
  }
  return {params_[kEnsembleWeightOffset], params_[kEnsembleWeightOffset + 1],
          params_[kEnsembleWeightOffset + 2]};
}

double evaluate(const CurveModel& model, double size) {
  check_size(size);
  const auto p = model.params();
  if (model.kind() != ModelKind::Ensemble) {
    return evaluate_base(model.kind(), p, size);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < kBaseKinds.size(); ++i) {
    const double w = p[kEnsembleWeightOffset + i];
    // Zero-weight components do not take part, so a failed component with
    // weight 0 never poisons the combination.
    if (w == 0.0) continue;
    const ModelKind k = kBaseKinds[i];
    total += w * evaluate_base(k, p.subspan(kComponentOffset[i], arity(k)),
                               size);
  }
  return total;
}

std::vector<double> param_gradient(const CurveModel& model, double size) {
  check_size(size);
  const auto p = model.params();
  std::vector<double> grad(p.size(), 0.0);
  if (model.kind() != ModelKind::Ensemble) {
    value_and_gradient_base(model.kind(), p, size, grad);
    return grad;
  }
  for (std::size_t i = 0; i < kBaseKinds.size(); ++i) {
    const ModelKind k = kBaseKinds[i];
    const double w = p[kEnsembleWeightOffset + i];
    const auto block = p.subspan(kComponentOffset[i], arity(k));
    auto out = std::span<double>(grad).subspan(kComponentOffset[i], arity(k));
    grad[kEnsembleWeightOffset + i] =
        value_and_gradient_base(k, block, size, out);
    for (double& g : out) g *= w;
  }
  return grad;
}

double evaluate_with_gradient(ModelKind kind, std::span<const double> params,
                              double size, std::span<double> grad) {
  check_size(size);
  if (kind == ModelKind::Ensemble) {
    throw InvalidArgument("evaluate_with_gradient takes a base family");
  }
  return value_and_gradient_base(kind, params, size, grad);
}

std::optional<double> asymptote(const CurveModel& model) {
  const auto p = model.params();
  if (model.kind() != ModelKind::Ensemble) {
    return asymptote_base(model.kind(), p);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < kBaseKinds.size(); ++i) {
    const double w = p[kEnsembleWeightOffset + i];
    if (w == 0.0) continue;
    const ModelKind k = kBaseKinds[i];
    const auto limit =
        asymptote_base(k, p.subspan(kComponentOffset[i], arity(k)));
    if (!limit) return std::nullopt;
    total += w * *limit;
  }
  return total;
}

CurveModel combine_ensemble(const CurveModel& exp, const CurveModel& inv,
                            const CurveModel& pow4,
                            const EnsembleWeights& weights) {
  const std::array<const CurveModel*, 3> parts = {&exp, &inv, &pow4};
  std::vector<double> params;
  params.reserve(arity(ModelKind::Ensemble));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i]->kind() != kBaseKinds[i]) {
      std::ostringstream os;
      os << "ensemble component " << i << " must be "
         << to_string(kBaseKinds[i]) << ", got "
         << to_string(parts[i]->kind());
      throw InvalidArgument(os.str());
    }
    const auto p = parts[i]->params();
    params.insert(params.end(), p.begin(), p.end());
  }
  weights.validate();
  params.push_back(weights.exp);
  params.push_back(weights.inv);
  params.push_back(weights.pow4);
  return CurveModel(ModelKind::Ensemble, std::move(params));
}

}  // namespace samplesize
