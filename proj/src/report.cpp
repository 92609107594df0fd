#include "samplesize/report.hpp"

#include <cmath>
#include <istream>
#include <iterator>

#include "json.hpp"
#include "samplesize/error.hpp"

namespace samplesize {

namespace {

using nlohmann::ordered_json;

// JSON has no infinity; failed ensemble components carry a null RSS.
ordered_json number_or_null(double x) {
  return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr);
}

ordered_json bounds_json(const ParamBounds& b) {
  ordered_json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  return j;
}

ordered_json model_json(const CurveModel& model) {
  ordered_json j;
  j["kind"] = std::string(to_string(model.kind()));
  j["params"] = std::vector<double>(model.params().begin(),
                                    model.params().end());
  const auto limit = asymptote(model);
  j["asymptote"] = limit ? ordered_json(*limit) : ordered_json(nullptr);
  return j;
}

ordered_json fit_stats_json(const FitResult& fit) {
  ordered_json j;
  j["train_rss"] = number_or_null(fit.train_rss);
  j["converged"] = fit.converged;
  j["iterations_used"] = fit.iterations_used;
  j["restart_index"] = fit.restart_index;
  return j;
}

}  // namespace

std::string write_fit_report(const FitReport& report) {
  ordered_json doc;
  doc["format_version"] = kReportFormatVersion;
  doc["tool"] = {{"name", "samplesize"}, {"version", kToolVersion}};
  doc["dataset"] = {{"name", report.dataset_name},
                    {"total_size", report.total_size}};

  const FitConfig& c = report.config;
  ordered_json config;
  config["optimizer"] = std::string(to_string(c.optimizer));
  config["weighting"] = std::string(to_string(c.weighting));
  config["ensemble_weighting"] = std::string(to_string(c.ensemble_weighting));
  config["max_iterations"] = c.iterations();
  config["learning_rate"] = c.learning_rate;
  config["convergence_tol"] = c.convergence_tol;
  config["restarts"] = c.restarts;
  config["rng_seed"] = c.rng_seed;
  ordered_json bounds;
  for (ModelKind k : kBaseKinds) {
    bounds[std::string(to_string(k))] = bounds_json(c.bounds(k));
  }
  config["param_bounds"] = bounds;
  doc["config"] = config;

  if (report.schedule) {
    doc["schedule"] = {{"train", report.schedule->train_fractions},
                       {"gap", report.schedule->gap_fractions},
                       {"test", report.schedule->test_fractions}};
  }

  ordered_json model = model_json(report.fit.model);
  if (report.fit.model.kind() == ModelKind::Ensemble) {
    const auto w = report.fit.model.weights();
    model["weights"] = {{"exp", w.exp}, {"inverse", w.inv}, {"pow4", w.pow4}};
    ordered_json components = ordered_json::array();
    for (const auto& comp : report.fit.component_results) {
      ordered_json block = model_json(comp.model);
      block["fit"] = fit_stats_json(comp);
      components.push_back(block);
    }
    model["components"] = components;
  }
  doc["model"] = model;
  doc["fit"] = fit_stats_json(report.fit);

  if (report.evaluation) {
    const auto& e = *report.evaluation;
    doc["evaluation"] = {{"mae", e.mae},
                         {"train_fractions", e.train_fractions},
                         {"test_fractions", e.test_fractions},
                         {"abs_errors", e.abs_errors}};
  }
  if (report.saturation) {
    const auto& s = *report.saturation;
    ordered_json sat;
    sat["alpha"] = s.alpha;
    sat["saturated"] = s.saturated;
    sat["saturation_fraction"] = s.saturation_fraction;
    sat["saturation_count"] = s.saturation_count;
    sat["predicted_accuracy"] = s.predicted_accuracy;
    sat["reference_accuracy"] = s.reference_accuracy
                                    ? ordered_json(*s.reference_accuracy)
                                    : ordered_json(nullptr);
    sat["l1_distance"] =
        s.l1_distance ? ordered_json(*s.l1_distance) : ordered_json(nullptr);
    doc["saturation"] = sat;
  }
  return doc.dump(2) + "\n";
}

LoadedReport read_fit_report(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};
  try {
    const auto doc = nlohmann::json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kReportFormatVersion) {
      throw ParseError("unsupported report format_version " +
                       std::to_string(version));
    }
    const auto& model = doc.at("model");
    const ModelKind kind =
        parse_model_kind(model.at("kind").get<std::string>());
    const auto& rss = doc.at("fit").at("train_rss");
    return LoadedReport{
        doc.at("dataset").at("name").get<std::string>(),
        doc.at("dataset").at("total_size").get<std::int64_t>(),
        CurveModel(kind, model.at("params").get<std::vector<double>>()),
        rss.is_null() ? std::nan("") : rss.get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed fit report: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("malformed fit report: ") + e.what());
  }
}

}  // namespace samplesize
