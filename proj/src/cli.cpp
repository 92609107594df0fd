#include "samplesize/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "samplesize/error.hpp"
#include "samplesize/synth.hpp"

namespace samplesize {

namespace {

std::string fmt(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto* first = item.data();
    const auto* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw InvalidArgument("invalid number '" + item + "' in list '" + text +
                            "'");
    }
    out.push_back(v);
  }
  return out;
}

CurveDataset load_points(const std::string& path, const std::string& format,
                         std::optional<std::int64_t> total) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open points file '" + path + "'");
  const PointFormat pf = format.empty()   ? format_for_path(path)
                         : format == "csv" ? PointFormat::Csv
                                           : PointFormat::Jsonl;
  try {
    return parse_points(in, pf, ParseOptions{"", total});
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

LoadedReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report file '" + path + "'");
  try {
    return read_fit_report(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// Writes to the named file, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open output file '" + path + "'");
  file << text;
  if (!file) throw Error("failed writing '" + path + "'");
}

struct FitFlags {
  std::string optimizer = "nls";
  std::string weighting = "none";
  std::string ensemble_weights = "rss";
  std::optional<int> max_iterations;
  std::optional<double> learning_rate;
  int restarts = 5;
  double train_max_fraction = 0.10;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--optimizer", f.optimizer, "nls or gd")
      ->check(CLI::IsMember({"nls", "gd"}));
  cmd->add_option("--weighting", f.weighting, "none or size")
      ->check(CLI::IsMember({"none", "size"}));
  cmd->add_option("--ensemble-weights", f.ensemble_weights, "rss or uniform")
      ->check(CLI::IsMember({"rss", "uniform"}));
  cmd->add_option("--max-iterations", f.max_iterations)
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--learning-rate", f.learning_rate)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", f.restarts)->check(CLI::PositiveNumber);
  cmd->add_option("--train-max-fraction", f.train_max_fraction,
                  "largest fraction used for fitting")
      ->check(CLI::Range(0.0, 1.0));
}

FitConfig make_config(const FitFlags& f, std::uint64_t seed) {
  FitConfig c;
  c.optimizer = parse_optimizer(f.optimizer);
  c.weighting = parse_weighting(f.weighting);
  c.ensemble_weighting = parse_ensemble_weighting(f.ensemble_weights);
  c.max_iterations = f.max_iterations;
  if (f.learning_rate) c.learning_rate = *f.learning_rate;
  c.restarts = f.restarts;
  c.rng_seed = seed;
  c.validate();
  return c;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SAMPLESIZE_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidArgument("SAMPLESIZE_SEED is not an unsigned integer");
    }
    return v;
  }
  return 0;
}

SplitSchedule schedule_from_flags(const std::string& train,
                                  const std::string& gap,
                                  const std::string& test) {
  SplitSchedule s = default_schedule();
  if (!train.empty()) s.train_fractions = parse_list(train);
  if (!gap.empty()) s.gap_fractions = parse_list(gap);
  if (!test.empty()) s.test_fractions = parse_list(test);
  s.validate();
  return s;
}

}  // namespace

FitReport run_fit_pipeline(const CurveDataset& dataset, ModelKind kind,
                           const FitConfig& config,
                           const PipelineOptions& options) {
  std::vector<CurvePoint> train;
  SplitSchedule schedule;
  for (const auto& p : dataset.points) {
    if (p.role == Role::Train &&
        p.fraction <= options.train_max_fraction + 1e-12) {
      train.push_back(p);
      schedule.train_fractions.push_back(p.fraction);
    } else if (p.role == Role::Gap) {
      schedule.gap_fractions.push_back(p.fraction);
    } else if (p.role == Role::Test) {
      schedule.test_fractions.push_back(p.fraction);
    }
  }
  if (train.empty()) {
    throw InvalidArgument("no train points at or below fraction " +
                          fmt(options.train_max_fraction));
  }

  FitReport report{dataset.name, dataset.total_size, config,
                   fit(kind, train, config), std::nullopt, std::nullopt,
                   std::nullopt};
  report.schedule = schedule;

  const auto test = dataset.with_role(Role::Test);
  if (!test.empty()) {
    auto evaluation = mae(report.fit.model, test);
    evaluation.train_fractions = schedule.train_fractions;
    report.evaluation = std::move(evaluation);
  }

  const auto grid = SizeGrid::uniform(dataset.total_size, options.grid_step);
  auto saturation = find_saturation(report.fit.model, grid, options.alpha);
  std::optional<double> reference = options.reference_accuracy;
  if (!reference) {
    for (const auto& p : dataset.points) {
      if (p.fraction == 1.0) reference = p.accuracy;
    }
  }
  if (reference) saturation = l1_at_reference(saturation, *reference);
  report.saturation = saturation;
  return report;
}

std::string plot_table(
    const CurveDataset& dataset, const SplitSchedule& schedule,
    const std::vector<std::pair<std::string, CurveModel>>& models) {
  std::ostringstream os;
  os << "fraction\tcount\tobserved";
  for (const auto& [name, model] : models) os << '\t' << name;
  os << "\trole\n";
  for (const auto& [fraction, role] : schedule.all_fractions()) {
    const auto count = count_for_fraction(fraction, dataset.total_size);
    os << fmt(fraction) << '\t' << count << '\t';
    const CurvePoint* observed = nullptr;
    for (const auto& p : dataset.points) {
      if (std::abs(p.fraction - fraction) < 1e-9 &&
          (!observed || p.role == role)) {
        observed = &p;
      }
    }
    if (observed) os << fmt(observed->accuracy);
    for (const auto& [name, model] : models) {
      const double raw = evaluate(model, static_cast<double>(count));
      os << '\t' << fmt(std::clamp(raw, 0.0, 1.0));
    }
    os << '\t' << to_string(role) << '\n';
  }
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Learning-curve extrapolation and sample size estimation",
               "samplesize"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag,
                 "RNG seed (falls back to SAMPLESIZE_SEED, then 0)");

  // fit
  std::string fit_input, fit_format, fit_out, fit_model = "ensemble";
  std::optional<std::int64_t> fit_total;
  std::optional<double> fit_reference;
  double fit_alpha = 0.2;
  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "fit a curve and write a JSON report");
  fit_cmd->add_option("--input", fit_input, "points file (.csv or .jsonl)")
      ->required();
  fit_cmd->add_option("--format", fit_format)
      ->check(CLI::IsMember({"csv", "jsonl"}));
  fit_cmd->add_option("--total", fit_total, "full training-set size")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--model", fit_model)
      ->check(CLI::IsMember({"exp", "inverse", "pow4", "ensemble"}));
  fit_cmd->add_option("--alpha", fit_alpha, "saturation threshold (points)")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--reference", fit_reference)->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--out", fit_out, "report path (default stdout)");
  fit_cmd->add_option("--seed", seed_flag);
  add_fit_flags(fit_cmd, fit_flags);

  // predict
  std::string pred_input, pred_out, pred_fractions;
  double pred_step = 0.01;
  auto* pred_cmd = app.add_subcommand("predict", "predict accuracy on a size grid");
  pred_cmd->add_option("--input", pred_input, "fit report")->required();
  pred_cmd->add_option("--fractions", pred_fractions, "comma-separated fractions");
  pred_cmd->add_option("--step", pred_step)->check(CLI::Range(1e-6, 1.0));
  pred_cmd->add_option("--out", pred_out);

  // saturate
  std::string sat_input;
  double sat_alpha = 0.2, sat_step = 0.01;
  std::optional<double> sat_reference;
  std::optional<std::int64_t> sat_total;
  bool sat_json = false;
  auto* sat_cmd = app.add_subcommand("saturate", "find the saturation point");
  sat_cmd->add_option("--input", sat_input, "fit report")->required();
  sat_cmd->add_option("--alpha", sat_alpha)->check(CLI::PositiveNumber);
  sat_cmd->add_option("--reference", sat_reference)->check(CLI::Range(0.0, 1.0));
  sat_cmd->add_option("--total", sat_total)->check(CLI::PositiveNumber);
  sat_cmd->add_option("--step", sat_step)->check(CLI::Range(1e-6, 1.0));
  sat_cmd->add_flag("--json", sat_json, "full-precision JSON output");

  // required-size
  std::string req_input;
  double req_target = 0.0, req_step = 0.01;
  std::optional<std::int64_t> req_total;
  auto* req_cmd =
      app.add_subcommand("required-size", "smallest size reaching a target");
  req_cmd->add_option("--input", req_input, "fit report")->required();
  req_cmd->add_option("--target", req_target)
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  req_cmd->add_option("--total", req_total)->check(CLI::PositiveNumber);
  req_cmd->add_option("--step", req_step)->check(CLI::Range(1e-6, 1.0));

  // evaluate
  std::string eval_input, eval_points, eval_format, eval_role = "test";
  auto* eval_cmd = app.add_subcommand("evaluate", "MAE of a report on held-out points");
  eval_cmd->add_option("--input", eval_input, "fit report")->required();
  eval_cmd->add_option("--points", eval_points, "points file")->required();
  eval_cmd->add_option("--format", eval_format)
      ->check(CLI::IsMember({"csv", "jsonl"}));
  eval_cmd->add_option("--role", eval_role)
      ->check(CLI::IsMember({"train", "test", "gap", "all"}));

  // synth
  std::string syn_model, syn_params, syn_out, syn_format, syn_name = "synthetic";
  std::string sched_train, sched_gap, sched_test;
  std::int64_t syn_total = 0;
  double syn_sigma = 0.0;
  bool syn_decay = false;
  auto* syn_cmd = app.add_subcommand("synth", "generate a synthetic curve dataset");
  syn_cmd->add_option("--model", syn_model)
      ->required()
      ->check(CLI::IsMember({"exp", "inverse", "pow4"}));
  syn_cmd->add_option("--params", syn_params, "comma-separated parameters")
      ->required();
  syn_cmd->add_option("--total", syn_total)->required()->check(CLI::PositiveNumber);
  syn_cmd->add_option("--sigma", syn_sigma)->check(CLI::NonNegativeNumber);
  syn_cmd->add_flag("--size-decay", syn_decay, "noise sd = sigma / sqrt(count)");
  syn_cmd->add_option("--name", syn_name);
  syn_cmd->add_option("--format", syn_format)
      ->check(CLI::IsMember({"csv", "jsonl"}));
  syn_cmd->add_option("--out", syn_out);
  syn_cmd->add_option("--seed", seed_flag);
  syn_cmd->add_option("--train-fractions", sched_train);
  syn_cmd->add_option("--gap-fractions", sched_gap);
  syn_cmd->add_option("--test-fractions", sched_test);

  // plot
  std::string plot_input, plot_format, plot_out;
  std::string plot_models = "exp,inverse,pow4,ensemble";
  std::optional<std::int64_t> plot_total;
  FitFlags plot_flags;
  auto* plot_cmd = app.add_subcommand("plot", "fit models and write a TSV table");
  plot_cmd->add_option("--input", plot_input, "points file")->required();
  plot_cmd->add_option("--format", plot_format)
      ->check(CLI::IsMember({"csv", "jsonl"}));
  plot_cmd->add_option("--total", plot_total)->check(CLI::PositiveNumber);
  plot_cmd->add_option("--models", plot_models, "comma-separated model kinds");
  plot_cmd->add_option("--out", plot_out);
  plot_cmd->add_option("--seed", seed_flag);
  plot_cmd->add_option("--train-fractions", sched_train);
  plot_cmd->add_option("--gap-fractions", sched_gap);
  plot_cmd->add_option("--test-fractions", sched_test);
  add_fit_flags(plot_cmd, plot_flags);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("samplesize");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "samplesize: " << e.what() << "\n" << app.help();
    return 2;
  }

  // Flag values that CLI11 cannot check on its own; still usage errors.
  std::uint64_t seed = 0;
  FitConfig fit_config, plot_config;
  SplitSchedule schedule;
  std::vector<ModelKind> plot_kinds;
  std::vector<double> syn_param_values, pred_fraction_values;
  try {
    seed = resolve_seed(seed_flag);
    if (*fit_cmd) fit_config = make_config(fit_flags, seed);
    if (*plot_cmd) {
      plot_config = make_config(plot_flags, seed);
      std::stringstream ss(plot_models);
      std::string item;
      while (std::getline(ss, item, ',')) {
        plot_kinds.push_back(parse_model_kind(item));
      }
      if (plot_kinds.empty()) throw InvalidArgument("--models is empty");
    }
    if (*plot_cmd || *syn_cmd) {
      schedule = schedule_from_flags(sched_train, sched_gap, sched_test);
    }
    if (*syn_cmd) syn_param_values = parse_list(syn_params);
    if (*pred_cmd && !pred_fractions.empty()) {
      pred_fraction_values = parse_list(pred_fractions);
    }
  } catch (const Error& e) {
    err << "samplesize: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*fit_cmd) {
      const auto dataset = load_points(fit_input, fit_format, fit_total);
      PipelineOptions options;
      options.train_max_fraction = fit_flags.train_max_fraction;
      options.alpha = fit_alpha;
      options.reference_accuracy = fit_reference;
      const auto report = run_fit_pipeline(
          dataset, parse_model_kind(fit_model), fit_config, options);
      emit(fit_out, write_fit_report(report), out);
    } else if (*pred_cmd) {
      const auto loaded = load_report(pred_input);
      const SizeGrid grid =
          pred_fraction_values.empty()
              ? SizeGrid::uniform(loaded.total_size, pred_step)
              : SizeGrid(loaded.total_size, pred_fraction_values);
      std::ostringstream os;
      os << "fraction\tcount\tpredicted\tclamped\n";
      for (const auto& p : predict_curve(loaded.model, grid)) {
        os << fmt(p.fraction) << '\t' << p.count << '\t' << fmt(p.accuracy)
           << '\t' << (p.clamped ? "yes" : "no") << '\n';
      }
      emit(pred_out, os.str(), out);
    } else if (*sat_cmd) {
      const auto loaded = load_report(sat_input);
      const SizeGrid grid =
          SizeGrid::uniform(sat_total.value_or(loaded.total_size), sat_step);
      auto s = find_saturation(loaded.model, grid, sat_alpha);
      if (sat_reference) s = l1_at_reference(s, *sat_reference);
      if (sat_json) {
        std::ostringstream os;
        os << "{\"alpha\": " << fmt(s.alpha)
           << ", \"saturated\": " << (s.saturated ? "true" : "false")
           << ", \"saturation_fraction\": " << fmt(s.saturation_fraction)
           << ", \"saturation_count\": " << s.saturation_count
           << ", \"predicted_accuracy\": " << fmt(s.predicted_accuracy)
           << ", \"reference_accuracy\": "
           << (s.reference_accuracy ? fmt(*s.reference_accuracy) : "null")
           << ", \"l1_distance\": "
           << (s.l1_distance ? fmt(*s.l1_distance) : "null") << "}\n";
        out << os.str();
      } else {
        out << "alpha: " << fmt(s.alpha) << '\n'
            << "saturated: " << (s.saturated ? "yes" : "no") << '\n'
            << "saturation fraction: " << fmt(s.saturation_fraction) << '\n'
            << "saturation count: " << s.saturation_count << '\n'
            << "predicted accuracy: " << fixed(s.predicted_accuracy, 4) << '\n';
        if (s.l1_distance) {
          out << "reference accuracy: " << fixed(*s.reference_accuracy, 4)
              << '\n'
              << "L1 distance: " << fixed(*s.l1_distance, 2) << '\n';
        }
      }
    } else if (*req_cmd) {
      const auto loaded = load_report(req_input);
      const SizeGrid grid =
          SizeGrid::uniform(req_total.value_or(loaded.total_size), req_step);
      const auto r = required_size(loaded.model, req_target, grid);
      out << "target: " << fmt(req_target) << '\n';
      if (r.reachable) {
        out << "required fraction: " << fmt(r.fraction) << '\n'
            << "required count: " << r.count << '\n'
            << "predicted accuracy: " << fixed(r.predicted_accuracy, 4)
            << '\n';
      } else {
        out << "unreachable";
        if (r.asymptote) out << " (asymptote " << fixed(*r.asymptote, 4) << ")";
        out << '\n';
      }
    } else if (*eval_cmd) {
      const auto loaded = load_report(eval_input);
      const auto dataset =
          load_points(eval_points, eval_format, loaded.total_size);
      const auto points = eval_role == "all"
                              ? dataset.points
                              : dataset.with_role(parse_role(eval_role));
      const auto report = mae(loaded.model, points);
      out << "fraction\tcount\tobserved\tabs_error\n";
      for (std::size_t i = 0; i < points.size(); ++i) {
        out << fmt(points[i].fraction) << '\t' << points[i].count << '\t'
            << fmt(points[i].accuracy) << '\t' << fmt(report.abs_errors[i])
            << '\n';
      }
      out << "mae\t" << fmt(report.mae) << '\n';
    } else if (*syn_cmd) {
      SynthSpec spec{CurveModel(parse_model_kind(syn_model), syn_param_values),
                     syn_total, schedule, NoiseModel{syn_sigma, syn_decay},
                     seed, syn_name};
      const auto dataset = generate(spec);
      std::ostringstream os;
      const PointFormat pf =
          syn_format.empty()
              ? (syn_out.empty() ? PointFormat::Csv : format_for_path(syn_out))
              : (syn_format == "csv" ? PointFormat::Csv : PointFormat::Jsonl);
      write_points(os, dataset, pf);
      emit(syn_out, os.str(), out);
    } else if (*plot_cmd) {
      const auto dataset = load_points(plot_input, plot_format, plot_total);
      std::vector<CurvePoint> train;
      for (const auto& p : dataset.points) {
        if (p.role == Role::Train &&
            p.fraction <= plot_flags.train_max_fraction + 1e-12) {
          train.push_back(p);
        }
      }
      std::vector<std::pair<std::string, CurveModel>> models;
      for (ModelKind k : plot_kinds) {
        models.emplace_back(std::string(to_string(k)),
                            fit(k, train, plot_config).model);
      }
      emit(plot_out, plot_table(dataset, schedule, models), out);
    }
  } catch (const std::exception& e) {
    err << "samplesize: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace samplesize
