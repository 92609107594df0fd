#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "samplesize/analysis.hpp"
#include "samplesize/dataio.hpp"
#include "samplesize/fitting.hpp"

namespace samplesize {

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Everything a fit report carries. Optional sections are omitted from the
// document when empty.
struct FitReport {
  std::string dataset_name;
  std::int64_t total_size = 0;
  FitConfig config;
  FitResult fit;
  std::optional<SplitSchedule> schedule;
  std::optional<EvaluationReport> evaluation;
  std::optional<SaturationReport> saturation;
};

// Single JSON document with a fixed key order, terminated by a newline.
// Identical inputs produce byte-identical output.
std::string write_fit_report(const FitReport& report);

// The parts of a report needed to reuse its model.
struct LoadedReport {
  std::string dataset_name;
  std::int64_t total_size = 0;
  CurveModel model;
  double train_rss = 0.0;
};

// Throws ParseError on malformed documents or unsupported format versions.
LoadedReport read_fit_report(std::istream& in);

}  // namespace samplesize
