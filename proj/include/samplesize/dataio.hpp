#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace samplesize {

enum class Role { Train, Test, Gap };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

// One learning-curve measurement.
struct CurvePoint {
  double fraction = 0.0;    // share of the full training set, in (0,1]
  std::int64_t count = 0;   // absolute number of training examples
  double accuracy = 0.0;    // in [0,1]
  int n_runs = 1;           // seeds averaged into accuracy
  Role role = Role::Train;

  bool operator==(const CurvePoint&) const = default;
};

struct CurveDataset {
  std::string name;
  std::int64_t total_size = 0;
  std::vector<CurvePoint> points;  // sorted by (count, role)
  std::optional<int> num_classes;
  std::string notes;

  bool operator==(const CurveDataset&) const = default;

  std::vector<CurvePoint> with_role(Role role) const;
};

// Fraction grids for fitting, held-out testing, and the untouched gap.
struct SplitSchedule {
  std::vector<double> train_fractions;
  std::vector<double> test_fractions;
  std::vector<double> gap_fractions;

  // Throws InvalidArgument unless every list is strictly increasing within
  // (0,1], the lists are disjoint, and max(train) < min(test).
  void validate() const;

  // Union of the three lists, ascending, tagged with their role.
  std::vector<std::pair<double, Role>> all_fractions() const;
};

// Train 1%..10% step 1%, gap 15%..50% step 5%, test 55%..100% step 5%.
SplitSchedule default_schedule();

// Nearest count to fraction * total, halves rounded up, at least 1.
std::int64_t count_for_fraction(double fraction, std::int64_t total_size);

enum class PointFormat { Csv, Jsonl };

// Picks the format from a file extension (".jsonl"/".json" vs anything else).
PointFormat format_for_path(std::string_view path);

struct ParseOptions {
  std::string name;
  // Overrides any total declared inside the file.
  std::optional<std::int64_t> total_size;
};

// CSV columns: fraction,count,accuracy,n_runs,role with fraction or count
// required. Lines starting with '#' are comments; "# key=value" comments
// may declare name, total_size, num_classes and notes. JSONL starts with a
// dataset header object followed by one point object per line.
CurveDataset parse_points(std::istream& in, PointFormat format,
                          const ParseOptions& options = {});

// Exact inverse of parse_points for either format.
void write_points(std::ostream& out, const CurveDataset& dataset,
                  PointFormat format);

// Sorts points and checks every dataset invariant; throws InvalidArgument.
void normalize_dataset(CurveDataset& dataset);

// External measurement hook: returns the accuracy of a classifier trained on
// the given fraction of the data with the given seed.
using Probe = std::function<double(double fraction, std::uint64_t seed)>;

inline const std::vector<std::uint64_t> kDefaultProbeSeeds = {0, 1, 2};

// Calls the probe for every scheduled fraction and seed and averages over
// seeds. A throwing probe or an accuracy outside [0,1] aborts with an error
// naming the failing (fraction, seed) pair.
CurveDataset run_probe(const Probe& probe, const SplitSchedule& schedule,
                       std::span<const std::uint64_t> seeds,
                       std::int64_t total_size, std::string name = "probe");

}  // namespace samplesize
