#include "samplesize/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include "json.hpp"
#include <ostream>
#include <sstream>

#include "samplesize/error.hpp"

namespace samplesize {

namespace {

using nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view text, std::size_t line,
               std::string_view column) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail_at(line, "invalid " + std::string(column) + " value '" +
                      std::string(text) + "'");
  }
  return value;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

struct RawPoint {
  std::optional<double> fraction;
  std::optional<std::int64_t> count;
  double accuracy = 0.0;
  int n_runs = 1;
  Role role = Role::Train;
  std::size_t line = 0;
};

struct Header {
  std::string name;
  std::optional<std::int64_t> total_size;
  std::optional<int> num_classes;
  std::string notes;
};

void check_raw(const RawPoint& p) {
  if (!p.fraction && !p.count) {
    fail_at(p.line, "row needs a fraction or a count");
  }
  if (!(p.accuracy >= 0.0 && p.accuracy <= 1.0)) {
    fail_at(p.line, "accuracy " + format_double(p.accuracy) +
                        " outside [0,1]");
  }
  if (p.fraction && !(*p.fraction > 0.0 && *p.fraction <= 1.0)) {
    fail_at(p.line, "fraction " + format_double(*p.fraction) +
                        " outside (0,1]");
  }
  if (p.count && *p.count < 1) fail_at(p.line, "count must be >= 1");
  if (p.n_runs < 1) fail_at(p.line, "n_runs must be >= 1");
}

CurveDataset assemble(Header header, const std::vector<RawPoint>& raw,
                      const ParseOptions& options) {
  CurveDataset ds;
  ds.name = !options.name.empty() ? options.name : header.name;
  ds.num_classes = header.num_classes;
  ds.notes = header.notes;

  std::optional<std::int64_t> total =
      options.total_size ? options.total_size : header.total_size;
  if (!total) {
    // Without a declared total, rows carrying both columns pin it down.
    const bool all_both = !raw.empty() && std::all_of(
        raw.begin(), raw.end(),
        [](const RawPoint& p) { return p.fraction && p.count; });
    if (!all_both) {
      throw ParseError(
          "total size unknown: declare total_size or give both fraction and "
          "count on every row");
    }
    const auto largest = std::max_element(
        raw.begin(), raw.end(),
        [](const RawPoint& a, const RawPoint& b) { return *a.count < *b.count; });
    total = static_cast<std::int64_t>(
        std::llround(static_cast<double>(*largest->count) / *largest->fraction));
  }
  if (*total < 1) throw ParseError("total size must be >= 1");
  ds.total_size = *total;

  for (const auto& p : raw) {
    CurvePoint pt;
    pt.accuracy = p.accuracy;
    pt.n_runs = p.n_runs;
    pt.role = p.role;
    pt.fraction = p.fraction ? *p.fraction
                             : static_cast<double>(*p.count) /
                                   static_cast<double>(ds.total_size);
    pt.count = p.count ? *p.count : count_for_fraction(*p.fraction, ds.total_size);
    if (pt.fraction > 1.0) {
      fail_at(p.line, "count " + std::to_string(pt.count) +
                          " exceeds total size " +
                          std::to_string(ds.total_size));
    }
    if (p.fraction && p.count &&
        std::llabs(pt.count - count_for_fraction(pt.fraction, ds.total_size)) > 1) {
      fail_at(p.line, "fraction " + format_double(pt.fraction) +
                          " and count " + std::to_string(pt.count) +
                          " disagree for total " +
                          std::to_string(ds.total_size));
    }
    ds.points.push_back(pt);
  }
  normalize_dataset(ds);
  return ds;
}

void apply_directive(Header& header, std::string_view comment,
                     std::size_t line) {
  const auto eq = comment.find('=');
  if (eq == std::string_view::npos) return;
  const std::string key = trim(comment.substr(0, eq));
  const std::string value = trim(comment.substr(eq + 1));
  if (key == "name") {
    header.name = value;
  } else if (key == "total_size") {
    header.total_size = parse_number<std::int64_t>(value, line, key);
  } else if (key == "num_classes") {
    header.num_classes = parse_number<int>(value, line, key);
  } else if (key == "notes") {
    header.notes = value;
  }
}

CurveDataset parse_csv(std::istream& in, const ParseOptions& options) {
  Header header;
  std::vector<std::string> columns;
  std::vector<RawPoint> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      apply_directive(header, std::string_view(text).substr(1), line_no);
      continue;
    }
    if (columns.empty()) {
      columns = split(text, ',');
      for (const auto& c : columns) {
        if (c != "fraction" && c != "count" && c != "accuracy" &&
            c != "n_runs" && c != "role") {
          fail_at(line_no, "unknown column '" + c + "'");
        }
        if (std::count(columns.begin(), columns.end(), c) > 1) {
          fail_at(line_no, "duplicate column '" + c + "'");
        }
      }
      const auto has = [&](const char* c) {
        return std::find(columns.begin(), columns.end(), c) != columns.end();
      };
      if (!has("accuracy")) fail_at(line_no, "header lacks an accuracy column");
      if (!has("fraction") && !has("count")) {
        fail_at(line_no, "header needs a fraction or count column");
      }
      continue;
    }

    const auto fields = split(text, ',');
    if (fields.size() != columns.size()) {
      fail_at(line_no, "expected " + std::to_string(columns.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    RawPoint p;
    p.line = line_no;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const auto& c = columns[i];
      const auto& v = fields[i];
      if (c == "fraction") {
        if (!v.empty()) p.fraction = parse_number<double>(v, line_no, c);
      } else if (c == "count") {
        if (!v.empty()) p.count = parse_number<std::int64_t>(v, line_no, c);
      } else if (c == "accuracy") {
        p.accuracy = parse_number<double>(v, line_no, c);
      } else if (c == "n_runs") {
        if (!v.empty()) p.n_runs = parse_number<int>(v, line_no, c);
      } else if (c == "role") {
        if (!v.empty()) {
          try {
            p.role = parse_role(v);
          } catch (const Error& e) {
            fail_at(line_no, e.what());
          }
        }
      }
    }
    check_raw(p);
    raw.push_back(p);
  }
  if (columns.empty()) throw ParseError("input has no header row");
  return assemble(std::move(header), raw, options);
}

CurveDataset parse_jsonl(std::istream& in, const ParseOptions& options) {
  Header header;
  bool have_header = false;
  std::vector<RawPoint> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail_at(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail_at(line_no, "expected a JSON object");
    try {
      if (!have_header) {
        if (obj.contains("accuracy")) {
          fail_at(line_no, "first line must be the dataset header object");
        }
        header.name = obj.value("name", std::string());
        if (obj.contains("total_size")) {
          header.total_size = obj.at("total_size").get<std::int64_t>();
        }
        if (obj.contains("num_classes") && !obj.at("num_classes").is_null()) {
          header.num_classes = obj.at("num_classes").get<int>();
        }
        header.notes = obj.value("notes", std::string());
        have_header = true;
        continue;
      }
      RawPoint p;
      p.line = line_no;
      if (!obj.contains("accuracy")) fail_at(line_no, "point lacks accuracy");
      p.accuracy = obj.at("accuracy").get<double>();
      if (obj.contains("fraction")) p.fraction = obj.at("fraction").get<double>();
      if (obj.contains("count")) p.count = obj.at("count").get<std::int64_t>();
      if (obj.contains("n_runs")) p.n_runs = obj.at("n_runs").get<int>();
      if (obj.contains("role")) {
        p.role = parse_role(obj.at("role").get<std::string>());
      }
      check_raw(p);
      raw.push_back(p);
    } catch (const nlohmann::json::exception& e) {
      fail_at(line_no, std::string("bad field type: ") + e.what());
    } catch (const InvalidArgument& e) {
      fail_at(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError("input has no dataset header line");
  return assemble(std::move(header), raw, options);
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Train:
      return "train";
    case Role::Test:
      return "test";
    case Role::Gap:
      return "gap";
  }
  return "unknown";
}

Role parse_role(std::string_view name) {
  if (name == "train") return Role::Train;
  if (name == "test") return Role::Test;
  if (name == "gap") return Role::Gap;
  throw InvalidArgument("unknown role '" + std::string(name) + "'");
}

std::vector<CurvePoint> CurveDataset::with_role(Role role) const {
  std::vector<CurvePoint> out;
  std::copy_if(points.begin(), points.end(), std::back_inserter(out),
               [role](const CurvePoint& p) { return p.role == role; });
  return out;
}

void SplitSchedule::validate() const {
  const auto check_list = [](const std::vector<double>& list,
                             const char* what) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!(list[i] > 0.0 && list[i] <= 1.0)) {
        throw InvalidArgument(std::string(what) + " fraction outside (0,1]");
      }
      if (i > 0 && !(list[i] > list[i - 1])) {
        throw InvalidArgument(std::string(what) +
                              " fractions must be strictly increasing");
      }
    }
  };
  check_list(train_fractions, "train");
  check_list(test_fractions, "test");
  check_list(gap_fractions, "gap");

  const auto all = all_fractions();
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].first == all[i - 1].first) {
      throw InvalidArgument("schedule lists overlap at fraction " +
                            format_double(all[i].first));
    }
  }
  if (!train_fractions.empty() && !test_fractions.empty() &&
      !(train_fractions.back() < test_fractions.front())) {
    throw InvalidArgument("train fractions must all precede test fractions");
  }
}

std::vector<std::pair<double, Role>> SplitSchedule::all_fractions() const {
  std::vector<std::pair<double, Role>> all;
  for (double f : train_fractions) all.emplace_back(f, Role::Train);
  for (double f : gap_fractions) all.emplace_back(f, Role::Gap);
  for (double f : test_fractions) all.emplace_back(f, Role::Test);
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first < b.first;
  });
  return all;
}

SplitSchedule default_schedule() {
  SplitSchedule s;
  for (int k = 1; k <= 10; ++k) s.train_fractions.push_back(k / 100.0);
  for (int k = 15; k <= 50; k += 5) s.gap_fractions.push_back(k / 100.0);
  for (int k = 55; k <= 100; k += 5) s.test_fractions.push_back(k / 100.0);
  return s;
}

std::int64_t count_for_fraction(double fraction, std::int64_t total_size) {
  const double exact = fraction * static_cast<double>(total_size);
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(exact + 0.5)));
}

PointFormat format_for_path(std::string_view path) {
  const auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.substr(path.size() - suffix.size()) == suffix;
  };
  return ends_with(".jsonl") || ends_with(".json") ? PointFormat::Jsonl
                                                   : PointFormat::Csv;
}

CurveDataset parse_points(std::istream& in, PointFormat format,
                          const ParseOptions& options) {
  return format == PointFormat::Csv ? parse_csv(in, options)
                                    : parse_jsonl(in, options);
}

void write_points(std::ostream& out, const CurveDataset& dataset,
                  PointFormat format) {
  if (format == PointFormat::Csv) {
    if (!dataset.name.empty()) out << "# name=" << dataset.name << '\n';
    out << "# total_size=" << dataset.total_size << '\n';
    if (dataset.num_classes) {
      out << "# num_classes=" << *dataset.num_classes << '\n';
    }
    if (!dataset.notes.empty()) out << "# notes=" << dataset.notes << '\n';
    out << "fraction,count,accuracy,n_runs,role\n";
    for (const auto& p : dataset.points) {
      out << format_double(p.fraction) << ',' << p.count << ','
          << format_double(p.accuracy) << ',' << p.n_runs << ','
          << to_string(p.role) << '\n';
    }
    return;
  }

  ordered_json header;
  header["name"] = dataset.name;
  header["total_size"] = dataset.total_size;
  if (dataset.num_classes) header["num_classes"] = *dataset.num_classes;
  header["notes"] = dataset.notes;
  out << header.dump() << '\n';
  for (const auto& p : dataset.points) {
    ordered_json obj;
    obj["fraction"] = p.fraction;
    obj["count"] = p.count;
    obj["accuracy"] = p.accuracy;
    obj["n_runs"] = p.n_runs;
    obj["role"] = std::string(to_string(p.role));
    out << obj.dump() << '\n';
  }
}

void normalize_dataset(CurveDataset& dataset) {
  if (dataset.total_size < 1) {
    throw InvalidArgument("dataset total size must be >= 1");
  }
  for (const std::string* text : {&dataset.name, &dataset.notes}) {
    if (text->find_first_of("\r\n") != std::string::npos) {
      throw InvalidArgument("dataset name and notes must be single-line");
    }
  }
  for (const auto& p : dataset.points) {
    if (!(p.fraction > 0.0 && p.fraction <= 1.0)) {
      throw InvalidArgument("point fraction " + format_double(p.fraction) +
                            " outside (0,1]");
    }
    if (p.count < 1) throw InvalidArgument("point count must be >= 1");
    if (!(p.accuracy >= 0.0 && p.accuracy <= 1.0)) {
      throw InvalidArgument("point accuracy " + format_double(p.accuracy) +
                            " outside [0,1]");
    }
    if (p.n_runs < 1) throw InvalidArgument("point n_runs must be >= 1");
    if (std::llabs(p.count - count_for_fraction(p.fraction,
                                                dataset.total_size)) > 1) {
      throw InvalidArgument("point count " + std::to_string(p.count) +
                            " inconsistent with fraction " +
                            format_double(p.fraction));
    }
  }
  std::stable_sort(dataset.points.begin(), dataset.points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) {
                     if (a.count != b.count) return a.count < b.count;
                     return a.role < b.role;
                   });
  for (std::size_t i = 1; i < dataset.points.size(); ++i) {
    const auto& a = dataset.points[i - 1];
    const auto& b = dataset.points[i];
    if (a.count == b.count && a.role == b.role) {
      throw InvalidArgument("duplicate count " + std::to_string(a.count) +
                            " within role " + std::string(to_string(a.role)));
    }
  }
}

CurveDataset run_probe(const Probe& probe, const SplitSchedule& schedule,
                       std::span<const std::uint64_t> seeds,
                       std::int64_t total_size, std::string name) {
  if (seeds.empty()) throw InvalidArgument("run_probe needs at least one seed");
  if (!probe) throw InvalidArgument("run_probe needs a probe callback");
  schedule.validate();

  CurveDataset ds;
  ds.name = std::move(name);
  ds.total_size = total_size;
  for (const auto& [fraction, role] : schedule.all_fractions()) {
    std::vector<double> values;
    values.reserve(seeds.size());
    for (const auto seed : seeds) {
      const auto where = [&] {
        return "probe failed at fraction=" + format_double(fraction) +
               " seed=" + std::to_string(seed);
      };
      double acc = 0.0;
      try {
        acc = probe(fraction, seed);
      } catch (const std::exception& e) {
        throw Error(where() + ": " + e.what());
      }
      if (!(acc >= 0.0 && acc <= 1.0)) {
        throw Error(where() + ": accuracy " + format_double(acc) +
                    " outside [0,1]");
      }
      values.push_back(acc);
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    ds.points.push_back({fraction, count_for_fraction(fraction, total_size),
                         sum / static_cast<double>(values.size()),
                         static_cast<int>(values.size()), role});
  }
  normalize_dataset(ds);
  return ds;
}

}  // namespace samplesize
