#include "samplesize/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "samplesize/error.hpp"

namespace samplesize {

CurveDataset generate(const SynthSpec& spec) {
  if (spec.total_size < 1) throw InvalidArgument("total size must be >= 1");
  if (!(spec.noise.sigma0 >= 0.0)) {
    throw InvalidArgument("noise sigma0 must be non-negative");
  }
  spec.schedule.validate();

  std::seed_seq seq{static_cast<std::uint32_t>(spec.rng_seed),
                    static_cast<std::uint32_t>(spec.rng_seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  CurveDataset ds;
  ds.name = spec.name;
  ds.total_size = spec.total_size;
  for (const auto& [fraction, role] : spec.schedule.all_fractions()) {
    const auto count = count_for_fraction(fraction, spec.total_size);
    double value = 0.0;
    try {
      value = evaluate(spec.generator, static_cast<double>(count));
    } catch (const DomainError& e) {
      throw DomainError("generator fails at count " + std::to_string(count) +
                        ": " + e.what());
    }
    if (spec.noise.sigma0 > 0.0) {
      const double sigma =
          spec.noise.size_decay
              ? spec.noise.sigma0 / std::sqrt(static_cast<double>(count))
              : spec.noise.sigma0;
      value += sigma * normal(rng);
    }
    ds.points.push_back({fraction, count, std::clamp(value, 0.0, 1.0), 1,
                         role});
  }
  normalize_dataset(ds);
  return ds;
}

OracleFit grid_oracle_fit(ModelKind kind, std::span<const CurvePoint> points,
                          const OracleGrid& grid) {
  if (kind != ModelKind::Exp) {
    throw InvalidArgument("grid oracle supports only the 2-parameter Exp family");
  }
  if (points.empty()) throw InvalidArgument("grid oracle needs points");
  if (grid.a_points < 2 || grid.b_points < 2) {
    throw InvalidArgument("grid oracle needs at least 2 points per axis");
  }
  const double cells =
      static_cast<double>(grid.a_points) * static_cast<double>(grid.b_points);
  if (cells > 1e8) {
    std::ostringstream os;
    os << "grid oracle rejects " << cells << " cells (limit 1e8)";
    throw InvalidArgument(os.str());
  }

  const auto axis = [](double lo, double hi, int n, int i) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  OracleFit best{{0.0, 0.0}, std::numeric_limits<double>::infinity()};
  for (int ib = 0; ib < grid.b_points; ++ib) {
    const double b = axis(grid.b_lower, grid.b_upper, grid.b_points, ib);
    std::vector<double> powers;
    powers.reserve(points.size());
    for (const auto& p : points) {
      powers.push_back(std::pow(static_cast<double>(p.count), b));
    }
    for (int ia = 0; ia < grid.a_points; ++ia) {
      const double a = axis(grid.a_lower, grid.a_upper, grid.a_points, ia);
      double rss = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double r = a * powers[i] - points[i].accuracy;
        rss += r * r;
      }
      if (rss < best.rss) best = {{a, b}, rss};
    }
  }
  return best;
}

}  // namespace samplesize
