#include "asmr/profiler.hpp"

#include <cmath>
#include <sstream>

#include "asmr/error.hpp"

namespace asmr {

namespace {

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

std::vector<std::size_t> uniform_widths(std::size_t width, std::size_t levels) {
  std::vector<std::size_t> widths(levels + 1, width);
  widths.front() = 1;
  widths.back() = 1;
  return widths;
}

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

std::string MacReport::to_csv() const {
  std::ostringstream ss;
  ss << "layer,points,macs\n";
  for (const auto& l : layers) ss << l.layer << ',' << l.points << ',' << l.macs << '\n';
  for (const auto& m : modulators) ss << "mod" << m.level << ',' << m.grids << ',' << m.macs << '\n';
  ss << "total," << total_points << ',' << total_macs << '\n';
  ss << "per_sample,," << format_double(per_sample()) << '\n';
  ss << "params,," << parameters << '\n';
  return ss.str();
}

std::uint64_t siren_parameter_count(const std::vector<std::size_t>& widths) {
  std::uint64_t n = 0;
  for (std::size_t i = 1; i < widths.size(); ++i) n += widths[i - 1] * widths[i] + widths[i];
  return n;
}

std::uint64_t asmr_parameter_count(const std::vector<std::size_t>& widths) {
  std::uint64_t n = siren_parameter_count(widths);
  for (std::size_t i = 1; i + 1 < widths.size(); ++i) n += widths.front() * widths[i];
  return n;
}

MacReport mac_siren(const std::vector<std::size_t>& widths, std::uint64_t n_samples) {
  if (widths.size() < 2) throw Error(ErrorCode::InconsistentConfig, "need at least two widths");
  MacReport r;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    const std::uint64_t macs = n_samples * widths[i - 1] * widths[i];
    r.layers.push_back({i, n_samples, macs});
    r.total_macs += macs;
  }
  r.total_points = n_samples;
  r.parameters = siren_parameter_count(widths);
  return r;
}

MacReport mac_asmr(const std::vector<std::size_t>& widths, const PartitionScheme& scheme) {
  if (widths.size() < 2 || widths.size() - 1 != scheme.levels()) {
    throw Error(ErrorCode::InconsistentConfig, std::to_string(widths.size() - 1) + " layers for a " +
                                                   std::to_string(scheme.levels()) + "-level scheme");
  }
  if (widths.front() != scheme.dims()) {
    throw Error(ErrorCode::InconsistentConfig, "input width " + std::to_string(widths.front()) + " for " +
                                                   std::to_string(scheme.dims()) + "-D scheme");
  }
  MacReport r;
  const std::size_t layers = widths.size() - 1;
  const std::uint64_t d = widths.front();
  for (std::size_t i = 1; i <= layers; ++i) {
    const auto points = static_cast<std::uint64_t>(scheme.cumulative_points(i - 1));
    const std::uint64_t macs = points * widths[i - 1] * widths[i];
    r.layers.push_back({i, points, macs});
    r.total_macs += macs;
  }
  for (std::size_t i = 1; i < layers; ++i) {
    const auto grids = static_cast<std::uint64_t>(scheme.level_points(i));
    const std::uint64_t macs = grids * d * widths[i];
    r.modulators.push_back({i, grids, macs});
    r.total_macs += macs;
  }
  r.total_points = static_cast<std::uint64_t>(scheme.total_points());
  r.parameters = asmr_parameter_count(widths);
  return r;
}

BoundCheck mac_bound_check(std::size_t width, std::uint64_t base, std::size_t levels) {
  if (base < 2 || levels < 1 || width < 1) {
    throw Error(ErrorCode::InconsistentConfig, "bound check needs base >= 2, levels >= 1, width >= 1");
  }
  BoundCheck c;
  c.base = base;
  c.levels = levels;
  c.layer_macs = static_cast<double>(width) * static_cast<double>(width);
  const auto n = static_cast<double>(ipow(base, levels));
  double evaluations = 0.0;
  for (std::size_t i = 1; i <= levels; ++i) evaluations += static_cast<double>(ipow(base, i));
  c.per_sample = c.layer_macs * evaluations / n;
  const auto b = static_cast<double>(base);
  c.closed_form = c.layer_macs * b * (n - 1.0) / ((b - 1.0) * n);
  c.asymptote = c.layer_macs * b / (b - 1.0);
  c.bound = 2.0 * c.layer_macs;
  c.siren_per_sample = static_cast<double>(levels) * c.layer_macs;

  const auto scheme = PartitionScheme::from_bases({std::vector<std::int64_t>(levels, static_cast<std::int64_t>(base))});
  c.exact_per_sample = mac_asmr(uniform_widths(width, levels), scheme).per_sample();
  return c;
}

std::vector<DepthRow> sweep_depth(std::size_t width, std::uint64_t base, std::size_t min_levels,
                                  std::size_t max_levels) {
  std::vector<DepthRow> rows;
  for (std::size_t l = min_levels; l <= max_levels; ++l) {
    const auto widths = uniform_widths(width, l);
    const auto check = mac_bound_check(width, base, l);
    DepthRow row;
    row.levels = l;
    row.siren_params = siren_parameter_count(widths);
    row.asmr_params = asmr_parameter_count(widths);
    row.siren_per_sample = mac_siren(widths, 1).per_sample();
    row.asmr_per_sample = check.exact_per_sample;
    row.asmr_idealized = check.per_sample;
    rows.push_back(row);
  }
  return rows;
}

std::string depth_csv(const std::vector<DepthRow>& rows) {
  std::ostringstream ss;
  ss << "levels,siren_params,asmr_params,siren_macs_per_sample,asmr_macs_per_sample,asmr_idealized_per_sample\n";
  for (const auto& r : rows) {
    ss << r.levels << ',' << r.siren_params << ',' << r.asmr_params << ',' << format_double(r.siren_per_sample) << ','
       << format_double(r.asmr_per_sample) << ',' << format_double(r.asmr_idealized) << '\n';
  }
  return ss.str();
}

}  // namespace asmr
