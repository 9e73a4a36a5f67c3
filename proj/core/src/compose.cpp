#include "crimewave/compose.hpp"

#include <cmath>
#include <limits>

#include "crimewave/csv.hpp"
#include "crimewave/error.hpp"

namespace crimewave {

ComposedSpectrum composed_spectrum(std::span<const RegionGlobalResult> regions) {
  if (regions.empty()) fail(ErrorKind::Input, "composed_spectrum: no regions");
  const auto& grid = regions.front().spectrum.grid;
  ComposedSpectrum out;
  out.n_regions = regions.size();
  out.periods = grid.fourier_periods;
  out.counts.assign(grid.size(), 0);
  for (const auto& r : regions) {
    if (r.spectrum.grid.scales != grid.scales || r.mask.mask.size() != grid.size()) {
      fail(ErrorKind::Config, "composed_spectrum: regions do not share one scale grid");
    }
    for (std::size_t j = 0; j < grid.size(); ++j) out.counts[j] += r.mask.at(j) ? 1 : 0;
  }
  out.fraction.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out.fraction[j] = static_cast<double>(out.counts[j]) / static_cast<double>(out.n_regions);
  }
  return out;
}

ComposedBandSeries composed_band_series(std::span<const RegionBandResult> regions, CoiPolicy policy) {
  if (regions.empty()) fail(ErrorKind::Input, "composed_band_series: no regions");
  const auto& first = regions.front().power;
  const std::size_t n = first.power.size();
  ComposedBandSeries out;
  out.band = first.band;
  out.n_regions = regions.size();
  out.coi_policy = policy;
  out.counts.assign(n, 0);
  out.valid_regions.assign(n, 0);
  for (const auto& r : regions) {
    if (r.power.power.size() != n || r.mask.mask.size() != n ||
        r.power.band.lo_years != first.band.lo_years || r.power.band.hi_years != first.band.hi_years ||
        r.power.scale_indices != first.scale_indices) {
      fail(ErrorKind::Config, "composed_band_series: regions do not share one grid and band");
    }
    for (std::size_t t = 0; t < n; ++t) {
      const bool valid = policy == CoiPolicy::CountAsInsignificant || r.power.valid[t];
      if (!valid) continue;
      ++out.valid_regions[t];
      if (r.mask.at(t)) ++out.counts[t];
    }
  }
  out.fraction.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < n; ++t) {
    if (out.valid_regions[t] > 0) {
      out.fraction[t] = static_cast<double>(out.counts[t]) / static_cast<double>(out.valid_regions[t]);
    }
  }
  return out;
}

std::string composed_spectrum_csv(const ComposedSpectrum& c) {
  CsvTable table{"period_weeks", "count", "fraction"};
  for (std::size_t j = 0; j < c.counts.size(); ++j) {
    table.row({format_double(c.periods[j]), std::to_string(c.counts[j]), format_double(c.fraction[j])});
  }
  return table.str();
}

std::string composed_band_csv(const ComposedBandSeries& c) {
  CsvTable table{"week", "count", "valid_regions", "fraction"};
  for (std::size_t t = 0; t < c.counts.size(); ++t) {
    table.row({std::to_string(t), std::to_string(c.counts[t]), std::to_string(c.valid_regions[t]),
               format_double(c.fraction[t])});
  }
  return table.str();
}

}  // namespace crimewave
