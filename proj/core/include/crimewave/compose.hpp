#pragma once

#include <span>
#include <string>
#include <vector>

#include "crimewave/significance.hpp"
#include "crimewave/wavelet.hpp"

namespace crimewave {

struct RegionGlobalResult {
  GlobalSpectrum spectrum;
  SignificanceMask mask;  // kind == Global
};

struct RegionBandResult {
  ScaleAvgPower power;
  SignificanceMask mask;  // kind == ScaleAvg
};

/// C_c(s): share of regions whose global spectrum is significant at s.
struct ComposedSpectrum {
  std::vector<double> fraction;
  std::vector<std::size_t> counts;  // N_c(s)
  std::size_t n_regions = 0;
  std::vector<double> periods;      // Fourier period per scale, weeks
};

ComposedSpectrum composed_spectrum(std::span<const RegionGlobalResult> regions);

enum class CoiPolicy {
  Exclude,               // cone-excluded pairs leave numerator and denominator
  CountAsInsignificant,  // every region stays in the denominator
};

/// C_c^b(t): share of cone-valid regions whose band power is significant.
struct ComposedBandSeries {
  std::vector<double> fraction;              // NaN where no region is valid
  std::vector<std::size_t> counts;
  std::vector<std::size_t> valid_regions;
  Band band;
  std::size_t n_regions = 0;
  CoiPolicy coi_policy = CoiPolicy::Exclude;
};

ComposedBandSeries composed_band_series(std::span<const RegionBandResult> regions,
                                        CoiPolicy policy = CoiPolicy::Exclude);

/// period_weeks,count,fraction
std::string composed_spectrum_csv(const ComposedSpectrum& c);
/// week,count,valid_regions,fraction
std::string composed_band_csv(const ComposedBandSeries& c);

}  // namespace crimewave
