#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "crimewave/error.hpp"
#include "crimewave/pipeline.hpp"
#include "crimewave/random.hpp"
#include "crimewave/significance.hpp"
#include "doctest.h"

using namespace crimewave;

namespace {

std::vector<double> ar1(std::size_t n, double alpha, std::uint64_t seed, double sigma = 1.0) {
  Rng rng(seed);
  return ar1_series(n, alpha, sigma, rng);
}

IndexRange all(std::size_t n) { return {0, n - 1}; }

}  // namespace

TEST_CASE("estimate_ar1") {
  CHECK(std::abs(estimate_ar1(ar1(10000, 0.0, 2), all(10000))) <= 0.03);
  CHECK(std::abs(estimate_ar1(ar1(10000, 0.7, 3), all(10000)) - 0.7) <= 0.03);
  CHECK_THROWS_AS(estimate_ar1(std::vector<double>(100, 4.0), all(100)), Error);
  CHECK_THROWS_AS(estimate_ar1(std::vector<double>{1.0, 2.0}, all(2)), Error);

  // Anti-correlated noise clamps to zero.
  std::vector<double> alt(200);
  for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = (t % 2 == 0) ? 1.0 : -1.0;
  CHECK(estimate_ar1(alt, all(alt.size())) == 0.0);
}

TEST_CASE("background_spectrum") {
  SUBCASE("white noise is flat") {
    const auto g = build_grid(520);
    for (double p : background_spectrum(0.0, g, 520)) CHECK(p == doctest::Approx(1.0));
  }
  SUBCASE("low-frequency limit") {
    // Largest scale of a long series sits at k ~ 1, where cos(2 pi k / N) ~ 1.
    const std::size_t n = 1u << 20;
    const auto g = build_grid(n, 2.0, 0.25);
    const double limit = (1 - 0.49) / ((1 - 0.7) * (1 - 0.7));
    CHECK(limit == doctest::Approx(5.667).epsilon(1e-4));
    CHECK(background_spectrum(0.7, g, n).back() == doctest::Approx(limit).epsilon(1e-6));
  }
  SUBCASE("mean over all Fourier frequencies is one") {
    // A grid whose periods are N/k for k = 1..N-1, plus k = 0 via an infinite period.
    const std::size_t n = 4096;
    ScaleGrid g;
    g.n = n;
    for (std::size_t k = 0; k < n; ++k) {
      const double period = k == 0 ? std::numeric_limits<double>::infinity()
                                   : static_cast<double>(n) / static_cast<double>(k);
      g.fourier_periods.push_back(period);
      g.scales.push_back(period / fourier_factor());
    }
    for (double alpha : {0.3, 0.7, 0.9}) {
      const auto p = background_spectrum(alpha, g, n);
      double mean = 0.0;
      for (double v : p) mean += v;
      mean /= static_cast<double>(n);
      CHECK(mean == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("alpha domain") { CHECK_THROWS_AS(background_spectrum(1.0, build_grid(64), 64), Error); }
}

TEST_CASE("chi-square quantiles") {
  CHECK(chi2_quantile(0.95, 2) == doctest::Approx(5.991464547).epsilon(1e-9));
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.841458821).epsilon(1e-9));
  CHECK(chi2_quantile(0.99, 10) == doctest::Approx(23.20925116).epsilon(1e-9));
}

TEST_CASE("pointwise_threshold") {
  const auto g = build_grid(520);
  const auto ctx = make_context(0.0, 1.0, g);
  for (double t : pointwise_threshold(ctx, g)) CHECK(t == doctest::Approx(2.995732274).epsilon(1e-9));

  const auto red = make_context(0.6, 2.5, g);
  const auto thr = pointwise_threshold(red, g);
  for (std::size_t j = 0; j < g.size(); ++j)
    CHECK(thr[j] == doctest::Approx(2.5 * red.background[j] * 5.991464547 / 2).epsilon(1e-9));
}

TEST_CASE("global_threshold") {
  const auto g = build_grid(520);
  const auto ctx = make_context(0.4, 1.3, g);
  const auto point = pointwise_threshold(ctx, g);

  SUBCASE("single sample equals the local test") {
    const std::vector<std::size_t> ones(g.size(), 1);
    const auto thr = global_threshold(ctx, g, ones);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(thr[j] == doctest::Approx(point[j]));
  }
  SUBCASE("long averages shrink toward sigma^2 P_k") {
    const std::vector<std::size_t> many(g.size(), 1000000);
    const auto thr = global_threshold(ctx, g, many);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double nu = 2.0 * 1000000 / (2.32 * g.scales[j]);
      const double direct = ctx.variance * ctx.background[j] * chi2_quantile(0.95, nu) / nu;
      CHECK(thr[j] == doctest::Approx(direct).epsilon(1e-3));
      CHECK(thr[j] / (ctx.variance * ctx.background[j]) < 1.0 + 2.0 * std::sqrt(2.0 / nu));
      CHECK(thr[j] > ctx.variance * ctx.background[j]);
    }
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(global_threshold(ctx, g, std::vector<std::size_t>(3, 1)), Error);
  }
}

TEST_CASE("scale_avg_threshold") {
  const auto g = build_grid(520);
  const auto ctx = make_context(0.5, 0.8, g);
  SUBCASE("one-scale band") {
    const auto point = pointwise_threshold(ctx, g);
    for (std::size_t j : {10u, 100u}) {
      const std::vector<std::size_t> idx{j};
      // nu reduces to 2 sqrt(1 + (dj/dj0)^2) rather than exactly 2.
      const double r = g.dj / 0.6;
      const double nu = 2.0 * std::sqrt(1.0 + r * r);
      const double expect = g.dj * g.dt / (kCDelta * g.scales[j]) * ctx.variance * ctx.background[j] *
                            chi2_quantile(0.95, nu) / nu;
      CHECK(scale_avg_threshold(ctx, g, idx) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(scale_avg_threshold(ctx, g, idx) ==
            doctest::Approx(g.dj / (kCDelta * g.scales[j]) * point[j]).epsilon(0.02));
    }
  }
  SUBCASE("empty band") { CHECK_THROWS_AS(scale_avg_threshold(ctx, g, {}), Error); }
}

TEST_CASE("null calibration by simulation") {
  // Smaller ensembles than the acceptance run; tolerances widened to match.
  const std::size_t n = 520;
  const double alpha = 0.72;
  const auto g = build_grid(n);
  const auto ctx = make_context(alpha, 1.0, g);
  const auto thr = pointwise_threshold(ctx, g);
  const auto band = band_indices(g, kCircannual);
  const double bthr = scale_avg_threshold(ctx, g, band);

  std::size_t hit = 0, tot = 0, bhit = 0, btot = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto w = transform(ar1(n, alpha, derive_seed(77, r)), g);
    const auto m = pointwise_mask(w, ctx);
    for (std::size_t j = 0; j < g.size(); ++j)
      for (std::size_t t = 0; t < n; ++t)
        if (w.in_cone(j, t)) {
          ++tot;
          hit += m.at(j, t);
        }
    const auto p = scale_avg_power(w, kCircannual);
    const auto bm = scale_avg_mask(p, bthr);
    for (std::size_t t = 0; t < n; ++t)
      if (p.valid[t]) {
        ++btot;
        bhit += bm.at(t);
      }
  }
  CHECK(std::abs(static_cast<double>(hit) / tot - 0.05) <= 0.01);
  CHECK(std::abs(static_cast<double>(bhit) / btot - 0.05) <= 0.02);
  CHECK(thr.size() == g.size());
}

TEST_CASE("Monte-Carlo thresholds") {
  const std::size_t n = 256;
  const auto g = build_grid(n);
  MonteCarloOptions opts;
  opts.replicates = 200;
  opts.seed = 5;

  SUBCASE("deterministic and linear in variance") {
    const double a = montecarlo_scale_avg_threshold(0.5, 1.0, g, kCircannual, opts);
    const double b = montecarlo_scale_avg_threshold(0.5, 3.0, g, kCircannual, opts);
    CHECK(b == doctest::Approx(3.0 * a).epsilon(1e-14));
    CHECK(a == montecarlo_scale_avg_threshold(0.5, 1.0, g, kCircannual, opts));
  }
  SUBCASE("band threshold agrees with the analytic one") {
    const auto ctx = make_context(0.5, 1.0, g);
    const double analytic = scale_avg_threshold(ctx, g, band_indices(g, kCircannual));
    const double mc = montecarlo_scale_avg_threshold(0.5, 1.0, g, kCircannual, opts);
    CHECK(mc == doctest::Approx(analytic).epsilon(0.15));
  }
  SUBCASE("global threshold calibrates on fresh surrogates") {
    const auto thr = montecarlo_global_threshold(0.5, 1.0, g, opts);
    std::size_t hits = 0, tests = 0;
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto gs = global_spectrum(transform(ar1(n, 0.5, derive_seed(1234, r)), g));
      const auto m = global_mask(gs, thr, SignificanceMethod::MonteCarlo);
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (gs.n_avg[j] == 0) continue;
        ++tests;
        hits += m.at(j);
      }
    }
    CHECK(std::abs(static_cast<double>(hits) / tests - 0.05) <= 0.02);
  }
}

TEST_CASE("mask properties") {
  const std::size_t n = 300;
  const auto g = build_grid(n);
  auto y = ar1(n, 0.4, 99);
  for (std::size_t t = 0; t < n; ++t) y[t] += 0.8 * std::sin(2 * std::numbers::pi * t / 52.0);
  const auto base = ProcessedSeries::from_values(y);

  SUBCASE("amplitude scaling leaves every mask unchanged") {
    for (double c : {0.01, 3.0, 250.0}) {
      std::vector<double> scaled(y);
      for (double& v : scaled) v *= c;
      const auto s2 = ProcessedSeries::from_values(scaled);
      const auto c1 = make_context(base, g);
      const auto c2 = make_context(s2, g);
      CHECK(c2.alpha == doctest::Approx(c1.alpha).epsilon(1e-12));
      const auto w1 = transform(base, g);
      const auto w2 = transform(s2, g);
      CHECK(pointwise_mask(w1, c1).mask == pointwise_mask(w2, c2).mask);
      CHECK(global_mask(global_spectrum(w1), c1).mask == global_mask(global_spectrum(w2), c2).mask);
      const auto idx = band_indices(g, kCircannual);
      CHECK(scale_avg_mask(scale_avg_power(w1, kCircannual), scale_avg_threshold(c1, g, idx)).mask ==
            scale_avg_mask(scale_avg_power(w2, kCircannual), scale_avg_threshold(c2, g, idx)).mask);
    }
  }
  SUBCASE("raising p never adds significant points") {
    const auto w = transform(base, g);
    const auto lo = pointwise_mask(w, make_context(base, g, 0.90));
    const auto hi = pointwise_mask(w, make_context(base, g, 0.99));
    for (std::size_t i = 0; i < lo.mask.size(); ++i)
      if (hi.mask[i]) CHECK(lo.mask[i]);
    CHECK(hi.count() <= lo.count());
  }
  SUBCASE("cone-excluded points are never significant") {
    const auto w = transform(base, g);
    const auto m = pointwise_mask(w, make_context(base, g));
    for (std::size_t j = 0; j < g.size(); ++j)
      for (std::size_t t = 0; t < n; ++t)
        if (!w.in_cone(j, t)) CHECK_FALSE(m.at(j, t));
    CHECK(m.rows == g.size());
    CHECK(m.cols == n);
  }
}

TEST_CASE("method names and report") {
  CHECK(parse_method("analytic") == SignificanceMethod::Analytic);
  CHECK(parse_method("montecarlo") == SignificanceMethod::MonteCarlo);
  CHECK(parse_method("both") == SignificanceMethod::Both);
  CHECK_THROWS_AS(parse_method("bootstrap"), Error);
  CHECK(to_string(SignificanceMethod::MonteCarlo) == "montecarlo");

  const auto g = build_grid(64);
  const auto ctx = make_context(0.3, 2.0, g);
  const auto report = nlohmann::json::parse(threshold_report_json(ctx, pointwise_threshold(ctx, g),
                                                                  SignificanceMethod::Analytic));
  CHECK(report["alpha"] == 0.3);
  CHECK(report["variance"] == 2.0);
  CHECK(report["p_level"] == 0.95);
  CHECK(report["method"] == "analytic");
  CHECK(report["per_scale_thresholds"].size() == g.size());
}

TEST_CASE("pipeline operative methods") {
  CHECK(operative_global(SignificanceMethod::Both) == SignificanceMethod::MonteCarlo);
  CHECK(operative_band(SignificanceMethod::Both) == SignificanceMethod::Analytic);
  CHECK(operative_global(SignificanceMethod::Analytic) == SignificanceMethod::Analytic);
  CHECK(operative_band(SignificanceMethod::MonteCarlo) == SignificanceMethod::MonteCarlo);

  AnalysisOptions opts;
  opts.mc_replicates = 50;
  const std::vector<ProcessedSeries> series{ProcessedSeries::from_values(ar1(200, 0.3, 1)),
                                            ProcessedSeries::from_values(ar1(200, 0.3, 2))};
  const std::vector<int> ids{4, 9};
  const auto a = analyze_regions(series, ids, opts);
  const auto b = analyze_regions(series, ids, opts);
  REQUIRE(a.size() == 2);
  CHECK(a[1].region_id == 9);
  CHECK(a[0].global.mask.method == SignificanceMethod::MonteCarlo);
  CHECK(a[0].bands[0].mask.method == SignificanceMethod::Analytic);
  CHECK(a[0].global_montecarlo == b[0].global_montecarlo);
  CHECK(a[0].band_montecarlo.size() == 1);

  opts.method = SignificanceMethod::Analytic;
  const auto c = analyze_regions(series, ids, opts);
  CHECK(c[0].global_montecarlo.empty());
  CHECK(c[0].global.mask.method == SignificanceMethod::Analytic);
}
