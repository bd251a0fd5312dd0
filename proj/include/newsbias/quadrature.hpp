#pragma once

// Posterior means for a single outlet by brute-force 2-D Riemann sums over
// an (alpha, x) grid. Used to check the sampler, not for production fits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "newsbias/latent.hpp"

namespace newsbias::latent {

struct GridSpec {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  double step = 0.01;
};

struct GridResult {
  double mean_alpha = 0.0;
  double mean_x = 0.0;
  std::optional<std::string> warning;
};

inline constexpr double kMaxGridStep = 0.02;

// x covers +-6 prior sds. The alpha range follows the data: for every x the
// likelihood peaks at alpha = log(total) - log(sum_j exp(-|x - z_j|)); the
// range spans those peaks plus a margin of several posterior sds.
inline GridSpec default_grid(const CountRow& y, const ModelConstants& c, double step = 0.01) {
  GridSpec g;
  g.step = step;
  g.x_min = -6.0 * c.prior_sd_x;
  g.x_max = 6.0 * c.prior_sd_x;
  const double total = static_cast<double>(y[0] + y[1] + y[2]);
  if (total == 0.0) {
    g.alpha_min = -6.0 * c.prior_sd_alpha;
    g.alpha_max = 4.0;
    return g;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x = g.x_min; x <= g.x_max; x += 0.05) {
    double s = 0.0;
    for (double z : c.ideal) s += std::exp(-std::abs(x - z));
    const double peak = std::log(total) - std::log(s);
    lo = std::min(lo, peak);
    hi = std::max(hi, peak);
  }
  const double margin = 1.0 + 8.0 / std::sqrt(total);
  g.alpha_min = lo - margin;
  g.alpha_max = hi + margin;
  return g;
}

inline GridResult grid_posterior_oracle(const CountRow& y, const GridSpec& grid, const ModelConstants& c) {
  if (!(grid.step > 0.0) || !(grid.alpha_max > grid.alpha_min) || !(grid.x_max > grid.x_min)) {
    throw DomainError("invalid grid");
  }
  const auto na = static_cast<std::size_t>(std::floor((grid.alpha_max - grid.alpha_min) / grid.step)) + 1;
  const auto nx = static_cast<std::size_t>(std::floor((grid.x_max - grid.x_min) / grid.step)) + 1;
  const std::vector<CountRow> rows{y};

  std::vector<double> lp(na * nx);
  double peak = -std::numeric_limits<double>::infinity();
  LatentParams p{{0.0}, {0.0}};
  for (std::size_t a = 0; a < na; ++a) {
    p.alpha[0] = grid.alpha_min + static_cast<double>(a) * grid.step;
    for (std::size_t b = 0; b < nx; ++b) {
      p.x[0] = grid.x_min + static_cast<double>(b) * grid.step;
      const double v = log_posterior(p, rows, c);
      lp[a * nx + b] = v;
      peak = std::max(peak, v);
    }
  }
  double mass = 0.0, sa = 0.0, sx = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    const double av = grid.alpha_min + static_cast<double>(a) * grid.step;
    for (std::size_t b = 0; b < nx; ++b) {
      const double w = std::exp(lp[a * nx + b] - peak);
      mass += w;
      sa += w * av;
      sx += w * (grid.x_min + static_cast<double>(b) * grid.step);
    }
  }
  GridResult r;
  r.mean_alpha = sa / mass;
  r.mean_x = sx / mass;
  if (grid.step > kMaxGridStep) {
    r.warning = "grid step " + std::to_string(grid.step) + " is coarser than " + std::to_string(kMaxGridStep);
  }
  return r;
}

}  // namespace newsbias::latent
