#pragma once

// Posterior summaries pooled across chains: mean, sd, central 90% interval,
// split R-hat and effective sample size (Geyer initial monotone sequence on
// the multi-chain autocorrelation estimate).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "newsbias/error.hpp"
#include "newsbias/latent.hpp"

namespace newsbias::latent {

struct ParamStat {
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double rhat = 1.0;
  double ess = 0.0;
};

struct ParamSummary {
  std::size_t outlets = 0;
  std::vector<ParamStat> stats;  // alpha_0..alpha_{N-1}, x_0..x_{N-1}

  const ParamStat& alpha(std::size_t i) const { return stats[i]; }
  const ParamStat& x(std::size_t i) const { return stats[outlets + i]; }
};

inline constexpr std::size_t kMinSummaryDraws = 10;

// Linear interpolation between order statistics (R type 7).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace detail {

inline double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double var_of(std::span<const double> v, double m) {
  double s = 0.0;
  for (double a : v) s += (a - m) * (a - m);
  return s / static_cast<double>(v.size() - 1);
}

// Biased autocovariance at one lag.
inline double autocovariance(std::span<const double> v, double m, std::size_t lag) {
  const std::size_t n = v.size();
  double s = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) s += (v[t] - m) * (v[t + lag] - m);
  return s / static_cast<double>(n);
}

}  // namespace detail

// Split R-hat over equally long chains.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    halves.emplace_back(c.data(), half);
    halves.emplace_back(c.data() + c.size() - half, half);
  }
  const std::size_t m = halves.size();
  const std::size_t n = halves.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t k = 0; k < m; ++k) {
    means[k] = detail::mean_of(halves[k]);
    vars[k] = detail::var_of(halves[k], means[k]);
  }
  const double grand = detail::mean_of(means);
  double b = 0.0;
  for (double mk : means) b += (mk - grand) * (mk - grand);
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  const double w = detail::mean_of(vars);
  if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

inline double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double total = static_cast<double>(m * n);
  std::vector<double> means(m), vars(m);
  for (std::size_t k = 0; k < m; ++k) {
    means[k] = detail::mean_of(chains[k]);
    vars[k] = detail::var_of(chains[k], means[k]);
  }
  const double w = detail::mean_of(vars);
  double b_over_n = 0.0;
  if (m > 1) {
    const double grand = detail::mean_of(means);
    for (double mk : means) b_over_n += (mk - grand) * (mk - grand);
    b_over_n /= static_cast<double>(m - 1);
  }
  const double var_plus = w * (static_cast<double>(n) - 1.0) / static_cast<double>(n) + b_over_n;
  if (!(var_plus > 0.0)) return total;

  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += detail::autocovariance(chains[k], means[k], lag);
    s /= static_cast<double>(m);
    return 1.0 - (w - s) / var_plus;
  };

  // Geyer: sum pairs (rho_{2t} + rho_{2t+1}) while positive, enforcing monotone decrease.
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; 2 * t + 1 < n; ++t) {
    double pair = rho(2 * t) + rho(2 * t + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    sum += pair;
  }
  const double tau = -1.0 + 2.0 * sum;
  if (!(tau > 0.0)) return total;
  return std::min(total / tau, total * std::log10(total));
}

// Summary of one scalar quantity given its per-chain post-burn-in draws.
inline ParamStat summarize(const std::vector<std::vector<double>>& chains) {
  if (chains.empty() || chains.front().size() < kMinSummaryDraws) {
    throw DomainError("fewer than " + std::to_string(kMinSummaryDraws) + " post-burn-in draws");
  }
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  ParamStat s;
  s.mean = detail::mean_of(pooled);
  s.sd = std::sqrt(detail::var_of(pooled, s.mean));
  std::sort(pooled.begin(), pooled.end());
  s.q05 = quantile_sorted(pooled, 0.05);
  s.q95 = quantile_sorted(pooled, 0.95);
  if (pooled.front() == pooled.back()) {
    s.mean = pooled.front();
    s.sd = 0.0;
    s.rhat = 1.0;
    s.ess = static_cast<double>(pooled.size());
    return s;
  }
  s.rhat = split_rhat(chains);
  s.ess = effective_sample_size(chains);
  return s;
}

inline ParamSummary posterior_summary(const ChainDraws& draws, std::size_t burn_in) {
  if (burn_in >= draws.iterations) throw DomainError("burn_in must be smaller than the number of iterations");
  const std::size_t kept = draws.iterations - burn_in;
  if (kept < kMinSummaryDraws) {
    throw DomainError("fewer than " + std::to_string(kMinSummaryDraws) + " post-burn-in draws");
  }
  ParamSummary out;
  out.outlets = draws.outlets;
  out.stats.resize(draws.params());
  std::vector<std::vector<double>> per_chain(draws.chains.size(), std::vector<double>(kept));
  for (std::size_t q = 0; q < draws.params(); ++q) {
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
      for (std::size_t h = 0; h < kept; ++h) per_chain[c][h] = draws.value(c, burn_in + h, q);
    }
    out.stats[q] = summarize(per_chain);
  }
  return out;
}

}  // namespace newsbias::latent
