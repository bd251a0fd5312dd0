#pragma once

// Poisson latent-space model for one event type:
//
//   y_ij ~ Poisson(lambda_ij),  log lambda_ij = alpha_i - |x_i - z_j|
//   alpha_i ~ N(0, sd_alpha^2),  x_i ~ N(0, sd_x^2)
//
// with fixed ideal stances z = (-1, 0, 1) for (anti, neutral, pro). The
// posterior is explored with a Metropolis-within-Gibbs sampler that updates
// each alpha_i and then each x_i by random-walk Metropolis-Hastings.

#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "newsbias/corpus.hpp"
#include "newsbias/error.hpp"

namespace newsbias::latent {

struct ModelConstants {
  std::array<double, 3> ideal{-1.0, 0.0, 1.0};
  double prior_sd_alpha = 15.0;
  double prior_sd_x = 1.0;

  // Reads the prior scales as variances instead of standard deviations.
  static ModelConstants from_variances(double var_alpha, double var_x) {
    ModelConstants c;
    c.prior_sd_alpha = std::sqrt(var_alpha);
    c.prior_sd_x = std::sqrt(var_x);
    return c;
  }

  void validate() const {
    if (!(ideal[0] < ideal[1] && ideal[1] < ideal[2])) throw DomainError("ideal stances must be strictly increasing");
    if (!(prior_sd_alpha > 0.0) || !(prior_sd_x > 0.0)) throw DomainError("prior standard deviations must be positive");
  }
};

struct LatentParams {
  std::vector<double> alpha;
  std::vector<double> x;
};

struct ChainConfig {
  std::size_t iterations = 5000;
  std::size_t burn_in = 1000;
  std::size_t chains = 4;
  std::uint64_t seed = 0;
  double initial_proposal_sd = 0.5;
  bool adapt = true;
  bool parallel = true;

  void validate() const {
    if (iterations == 0) throw DomainError("iterations must be positive");
    if (burn_in >= iterations) throw DomainError("burn_in must be smaller than iterations");
    if (chains == 0) throw DomainError("chains must be positive");
    if (!(initial_proposal_sd > 0.0)) throw DomainError("initial proposal sd must be positive");
  }
};

inline constexpr std::size_t kAdaptWindow = 50;
inline constexpr double kTargetAcceptance = 0.44;

// ---------------------------------------------------------------------------
// densities

inline double log_intensity(double alpha_i, double x_i, double z_j) { return alpha_i - std::abs(x_i - z_j); }

inline double normal_logpdf(double v, double mean, double sd) {
  const double u = (v - mean) / sd;
  return -0.5 * u * u - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Row log-likelihood without the log(y!) constant.
inline double row_kernel(double alpha_i, double x_i, const CountRow& y, const ModelConstants& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double eta = log_intensity(alpha_i, x_i, c.ideal[j]);
    s += static_cast<double>(y[j]) * eta - std::exp(eta);
  }
  return s;
}

inline double row_log_factorials(const CountRow& y) {
  double s = 0.0;
  for (auto v : y) s += std::lgamma(static_cast<double>(v) + 1.0);
  return s;
}

inline void check_dims(const LatentParams& p, std::span<const CountRow> y) {
  if (p.alpha.size() != y.size() || p.x.size() != y.size()) {
    throw DomainError("dimension mismatch: " + std::to_string(y.size()) + " count rows, " +
                      std::to_string(p.alpha.size()) + " alphas, " + std::to_string(p.x.size()) + " stances");
  }
}

inline double log_likelihood(const LatentParams& p, std::span<const CountRow> y, const ModelConstants& c) {
  check_dims(p, y);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += row_kernel(p.alpha[i], p.x[i], y[i], c) - row_log_factorials(y[i]);
  return s;
}

inline double log_prior(const LatentParams& p, const ModelConstants& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.alpha.size(); ++i) {
    s += normal_logpdf(p.alpha[i], 0.0, c.prior_sd_alpha) + normal_logpdf(p.x[i], 0.0, c.prior_sd_x);
  }
  return s;
}

inline double log_posterior(const LatentParams& p, std::span<const CountRow> y, const ModelConstants& c) {
  return log_likelihood(p, y, c) + log_prior(p, c);
}

// Full conditionals up to a constant.
inline double alpha_conditional(double alpha_i, double x_i, const CountRow& y, const ModelConstants& c) {
  return row_kernel(alpha_i, x_i, y, c) + normal_logpdf(alpha_i, 0.0, c.prior_sd_alpha);
}

inline double x_conditional(double alpha_i, double x_i, const CountRow& y, const ModelConstants& c) {
  return row_kernel(alpha_i, x_i, y, c) + normal_logpdf(x_i, 0.0, c.prior_sd_x);
}

// ---------------------------------------------------------------------------
// random-walk Metropolis-Hastings

struct MhStep {
  double value;
  double logpdf;
  bool accepted;
};

template <typename LogPdf, typename Rng>
MhStep rwmh_update(double current, LogPdf&& logpdf, double proposal_sd, Rng& rng, double current_logpdf) {
  if (!(proposal_sd > 0.0)) throw DomainError("proposal sd must be positive");
  std::normal_distribution<double> step(0.0, proposal_sd);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double proposal = current + step(rng);
  const double lp = logpdf(proposal);
  const double u = unif(rng);
  if (!std::isfinite(lp)) return {current, current_logpdf, false};
  const double delta = lp - current_logpdf;
  if (std::log(u) < delta) return {proposal, lp, true};
  return {current, current_logpdf, false};
}

template <typename LogPdf, typename Rng>
MhStep rwmh_update(double current, LogPdf&& logpdf, double proposal_sd, Rng& rng) {
  const double cur = logpdf(current);
  return rwmh_update(current, logpdf, proposal_sd, rng, cur);
}

// ---------------------------------------------------------------------------
// chains

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 chain_rng(std::uint64_t seed, std::size_t chain) {
  return std::mt19937_64(splitmix64(seed ^ static_cast<std::uint64_t>(chain)));
}

// Draws of one chain, row-major iterations x params. Params are laid out
// alpha_0..alpha_{N-1}, x_0..x_{N-1}.
struct Chain {
  std::vector<double> values;
  std::vector<std::uint64_t> accepted;  // per param, post-burn-in
  std::vector<double> proposal_sd;      // per param, after adaptation
};

struct ChainDraws {
  std::size_t outlets = 0;
  std::size_t iterations = 0;
  std::vector<Chain> chains;

  std::size_t params() const { return 2 * outlets; }
  double value(std::size_t chain, std::size_t iter, std::size_t param) const {
    return chains[chain].values[iter * params() + param];
  }
  double alpha(std::size_t chain, std::size_t iter, std::size_t i) const { return value(chain, iter, i); }
  double x(std::size_t chain, std::size_t iter, std::size_t i) const { return value(chain, iter, outlets + i); }
};

// Chain c starts at alpha = 0 and x = 0 for c = 0, then x = +0.5, -0.5, ...
inline double initial_stance(std::size_t chain) {
  if (chain == 0) return 0.0;
  return chain % 2 == 1 ? 0.5 : -0.5;
}

inline Chain run_single_chain(std::span<const CountRow> y, const ChainConfig& cfg, const ModelConstants& c,
                              std::size_t chain_index) {
  const std::size_t n = y.size();
  const std::size_t p = 2 * n;
  auto rng = chain_rng(cfg.seed, chain_index);

  std::vector<double> alpha(n, 0.0), x(n, initial_stance(chain_index));
  std::vector<double> sd(p, cfg.initial_proposal_sd);
  std::vector<std::uint64_t> window_acc(p, 0);

  Chain out;
  out.values.resize(cfg.iterations * p);
  out.accepted.assign(p, 0);

  for (std::size_t h = 0; h < cfg.iterations; ++h) {
    const bool burning = h < cfg.burn_in;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      auto step = rwmh_update(
          alpha[i], [&](double a) { return alpha_conditional(a, xi, y[i], c); }, sd[i], rng);
      alpha[i] = step.value;
      if (step.accepted) {
        ++window_acc[i];
        if (!burning) ++out.accepted[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = alpha[i];
      auto step = rwmh_update(
          x[i], [&](double v) { return x_conditional(ai, v, y[i], c); }, sd[n + i], rng);
      x[i] = step.value;
      if (step.accepted) {
        ++window_acc[n + i];
        if (!burning) ++out.accepted[n + i];
      }
    }

    double* row = out.values.data() + h * p;
    std::copy(alpha.begin(), alpha.end(), row);
    std::copy(x.begin(), x.end(), row + n);

    if ((h + 1) % kAdaptWindow == 0) {
      if (burning && cfg.adapt) {
        for (std::size_t q = 0; q < p; ++q) {
          const double rate = static_cast<double>(window_acc[q]) / static_cast<double>(kAdaptWindow);
          if (rate > kTargetAcceptance) sd[q] *= 1.1;
          else if (rate < kTargetAcceptance) sd[q] *= 0.9;
        }
      }
      std::fill(window_acc.begin(), window_acc.end(), 0);
    }
  }
  out.proposal_sd = std::move(sd);
  return out;
}

inline ChainDraws run_chain(std::span<const CountRow> y, const ChainConfig& cfg, const ModelConstants& c) {
  cfg.validate();
  c.validate();
  ChainDraws draws;
  draws.outlets = y.size();
  draws.iterations = cfg.iterations;
  draws.chains.resize(cfg.chains);
  if (cfg.parallel && cfg.chains > 1) {
    std::vector<std::future<Chain>> jobs;
    for (std::size_t k = 0; k < cfg.chains; ++k) {
      jobs.push_back(std::async(std::launch::async, [&, k] { return run_single_chain(y, cfg, c, k); }));
    }
    for (std::size_t k = 0; k < cfg.chains; ++k) draws.chains[k] = jobs[k].get();
  } else {
    for (std::size_t k = 0; k < cfg.chains; ++k) draws.chains[k] = run_single_chain(y, cfg, c, k);
  }
  return draws;
}

// ---------------------------------------------------------------------------
// synthetic data

template <typename Rng>
std::vector<CountRow> simulate_counts(std::span<const double> alpha, std::span<const double> x,
                                      const ModelConstants& c, Rng& rng) {
  if (alpha.size() != x.size()) throw DomainError("alpha and x must have equal length");
  std::vector<CountRow> y(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double lambda = std::exp(log_intensity(alpha[i], x[i], c.ideal[j]));
      std::poisson_distribution<std::uint64_t> pois(lambda);
      y[i][j] = lambda > 0.0 ? pois(rng) : 0;
    }
  }
  return y;
}

}  // namespace newsbias::latent
