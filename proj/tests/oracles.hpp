#pragma once

// Test-only reference computations. These deliberately avoid the library
// code paths they are used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace oracle {

// Poisson log-pmf from the definition.
inline double poisson_logpmf(std::uint64_t k, double lambda) {
  double log_fact = 0.0;
  for (std::uint64_t i = 2; i <= k; ++i) log_fact += std::log(static_cast<double>(i));
  return static_cast<double>(k) * std::log(lambda) - lambda - log_fact;
}

inline double gaussian_logpdf(double v, double sd) {
  return -0.5 * (v / sd) * (v / sd) - std::log(sd * std::sqrt(2.0 * M_PI));
}

// Dense symmetric weight matrix; w[i][i] = 0.
using Dense = std::vector<std::vector<double>>;

// Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j), straight from the
// definition with a double loop.
inline double dense_modularity(const Dense& a, const std::vector<std::size_t>& part) {
  const std::size_t n = a.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i] += a[i][j];
    two_m += k[i];
  }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (part[i] == part[j]) q += a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

// Visits every set partition of {0..n-1} as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> a(n, 0), b(n, 1);  // b[i] = 1 + max(a[0..i-1])
  if (n == 0) return;
  while (true) {
    fn(a);
    std::size_t i = n - 1;
    while (i > 0 && a[i] == b[i]) --i;
    if (i == 0) return;
    ++a[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      b[j] = std::max(b[j - 1], a[j - 1] + 1);
    }
  }
}

struct BruteForceResult {
  double best_q = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_partition;
  std::size_t visited = 0;
};

inline BruteForceResult max_modularity(const Dense& a) {
  BruteForceResult r;
  for_each_partition(a.size(), [&](const std::vector<std::size_t>& p) {
    ++r.visited;
    const double q = dense_modularity(a, p);
    if (q > r.best_q) {
      r.best_q = q;
      r.best_partition = p;
    }
  });
  return r;
}

inline double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Two 5-cliques (unit weights) joined by one light edge.
inline Dense two_cliques(double bridge = 0.01) {
  Dense a(10, std::vector<double>(10, 0.0));
  for (std::size_t base : {0u, 5u})
    for (std::size_t i = base; i < base + 5; ++i)
      for (std::size_t j = base; j < base + 5; ++j)
        if (i != j) a[i][j] = 1.0;
  a[4][5] = a[5][4] = bridge;
  return a;
}

}  // namespace oracle
