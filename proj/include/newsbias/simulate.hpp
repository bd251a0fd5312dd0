#pragma once

// Synthetic corpus with known ground truth: per-event intercepts and
// stances drawn per outlet, article counts from the latent-space model, and
// a retweet log with planted audience communities.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/corpus.hpp"
#include "newsbias/latent.hpp"

namespace newsbias::sim {

struct SimulationConfig {
  std::size_t outlets = 40;
  std::size_t clusters = 2;
  std::size_t users = 600;
  std::size_t retweets_per_user = 12;
  double mean_row_total = 300.0;
  double within_cluster = 0.9;  // probability a retweet stays in the user's cluster
  std::uint64_t seed = 1;
  Date start{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{1}};
  Date end{std::chrono::year{2021}, std::chrono::month{12}, std::chrono::day{31}};
};

struct OutletTruth {
  std::string outlet_id;
  Reliability reliability{};
  std::size_t cluster = 0;
  std::array<double, 3> alpha{};  // by event
  std::array<double, 3> x{};
  double engagement_rate = 0.0;   // expected interactions per article per follower, by x_adv
};

struct SimulatedCorpus {
  std::vector<OutletProfile> outlets;
  std::vector<ArticleRecord> articles;
  std::vector<FollowerRecord> followers;
  std::vector<RetweetRecord> retweets;
  std::vector<OutletTruth> truth;
  std::string balanced_outlet;  // planted with equal adverse/positive intercepts
};

inline std::string outlet_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "o%03zu", i + 1);
  return buf;
}

inline SimulatedCorpus simulate_corpus(const SimulationConfig& cfg) {
  if (cfg.outlets == 0 || cfg.clusters == 0 || cfg.clusters > cfg.outlets) {
    throw DomainError("simulation needs at least one outlet per cluster");
  }
  std::mt19937_64 rng(latent::splitmix64(cfg.seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const latent::ModelConstants consts;

  SimulatedCorpus out;
  for (std::size_t i = 0; i < cfg.outlets; ++i) {
    OutletTruth t;
    t.outlet_id = outlet_name(i);
    t.cluster = i % cfg.clusters;
    const double q_share = t.cluster == 0 ? 0.6 : 0.1;
    t.reliability = unif(rng) < q_share ? Reliability::questionable : Reliability::reliable;
    const bool questionable = t.reliability == Reliability::questionable;
    for (std::size_t k = 0; k < 3; ++k) {
      t.x[k] = questionable ? -0.9 + 0.7 * unif(rng) : -0.3 + 1.2 * unif(rng);
      double norm = 0.0;
      for (double z : consts.ideal) norm += std::exp(-std::abs(t.x[k] - z));
      t.alpha[k] = std::log(cfg.mean_row_total / norm) + (unif(rng) - 0.5) * 1.4;
    }
    if (questionable) {
      t.alpha[0] += 0.5;
      t.alpha[2] -= 0.5;
    }
    t.engagement_rate = 0.002 * (1.0 + 3.0 * t.x[0] * t.x[0]);
    out.truth.push_back(t);
    out.outlets.push_back({t.outlet_id, "Outlet " + std::to_string(i + 1), t.reliability,
                           static_cast<OutletKind>(i % 4)});
  }
  // Outlet 0 reports adverse and positive events with equal propensity.
  {
    auto& t = out.truth[0];
    t.x[2] = t.x[0];
    t.alpha[2] = t.alpha[0];
    out.balanced_outlet = t.outlet_id;
  }

  const auto day0 = std::chrono::sys_days{cfg.start};
  const auto span_days = (std::chrono::sys_days{cfg.end} - day0).count();
  std::uniform_int_distribution<long> day_dist(0, span_days);
  std::uniform_int_distribution<int> platform_dist(0, 3);

  for (std::size_t i = 0; i < cfg.outlets; ++i) {
    for (int p = 0; p < 2; ++p) {
      const auto followers = static_cast<std::uint64_t>(5000 + unif(rng) * 95000);
      out.followers.push_back({out.truth[i].outlet_id, static_cast<Platform>(p), cfg.start, cfg.end, followers});
    }
  }
  std::vector<double> mean_followers(cfg.outlets);
  for (std::size_t i = 0; i < cfg.outlets; ++i) {
    mean_followers[i] = 0.5 * static_cast<double>(out.followers[2 * i].followers + out.followers[2 * i + 1].followers);
  }

  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> alpha(cfg.outlets), x(cfg.outlets);
    for (std::size_t i = 0; i < cfg.outlets; ++i) {
      alpha[i] = out.truth[i].alpha[k];
      x[i] = out.truth[i].x[k];
    }
    const auto y = latent::simulate_counts(alpha, x, consts, rng);
    for (std::size_t i = 0; i < cfg.outlets; ++i) {
      std::poisson_distribution<std::uint64_t> inter(out.truth[i].engagement_rate * mean_followers[i]);
      for (std::size_t j = 0; j < 3; ++j) {
        for (std::uint64_t c = 0; c < y[i][j]; ++c) {
          ArticleRecord a;
          a.outlet_id = out.truth[i].outlet_id;
          a.platform = static_cast<Platform>(platform_dist(rng));
          a.date = Date{day0 + std::chrono::days{day_dist(rng)}};
          a.narrative = static_cast<Narrative>(j);
          a.event = static_cast<Event>(k);
          a.interactions = inter(rng);
          out.articles.push_back(std::move(a));
        }
      }
    }
  }

  std::vector<std::vector<std::size_t>> members(cfg.clusters);
  for (std::size_t i = 0; i < cfg.outlets; ++i) members[out.truth[i].cluster].push_back(i);
  std::uniform_int_distribution<std::uint64_t> count_dist(1, 3);
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    char uid[16];
    std::snprintf(uid, sizeof(uid), "u%05zu", u + 1);
    const auto& home = members[u % cfg.clusters];
    for (std::size_t r = 0; r < cfg.retweets_per_user; ++r) {
      std::size_t target;
      if (unif(rng) < cfg.within_cluster) {
        target = home[std::uniform_int_distribution<std::size_t>(0, home.size() - 1)(rng)];
      } else {
        target = std::uniform_int_distribution<std::size_t>(0, cfg.outlets - 1)(rng);
      }
      const auto cnt = count_dist(rng);
      auto key = std::make_pair(std::string(uid), out.truth[target].outlet_id);
      auto [it, inserted] = index.emplace(key, out.retweets.size());
      if (inserted) out.retweets.push_back({key.first, key.second, cnt});
      else out.retweets[it->second].count += cnt;
    }
  }
  return out;
}

inline nlohmann::json truth_json(const SimulatedCorpus& c, const SimulationConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["balanced_outlet"] = c.balanced_outlet;
  j["clusters"] = cfg.clusters;
  auto& outlets = j["outlets"] = nlohmann::json::array();
  for (const auto& t : c.truth) {
    nlohmann::json o;
    o["outlet_id"] = t.outlet_id;
    o["reliability"] = std::string(to_string(t.reliability));
    o["cluster"] = t.cluster;
    for (auto k : kEvents) {
      const auto kk = static_cast<std::size_t>(k);
      o["alpha"][std::string(to_string(k))] = t.alpha[kk];
      o["x"][std::string(to_string(k))] = t.x[kk];
    }
    outlets.push_back(std::move(o));
  }
  return j;
}

}  // namespace newsbias::sim
