#pragma once

// Pipeline stages behind the command-line tool. Every stage reads its
// inputs from the run directory (or, for ingest/simulate, from the paths in
// the config) and writes its artifacts back there. Outputs depend only on
// inputs and the root seed, so reruns are byte-identical.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/bias.hpp"
#include "newsbias/corpus.hpp"
#include "newsbias/diagnostics.hpp"
#include "newsbias/error.hpp"
#include "newsbias/latent.hpp"
#include "newsbias/network.hpp"
#include "newsbias/posterior_io.hpp"
#include "newsbias/simulate.hpp"

namespace newsbias::pipeline {

namespace fs = std::filesystem;

struct RunConfig {
  std::optional<fs::path> articles, outlets, followers, retweets;
  std::optional<Date> from, to;
  fs::path out = "out";
  std::uint64_t seed = 20230101;
  latent::ChainConfig chain;
  latent::ModelConstants model;
  double theta = bias::kBalancedTheta;
  network::ThresholdOptions threshold;
  bias::FollowerAveraging follower_averaging = bias::FollowerAveraging::unweighted;
  bool dump_draws = false;
  double rhat_warning = 1.05;
  sim::SimulationConfig simulation;
};

// Derived seeds for the independent random streams of one run.
inline std::uint64_t stream_seed(std::uint64_t root, std::uint64_t stream) {
  return latent::splitmix64(root ^ latent::splitmix64(stream + 0x5eed));
}
inline constexpr std::uint64_t kFitStream = 1;  // + event index
inline constexpr std::uint64_t kLouvainStream = 10;
inline constexpr std::uint64_t kSimulationStream = 20;

// ---------------------------------------------------------------------------
// file helpers

inline Format format_for(const fs::path& p) { return p.extension() == ".jsonl" ? Format::jsonl : Format::csv; }

inline std::ifstream open_input(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("input file not found: " + p.string());
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + p.string());
  return in;
}

inline std::ifstream open_stage(const fs::path& p, const std::string& stage) {
  if (!fs::exists(p)) {
    throw MissingStageError(stage, "missing " + p.filename().string() + " from stage '" + stage + "' in " +
                                       p.parent_path().string() + "; run '" + stage + "' first");
  }
  return std::ifstream(p, std::ios::binary);
}

inline std::ofstream open_output(const fs::path& p) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write output file: " + p.string());
  return out;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) {
  auto out = open_output(p);
  out << j.dump(2) << '\n';
}

// FNV-1a 64-bit content digest.
inline std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  auto path_or_null = [](const std::optional<fs::path>& p) { return p ? nlohmann::json(p->string()) : nlohmann::json(); };
  j["articles"] = path_or_null(c.articles);
  j["outlets"] = path_or_null(c.outlets);
  j["followers"] = path_or_null(c.followers);
  j["retweets"] = path_or_null(c.retweets);
  j["from"] = c.from ? nlohmann::json(to_string(*c.from)) : nlohmann::json();
  j["to"] = c.to ? nlohmann::json(to_string(*c.to)) : nlohmann::json();
  j["seed"] = c.seed;
  j["chains"] = c.chain.chains;
  j["iters"] = c.chain.iterations;
  j["burnin"] = c.chain.burn_in;
  j["initial_proposal_sd"] = c.chain.initial_proposal_sd;
  j["adapt"] = c.chain.adapt;
  j["prior_sd_alpha"] = c.model.prior_sd_alpha;
  j["prior_sd_x"] = c.model.prior_sd_x;
  j["theta"] = c.theta;
  j["strict_threshold"] = c.threshold.strict;
  j["drop_isolates"] = c.threshold.drop_isolates;
  j["follower_averaging"] =
      c.follower_averaging == bias::FollowerAveraging::unweighted ? "unweighted" : "duration_weighted";
  return j;
}

inline nlohmann::json digest_inputs(const std::vector<fs::path>& inputs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : inputs) j[f.filename().string()] = file_digest(f);
  return j;
}

// Records the resolved config and input digests of one stage in
// run_manifest.json, keyed by stage name.
inline void record_manifest(const RunConfig& c, const std::string& stage, const nlohmann::json& digests) {
  const fs::path p = c.out / "run_manifest.json";
  nlohmann::json manifest = nlohmann::json::object();
  if (fs::exists(p)) {
    std::ifstream in(p);
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      manifest = nlohmann::json::object();
    }
  }
  nlohmann::json entry;
  entry["config"] = config_json(c);
  entry["inputs"] = digests;
  manifest[stage] = entry;
  write_json(p, manifest);
}

inline std::vector<OutletProfile> load_outlets(const fs::path& run) {
  auto in = open_stage(run / "outlets.csv", "ingest");
  return parse_outlets(in, Format::csv);
}

inline std::vector<ArticleRecord> load_articles(const fs::path& run) {
  auto in = open_stage(run / "articles.csv", "ingest");
  return parse_articles(in, Format::csv);
}

// ---------------------------------------------------------------------------
// stages

inline void cmd_ingest(const RunConfig& c, std::ostream& log) {
  if (!c.articles) throw InputError("--articles is required");
  if (!c.outlets) throw InputError("--outlets is required");
  std::vector<fs::path> inputs{*c.articles, *c.outlets};
  if (c.followers) inputs.push_back(*c.followers);
  if (c.retweets) inputs.push_back(*c.retweets);
  for (const auto& p : inputs) open_input(p);
  const auto digests = digest_inputs(inputs);

  std::vector<OutletProfile> outlets;
  {
    auto in = open_input(*c.outlets);
    outlets = parse_outlets(in, format_for(*c.outlets));
  }
  std::vector<ArticleRecord> articles;
  {
    auto in = open_input(*c.articles);
    articles = parse_articles(in, format_for(*c.articles));
  }
  const auto total_rows = articles.size();
  articles = filter_window(articles, c.from, c.to);
  log << "ingest: " << articles.size() << " of " << total_rows << " articles inside the date window, "
      << outlets.size() << " outlets\n";

  const auto tensor = aggregate_counts(articles, outlets);
  const auto breakdown = dataset_breakdown(articles, outlets);

  auto o = open_output(c.out / "outlets.csv");
  write_outlets(o, outlets);
  auto a = open_output(c.out / "articles.csv");
  write_articles(a, articles);
  auto t = open_output(c.out / "counts.csv");
  write_counts(t, tensor);
  auto b = open_output(c.out / "breakdown.csv");
  write_breakdown(b, breakdown);

  if (c.followers) {
    auto in = open_input(*c.followers);
    auto followers = parse_followers(in, format_for(*c.followers));
    auto f = open_output(c.out / "followers.csv");
    write_followers(f, followers);
  }
  if (c.retweets) {
    auto in = open_input(*c.retweets);
    auto retweets = parse_retweets(in, format_for(*c.retweets));
    auto r = open_output(c.out / "retweets.csv");
    write_retweets(r, retweets);
  }
  record_manifest(c, "ingest", digests);
}

inline void cmd_fit(const RunConfig& c, std::ostream& log) {
  auto in = open_stage(c.out / "counts.csv", "ingest");
  const auto tensor = read_counts(in);

  std::vector<bias::EventFit> fits;
  nlohmann::json diag = nlohmann::json::object();
  for (auto k : kEvents) {
    const auto name = std::string(to_string(k));
    const auto y = tensor.slice(k);
    std::uint64_t total = 0;
    for (const auto& row : y) total += row[0] + row[1] + row[2];
    if (y.empty() || total == 0) {
      log << "warning: no articles for event type '" << name << "'; fit skipped\n";
      diag[name]["skipped"] = true;
      continue;
    }
    latent::ChainConfig cc = c.chain;
    cc.seed = stream_seed(c.seed, kFitStream + static_cast<std::uint64_t>(k));
    const auto draws = latent::run_chain(y, cc, c.model);
    bias::EventFit fit{k, tensor.outlets, latent::posterior_summary(draws, cc.burn_in)};

    auto& d = diag[name];
    d["skipped"] = false;
    d["seed"] = cc.seed;
    double max_rhat = 0.0, min_ess = std::numeric_limits<double>::infinity();
    for (const auto& s : fit.summary.stats) {
      max_rhat = std::max(max_rhat, s.rhat);
      min_ess = std::min(min_ess, s.ess);
    }
    d["max_rhat"] = max_rhat;
    d["min_ess"] = min_ess;
    auto& zero = d["zero_count_outlets"] = nlohmann::json::array();
    auto& totals = d["outlet_totals"] = nlohmann::json::object();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto t = y[i][0] + y[i][1] + y[i][2];
      totals[tensor.outlets[i]] = t;
      if (t == 0) zero.push_back(tensor.outlets[i]);
    }
    const double kept = static_cast<double>(cc.iterations - cc.burn_in) * static_cast<double>(cc.chains);
    auto& acc = d["acceptance"] = nlohmann::json::object();
    for (std::size_t i = 0; i < y.size(); ++i) {
      double a = 0.0, x = 0.0;
      for (const auto& ch : draws.chains) {
        a += static_cast<double>(ch.accepted[i]);
        x += static_cast<double>(ch.accepted[y.size() + i]);
      }
      acc[tensor.outlets[i]] = {{"alpha", a / kept}, {"x", x / kept}};
    }
    if (max_rhat > c.rhat_warning) {
      log << "warning: event type '" << name << "' has R-hat " << max_rhat << " > " << c.rhat_warning << "\n";
    }
    if (!zero.empty()) {
      log << "note: " << zero.size() << " outlet(s) have no '" << name << "' articles; their estimates follow the prior\n";
    }
    if (c.dump_draws) {
      auto out = open_output(c.out / ("draws_" + name + ".csv"));
      csv::write_row(out, {"chain", "iter", "param_index", "value"});
      for (std::size_t ch = 0; ch < draws.chains.size(); ++ch)
        for (std::size_t h = 0; h < draws.iterations; ++h)
          for (std::size_t q = 0; q < draws.params(); ++q)
            csv::write_row(out, {std::to_string(ch), std::to_string(h), std::to_string(q),
                                 csv::format_double(draws.value(ch, h, q))});
    }
    log << "fit: event type '" << name << "' done (" << y.size() << " outlets, max R-hat " << max_rhat << ")\n";
    fits.push_back(std::move(fit));
  }
  auto out = open_output(c.out / "posterior.csv");
  write_posterior(out, fits);
  write_json(c.out / "fit_diagnostics.json", diag);
  record_manifest(c, "fit", digest_inputs({c.out / "counts.csv"}));
}

inline void cmd_bias(const RunConfig& c, std::ostream& log) {
  auto in = open_stage(c.out / "posterior.csv", "fit");
  const auto fits = read_posterior(in);
  const auto outlets = load_outlets(c.out);
  const auto table = bias::build_bias_table(fits, c.theta);
  for (const auto& id : table.excluded) log << "note: outlet '" << id << "' lacks a fit for some event type; excluded\n";
  auto out = open_output(c.out / "bias.csv");
  bias::write_bias(out, table, outlets);
  log << "bias: " << table.rows.size() << " outlets\n";
  record_manifest(c, "bias", digest_inputs({c.out / "posterior.csv", c.out / "outlets.csv"}));
}

inline bias::BiasTable load_bias(const fs::path& run) {
  auto in = open_stage(run / "bias.csv", "bias");
  return bias::read_bias(in);
}

inline nlohmann::json fits_json(const std::vector<bias::PanelFit>& panels) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : panels) {
    nlohmann::json e;
    e["dimension"] = p.dimension;
    e["event_type"] = std::string(to_string(p.event));
    if (p.fit) {
      e["c0"] = p.fit->c0;
      e["c1"] = p.fit->c1;
      e["c2"] = p.fit->c2;
      e["rss"] = p.fit->rss;
      e["n"] = p.fit->n;
      e["convex"] = p.fit->convex();
    } else {
      e["error"] = p.error;
    }
    j.push_back(std::move(e));
  }
  return j;
}

inline void cmd_engagement(const RunConfig& c, std::ostream& log) {
  const auto outlets = load_outlets(c.out);
  const auto articles = load_articles(c.out);
  std::vector<FollowerRecord> followers;
  {
    auto in = open_stage(c.out / "followers.csv", "ingest");
    followers = parse_followers(in, Format::csv);
  }
  const auto table = load_bias(c.out);

  bias::DateWindow window{c.from, c.to};
  if (!articles.empty()) {
    auto [lo, hi] = std::minmax_element(articles.begin(), articles.end(),
                                        [](const auto& a, const auto& b) { return a.date < b.date; });
    if (!window.from) window.from = lo->date;
    if (!window.to) window.to = hi->date;
  }
  const auto avg = bias::average_followers(followers, window, c.follower_averaging);
  const auto result = bias::compute_engagement(articles, outlets, avg);
  for (const auto& id : result.missing_followers) log << "note: outlet '" << id << "' has no follower data in window\n";

  auto out = open_output(c.out / "engagement.csv");
  bias::write_engagement(out, result.records);
  write_json(c.out / "fits.json", fits_json(bias::engagement_fits(table, result.records)));
  log << "engagement: " << result.records.size() << " rows\n";
  record_manifest(c, "engagement", digest_inputs({c.out / "articles.csv", c.out / "followers.csv", c.out / "bias.csv"}));
}

inline void cmd_network(const RunConfig& c, std::ostream& log) {
  std::vector<RetweetRecord> retweets;
  {
    auto in = open_stage(c.out / "retweets.csv", "ingest");
    retweets = parse_retweets(in, Format::csv);
  }
  const auto outlets = load_outlets(c.out);
  const auto table = load_bias(c.out);

  const auto matrix = network::build_matrix(retweets);
  const auto full = network::build_graph(matrix);
  const auto thr = network::threshold_graph(full, c.threshold);
  const auto seed = stream_seed(c.seed, kLouvainStream);
  const auto part = network::louvain(thr.graph, seed);
  const auto stats = network::cluster_stats(thr.graph, part, table, outlets);

  auto e = open_output(c.out / "edges.csv");
  network::write_edges(e, thr.graph);
  auto g = open_output(c.out / "graph.graphml");
  network::write_graphml(g, thr.graph, outlets, part);
  auto cl = open_output(c.out / "clusters.csv");
  network::write_clusters(cl, thr.graph, part);
  auto cs = open_output(c.out / "cluster_stats.csv");
  network::write_cluster_stats(cs, stats);

  const auto& r = thr.report;
  nlohmann::json summary;
  summary["users"] = matrix.users.size();
  summary["outlets"] = matrix.outlets.size();
  summary["threshold"] = {{"nodes_in", r.nodes_in},
                          {"edges_in", r.edges_in},
                          {"isolated_removed", r.isolated_removed},
                          {"mean_weight", r.mean_weight},
                          {"edges_removed", r.edges_removed},
                          {"newly_isolated_removed", r.newly_isolated_removed},
                          {"nodes_out", r.nodes_out},
                          {"edges_out", r.edges_out},
                          {"strict", c.threshold.strict},
                          {"drop_isolates", c.threshold.drop_isolates}};
  summary["louvain_seed"] = seed;
  summary["clusters"] = stats.clusters.size();
  summary["modularity"] = thr.graph.edges.empty() ? 0.0 : network::modularity(thr.graph, part);
  summary["missing_registry"] = stats.missing_registry;
  summary["missing_bias"] = stats.missing_bias;
  write_json(c.out / "network_summary.json", summary);
  log << "network: " << r.nodes_out << " nodes, " << r.edges_out << " edges after thresholding at mean weight "
      << r.mean_weight << "; " << stats.clusters.size() << " clusters\n";
  record_manifest(c, "network", digest_inputs({c.out / "retweets.csv", c.out / "outlets.csv", c.out / "bias.csv"}));
}

// Parses a CSV artifact into an array of objects, numbers where they parse.
inline nlohmann::json csv_to_json(std::istream& in) {
  nlohmann::json rows = nlohmann::json::array();
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = csv::split_line(line, line_no);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
      const auto& f = fields[i];
      double v{};
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty()) obj[header[i]] = nullptr;
      else if (f == "true" || f == "false") obj[header[i]] = f == "true";
      else if (ec == std::errc{} && ptr == f.data() + f.size()) obj[header[i]] = v;
      else obj[header[i]] = f;
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline void cmd_report(const RunConfig& c, std::ostream& log) {
  nlohmann::json report;
  const std::vector<std::pair<std::string, std::string>> parts{
      {"bias.csv", "bias"}, {"engagement.csv", "engagement"}, {"cluster_stats.csv", "network"}};
  std::vector<fs::path> inputs;
  for (const auto& [file, stage] : parts) {
    auto in = open_stage(c.out / file, stage);
    report[fs::path(file).stem().string()] = csv_to_json(in);
    inputs.push_back(c.out / file);
  }
  {
    auto in = open_stage(c.out / "fits.json", "engagement");
    report["fits"] = nlohmann::json::parse(in);
  }
  if (fs::exists(c.out / "network_summary.json")) {
    std::ifstream in(c.out / "network_summary.json");
    report["network"] = nlohmann::json::parse(in);
  }
  write_json(c.out / "report.json", report);
  log << "report: " << (c.out / "report.json").string() << "\n";
  record_manifest(c, "report", digest_inputs(inputs));
}

inline void cmd_simulate(const RunConfig& c, std::ostream& log) {
  sim::SimulationConfig sc = c.simulation;
  sc.seed = stream_seed(c.seed, kSimulationStream);
  const auto corpus = sim::simulate_corpus(sc);
  auto a = open_output(c.out / "articles.csv");
  write_articles(a, corpus.articles);
  auto o = open_output(c.out / "outlets.csv");
  write_outlets(o, corpus.outlets);
  auto f = open_output(c.out / "followers.csv");
  write_followers(f, corpus.followers);
  auto r = open_output(c.out / "retweets.csv");
  write_retweets(r, corpus.retweets);
  write_json(c.out / "truth.json", sim::truth_json(corpus, sc));
  log << "simulate: " << corpus.outlets.size() << " outlets, " << corpus.articles.size() << " articles, "
      << corpus.retweets.size() << " retweet pairs\n";
}

// ingest through report in one go.
inline void cmd_run(const RunConfig& c, std::ostream& log) {
  cmd_ingest(c, log);
  cmd_fit(c, log);
  cmd_bias(c, log);
  if (c.followers) cmd_engagement(c, log);
  if (c.retweets) cmd_network(c, log);
  if (c.followers && c.retweets) cmd_report(c, log);
}

}  // namespace newsbias::pipeline
