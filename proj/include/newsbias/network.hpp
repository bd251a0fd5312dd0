#pragma once

// Outlet audience graph: cosine similarity between retweeter columns,
// mean-weight thresholding, Louvain communities and per-cluster statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsbias/bias.hpp"
#include "newsbias/corpus.hpp"
#include "newsbias/csv.hpp"
#include "newsbias/error.hpp"

namespace newsbias::network {

// (row, value) pairs sorted by row.
using SparseColumn = std::vector<std::pair<std::size_t, double>>;

struct RetweetMatrix {
  std::vector<std::string> users;    // rows, sorted
  std::vector<std::string> outlets;  // columns, sorted
  std::vector<SparseColumn> columns;

  double column_sum(std::size_t j) const {
    double s = 0.0;
    for (const auto& [row, v] : columns[j]) s += v;
    return s;
  }
};

inline RetweetMatrix build_matrix(const std::vector<RetweetRecord>& records) {
  std::map<std::string, std::map<std::string, std::uint64_t>> by_outlet;
  std::map<std::string, std::size_t> users;
  for (const auto& r : records) {
    by_outlet[r.outlet_id][r.user_id] += r.count;
    users.emplace(r.user_id, 0);
  }
  RetweetMatrix m;
  for (auto& [id, idx] : users) {
    idx = m.users.size();
    m.users.push_back(id);
  }
  for (const auto& [outlet, col] : by_outlet) {
    m.outlets.push_back(outlet);
    SparseColumn c;
    for (const auto& [user, count] : col) c.emplace_back(users.at(user), static_cast<double>(count));
    m.columns.push_back(std::move(c));
  }
  return m;
}

inline double squared_norm(const SparseColumn& c) {
  double s = 0.0;
  for (const auto& [row, v] : c) s += v * v;
  return s;
}

inline double sparse_dot(const SparseColumn& a, const SparseColumn& b) {
  double s = 0.0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) ++ia;
    else if (ib->first < ia->first) ++ib;
    else {
      s += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return s;
}

inline double cosine_weight(const SparseColumn& h, const SparseColumn& k) {
  const double nh = squared_norm(h), nk = squared_norm(k);
  if (!(nh > 0.0) || !(nk > 0.0)) throw DomainError("cosine weight of a zero-norm column");
  return std::min(1.0, sparse_dot(h, k) / std::sqrt(nh * nk));
}

// ---------------------------------------------------------------------------
// graph

struct Edge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct AudienceGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;  // sorted by (u, v)

  std::size_t node_count() const { return nodes.size(); }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    for (const auto& e : edges) {
      ++d[e.u];
      ++d[e.v];
    }
    return d;
  }
};

inline AudienceGraph build_graph(const RetweetMatrix& r) {
  AudienceGraph g;
  std::vector<std::size_t> keep;
  std::vector<double> norms;
  for (std::size_t j = 0; j < r.columns.size(); ++j) {
    const double n = squared_norm(r.columns[j]);
    if (n > 0.0) {
      keep.push_back(j);
      norms.push_back(n);
      g.nodes.push_back(r.outlets[j]);
    }
  }
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = a + 1; b < keep.size(); ++b) {
      const double dot = sparse_dot(r.columns[keep[a]], r.columns[keep[b]]);
      if (dot > 0.0) g.edges.push_back({a, b, std::min(1.0, dot / std::sqrt(norms[a] * norms[b]))});
    }
  }
  return g;
}

// Keeps nodes with mask set and re-indexes edges.
inline AudienceGraph induced(const AudienceGraph& g, const std::vector<bool>& keep_node,
                             const std::vector<Edge>& edges) {
  std::vector<std::size_t> remap(g.nodes.size(), std::numeric_limits<std::size_t>::max());
  AudienceGraph out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (!keep_node[i]) continue;
    remap[i] = out.nodes.size();
    out.nodes.push_back(g.nodes[i]);
  }
  for (const auto& e : edges) {
    if (keep_node[e.u] && keep_node[e.v]) out.edges.push_back({remap[e.u], remap[e.v], e.weight});
  }
  return out;
}

struct ThresholdOptions {
  bool strict = true;         // drop w < mean; otherwise drop w <= mean
  bool drop_isolates = true;  // drop nodes isolated by the edge cut
};

struct ThresholdReport {
  std::size_t nodes_in = 0, edges_in = 0;
  std::size_t isolated_removed = 0;
  double mean_weight = 0.0;
  std::size_t edges_removed = 0;
  std::size_t newly_isolated_removed = 0;
  std::size_t nodes_out = 0, edges_out = 0;
};

struct ThresholdResult {
  AudienceGraph graph;
  ThresholdReport report;
};

inline std::vector<bool> non_isolated(const AudienceGraph& g) {
  const auto d = g.degrees();
  std::vector<bool> keep(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) keep[i] = d[i] > 0;
  return keep;
}

// Edge cut at a fixed value, then optional removal of isolated nodes.
inline AudienceGraph apply_cutoff(const AudienceGraph& g, double cutoff, const ThresholdOptions& opt) {
  std::vector<Edge> kept;
  for (const auto& e : g.edges) {
    const bool below = opt.strict ? e.weight < cutoff : e.weight <= cutoff;
    if (!below) kept.push_back(e);
  }
  std::vector<bool> all(g.nodes.size(), true);
  AudienceGraph cut = induced(g, all, kept);
  if (!opt.drop_isolates) return cut;
  return induced(cut, non_isolated(cut), cut.edges);
}

inline ThresholdResult threshold_graph(const AudienceGraph& g, const ThresholdOptions& opt = {}) {
  if (g.edges.empty()) throw DomainError("cannot threshold an edgeless graph");
  ThresholdResult res;
  auto& rep = res.report;
  rep.nodes_in = g.nodes.size();
  rep.edges_in = g.edges.size();

  AudienceGraph connected = induced(g, non_isolated(g), g.edges);
  rep.isolated_removed = rep.nodes_in - connected.nodes.size();

  double sum = 0.0;
  for (const auto& e : connected.edges) sum += e.weight;
  rep.mean_weight = sum / static_cast<double>(connected.edges.size());

  ThresholdOptions keep_nodes = opt;
  keep_nodes.drop_isolates = false;
  AudienceGraph cut = apply_cutoff(connected, rep.mean_weight, keep_nodes);
  rep.edges_removed = connected.edges.size() - cut.edges.size();
  if (opt.drop_isolates) {
    AudienceGraph pruned = induced(cut, non_isolated(cut), cut.edges);
    rep.newly_isolated_removed = cut.nodes.size() - pruned.nodes.size();
    cut = std::move(pruned);
  }
  rep.nodes_out = cut.nodes.size();
  rep.edges_out = cut.edges.size();
  res.graph = std::move(cut);
  return res;
}

// ---------------------------------------------------------------------------
// modularity and Louvain

using Partition = std::vector<std::size_t>;

// Symmetric weighted adjacency; a self-loop on i is stored once with its
// full contribution A_ii to the degree.
struct WeightedAdjacency {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  static WeightedAdjacency from(const AudienceGraph& g) {
    WeightedAdjacency a;
    a.rows.resize(g.nodes.size());
    for (const auto& e : g.edges) {
      a.rows[e.u].emplace_back(e.v, e.weight);
      a.rows[e.v].emplace_back(e.u, e.weight);
    }
    for (auto& r : a.rows) std::sort(r.begin(), r.end());
    return a;
  }

  std::size_t size() const { return rows.size(); }
};

inline double modularity(const WeightedAdjacency& a, const Partition& part) {
  if (part.size() != a.size()) throw DomainError("partition does not cover all nodes");
  const std::size_t ncomm = part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;
  std::vector<double> in(ncomm, 0.0), tot(ncomm, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double k = 0.0, inside = 0.0;
    for (const auto& [j, w] : a.rows[i]) {
      k += w;
      inside += part[j] == part[i] ? w : 0.0;
    }
    in[part[i]] += inside;
    tot[part[i]] += k;
    two_m += k;
  }
  if (!(two_m > 0.0)) throw DomainError("modularity undefined for zero total weight");
  double q = 0.0;
  for (std::size_t c = 0; c < ncomm; ++c) {
    const double frac = tot[c] / two_m;
    q += in[c] / two_m - frac * frac;
  }
  return q;
}

inline double modularity(const AudienceGraph& g, const Partition& part) {
  return modularity(WeightedAdjacency::from(g), part);
}

// Relabels communities 0..C-1 by first appearance in node order.
inline Partition normalize(const Partition& part) {
  std::unordered_map<std::size_t, std::size_t> label;
  Partition out(part.size());
  for (std::size_t i = 0; i < part.size(); ++i) {
    auto [it, inserted] = label.emplace(part[i], label.size());
    out[i] = it->second;
  }
  return out;
}

namespace detail {

inline constexpr double kGainTolerance = 1e-12;

// Local-move phase on one level. Returns true when any node changed community.
inline bool local_moves(const WeightedAdjacency& a, Partition& comm, std::mt19937_64& rng) {
  const std::size_t n = a.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : a.rows[i]) k[i] += w;
    two_m += k[i];
  }
  if (!(two_m > 0.0)) return false;

  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += k[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  for (int pass = 0; pass < 1000; ++pass) {
    std::size_t moves = 0;
    for (std::size_t i : order) {
      const std::size_t own = comm[i];
      touched.clear();
      for (const auto& [j, w] : a.rows[i]) {
        if (j == i) continue;
        const std::size_t c = comm[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      tot[own] -= k[i];
      // Gain of inserting i into c, up to a positive factor and a constant.
      auto gain = [&](std::size_t c) { return link[c] - tot[c] * k[i] / two_m; };
      // Best neighbouring community, ties to the lowest id; move only on a
      // strict improvement over staying.
      std::sort(touched.begin(), touched.end());
      std::size_t best = own;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t c : touched) {
        if (c == own) continue;
        const double g = gain(c);
        if (g > best_gain + kGainTolerance) {
          best = c;
          best_gain = g;
        }
      }
      if (best != own && !(best_gain > gain(own) + kGainTolerance)) best = own;
      tot[best] += k[i];
      if (best != own) {
        comm[i] = best;
        ++moves;
      }
      for (std::size_t c : touched) link[c] = 0.0;
      link[own] = 0.0;
    }
    if (moves == 0) break;
    any_move = true;
  }
  return any_move;
}

inline WeightedAdjacency aggregate(const WeightedAdjacency& a, const Partition& comm, std::size_t ncomm) {
  std::vector<std::map<std::size_t, double>> acc(ncomm);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (const auto& [j, w] : a.rows[i]) acc[comm[i]][comm[j]] += w;
  }
  WeightedAdjacency out;
  out.rows.resize(ncomm);
  for (std::size_t c = 0; c < ncomm; ++c) {
    for (const auto& [d, w] : acc[c]) out.rows[c].emplace_back(d, w);
  }
  return out;
}

}  // namespace detail

// Multi-level Louvain at resolution 1. Node visiting order is shuffled by
// the seed; the result is deterministic for a fixed seed.
inline Partition louvain(const AudienceGraph& g, std::uint64_t seed) {
  const std::size_t n = g.nodes.size();
  Partition membership(n);
  std::iota(membership.begin(), membership.end(), 0);
  if (n == 0 || g.edges.empty()) return membership;

  std::mt19937_64 rng(seed);
  WeightedAdjacency level = WeightedAdjacency::from(g);
  double q_prev = modularity(level, normalize(membership));
  for (int depth = 0; depth < 64; ++depth) {
    Partition comm(level.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!detail::local_moves(level, comm, rng)) break;
    comm = normalize(comm);
    const std::size_t ncomm = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& m : membership) m = comm[m];
    const double q = modularity(level, comm);
    level = detail::aggregate(level, comm, ncomm);
    if (ncomm == comm.size() || q <= q_prev + detail::kGainTolerance) break;
    q_prev = q;
  }
  return normalize(membership);
}

// ---------------------------------------------------------------------------
// partition agreement

inline double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw DomainError("partitions differ in size");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double v) { return v * (v - 1.0) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, v] : table) sum_ij += c2(v);
  for (const auto& [key, v] : ra) sum_a += c2(v);
  for (const auto& [key, v] : rb) sum_b += c2(v);
  const double expected = sum_a * sum_b / c2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------------
// cluster statistics

struct ClusterStat {
  std::size_t cluster_id = 0;
  std::size_t size = 0;
  double frac_questionable = 0.0;
  double mean_x_adv = 0.0;
  double mean_x_pos = 0.0;
  double mean_selection = 0.0;
  double frac_adverse_lean = 0.0;
  std::size_t with_registry = 0;  // members counted in frac_questionable
  std::size_t with_bias = 0;      // members counted in the bias means
};

struct ClusterStats {
  std::vector<ClusterStat> clusters;
  std::size_t missing_registry = 0;
  std::size_t missing_bias = 0;
};

inline ClusterStats cluster_stats(const AudienceGraph& g, const Partition& part, const bias::BiasTable& bias,
                                  const std::vector<OutletProfile>& registry) {
  if (part.size() != g.nodes.size()) throw DomainError("partition does not cover all nodes");
  std::unordered_map<std::string, Reliability> rel;
  for (const auto& p : registry) rel.emplace(p.outlet_id, p.reliability);

  ClusterStats out;
  const std::size_t ncomm = part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;
  out.clusters.resize(ncomm);
  std::vector<std::size_t> questionable(ncomm, 0), lean(ncomm, 0);
  for (std::size_t c = 0; c < ncomm; ++c) out.clusters[c].cluster_id = c;
  for (std::size_t i = 0; i < part.size(); ++i) {
    auto& cs = out.clusters[part[i]];
    ++cs.size;
    if (auto it = rel.find(g.nodes[i]); it != rel.end()) {
      ++cs.with_registry;
      if (it->second == Reliability::questionable) ++questionable[part[i]];
    } else {
      ++out.missing_registry;
    }
    if (const auto* row = bias.find(g.nodes[i])) {
      ++cs.with_bias;
      cs.mean_x_adv += row->x_adv;
      cs.mean_x_pos += row->x_pos;
      cs.mean_selection += row->selection_index;
      if (row->adverse_lean) ++lean[part[i]];
    } else {
      ++out.missing_bias;
    }
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < ncomm; ++c) {
    auto& cs = out.clusters[c];
    cs.frac_questionable = cs.with_registry ? static_cast<double>(questionable[c]) / cs.with_registry : nan;
    if (cs.with_bias) {
      const auto nb = static_cast<double>(cs.with_bias);
      cs.mean_x_adv /= nb;
      cs.mean_x_pos /= nb;
      cs.mean_selection /= nb;
      cs.frac_adverse_lean = static_cast<double>(lean[c]) / nb;
    } else {
      cs.mean_x_adv = cs.mean_x_pos = cs.mean_selection = cs.frac_adverse_lean = nan;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// exports

inline std::string format_or_empty(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string(); }

inline void write_edges(std::ostream& out, const AudienceGraph& g) {
  csv::write_row(out, {"src", "dst", "weight"});
  for (const auto& e : g.edges) csv::write_row(out, {g.nodes[e.u], g.nodes[e.v], csv::format_double(e.weight)});
}

inline void write_clusters(std::ostream& out, const AudienceGraph& g, const Partition& part) {
  csv::write_row(out, {"outlet_id", "cluster_id"});
  for (std::size_t i = 0; i < g.nodes.size(); ++i) csv::write_row(out, {g.nodes[i], std::to_string(part[i])});
}

inline void write_cluster_stats(std::ostream& out, const ClusterStats& s) {
  csv::write_row(out, {"cluster_id", "size", "frac_questionable", "mean_x_adv", "mean_x_pos", "mean_selection",
                       "frac_adverse_lean"});
  for (const auto& c : s.clusters) {
    csv::write_row(out, {std::to_string(c.cluster_id), std::to_string(c.size), format_or_empty(c.frac_questionable),
                         format_or_empty(c.mean_x_adv), format_or_empty(c.mean_x_pos),
                         format_or_empty(c.mean_selection), format_or_empty(c.frac_adverse_lean)});
  }
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

inline void write_graphml(std::ostream& out, const AudienceGraph& g, const std::vector<OutletProfile>& registry,
                          const std::optional<Partition>& part) {
  std::unordered_map<std::string, Reliability> rel;
  for (const auto& p : registry) rel.emplace(p.outlet_id, p.reliability);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"reliability\" for=\"node\" attr.name=\"reliability\" attr.type=\"string\"/>\n"
      << "  <key id=\"cluster\" for=\"node\" attr.name=\"cluster\" attr.type=\"int\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"audience\" edgedefault=\"undirected\">\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << "    <node id=\"" << xml_escape(g.nodes[i]) << "\">";
    if (auto it = rel.find(g.nodes[i]); it != rel.end()) {
      out << "<data key=\"reliability\">" << to_string(it->second) << "</data>";
    }
    if (part) out << "<data key=\"cluster\">" << (*part)[i] << "</data>";
    out << "</node>\n";
  }
  for (const auto& e : g.edges) {
    out << "    <edge source=\"" << xml_escape(g.nodes[e.u]) << "\" target=\"" << xml_escape(g.nodes[e.v])
        << "\"><data key=\"weight\">" << csv::format_double(e.weight) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

}  // namespace newsbias::network
