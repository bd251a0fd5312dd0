#pragma once

// Narrative/selection bias table, adjusted engagement and the quadratic
// regression of engagement on bias.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "newsbias/corpus.hpp"
#include "newsbias/diagnostics.hpp"
#include "newsbias/error.hpp"

namespace newsbias::bias {

inline constexpr double kBalancedTheta = std::numbers::pi / 4.0;

// Distance of (pf_adv, pf_pos) from the line through the origin at angle
// theta. At exactly pi/4 the closed form |a - p| / sqrt(2) is used so that
// balanced outlets score exactly zero.
inline double selection_index(double pf_adv, double pf_pos, double theta = kBalancedTheta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2.0)) throw DomainError("theta must lie in (0, pi/2)");
  if (theta == kBalancedTheta) return std::abs(pf_adv - pf_pos) * std::numbers::sqrt2 / 2.0;
  return std::abs(std::sin(theta) * pf_adv - std::cos(theta) * pf_pos);
}

inline double adjusted_engagement(std::uint64_t interactions, std::uint64_t contents, double followers) {
  if (contents == 0) throw DomainError("undefined engagement: no contents of this event type");
  if (!(followers > 0.0)) throw DomainError("followers must be positive");
  return static_cast<double>(interactions) / (static_cast<double>(contents) * followers);
}

// ---------------------------------------------------------------------------
// followers

struct DateWindow {
  std::optional<Date> from;
  std::optional<Date> to;

  bool overlaps(const Date& start, const Date& end) const {
    return (!to || start <= *to) && (!from || end >= *from);
  }
};

enum class FollowerAveraging { unweighted, duration_weighted };

// Mean followers per outlet across platform-period records overlapping the
// window. Outlets without overlapping records are absent.
inline std::map<std::string, double> average_followers(const std::vector<FollowerRecord>& records,
                                                       const DateWindow& window,
                                                       FollowerAveraging mode = FollowerAveraging::unweighted) {
  std::map<std::string, std::pair<double, double>> acc;  // weighted sum, total weight
  for (const auto& r : records) {
    if (!window.overlaps(r.period_start, r.period_end)) continue;
    double w = 1.0;
    if (mode == FollowerAveraging::duration_weighted) {
      const auto start = window.from ? std::max(r.period_start, *window.from) : r.period_start;
      const auto end = window.to ? std::min(r.period_end, *window.to) : r.period_end;
      w = static_cast<double>((std::chrono::sys_days{end} - std::chrono::sys_days{start}).count() + 1);
    }
    auto& [sum, weight] = acc[r.outlet_id];
    sum += w * static_cast<double>(r.followers);
    weight += w;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sw] : acc) out.emplace(id, sw.first / sw.second);
  return out;
}

// ---------------------------------------------------------------------------
// engagement

struct EngagementRecord {
  std::string outlet_id;
  Event event{};
  std::uint64_t contents = 0;
  std::uint64_t interactions = 0;
  double followers = 0.0;
  double engagement = 0.0;
};

struct EngagementResult {
  std::vector<EngagementRecord> records;
  std::vector<std::string> missing_followers;  // outlets with articles but no follower data
};

// Articles are expected to be window-filtered already. Rows follow registry
// order, then event order; (outlet, event) pairs without content are skipped.
inline EngagementResult compute_engagement(const std::vector<ArticleRecord>& articles,
                                           const std::vector<OutletProfile>& registry,
                                           const std::map<std::string, double>& followers) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < registry.size(); ++i) index.emplace(registry[i].outlet_id, i);
  std::vector<std::array<std::pair<std::uint64_t, std::uint64_t>, 3>> tally(registry.size());
  for (const auto& a : articles) {
    auto it = index.find(a.outlet_id);
    if (it == index.end()) throw InputError("article references unregistered outlet '" + a.outlet_id + "'");
    auto& cell = tally[it->second][static_cast<std::size_t>(a.event)];
    ++cell.first;
    cell.second += a.interactions;
  }
  EngagementResult out;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& id = registry[i].outlet_id;
    auto f = followers.find(id);
    bool any = false;
    for (auto k : kEvents) {
      const auto& [c, inter] = tally[i][static_cast<std::size_t>(k)];
      if (c == 0) continue;
      any = true;
      if (f == followers.end() || !(f->second > 0.0)) continue;
      out.records.push_back({id, k, c, inter, f->second, adjusted_engagement(inter, c, f->second)});
    }
    if (any && (f == followers.end() || !(f->second > 0.0))) out.missing_followers.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// quadratic regression

struct QuadFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rss = 0.0;
  std::size_t n = 0;

  bool convex() const { return c2 > 0.0; }
};

inline QuadFit quadratic_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("xs and ys differ in length");
  if (xs.size() < 3) throw DomainError("quadratic fit needs at least 3 points");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = x;
    design(i, 2) = x * x;
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw DomainError("rank-deficient design: need at least 3 distinct x values");
  const Eigen::VectorXd coef = qr.solve(rhs);
  QuadFit fit;
  fit.c0 = coef(0);
  fit.c1 = coef(1);
  fit.c2 = coef(2);
  fit.rss = (design * coef - rhs).squaredNorm();
  fit.n = xs.size();
  return fit;
}

// ---------------------------------------------------------------------------
// bias table

// Posterior summary of one event-type fit together with its outlet order.
struct EventFit {
  Event event{};
  std::vector<std::string> outlets;
  latent::ParamSummary summary;
};

struct BiasRow {
  std::string outlet_id;
  // posterior means of the stance x_ik
  double x_adv = 0.0, x_neu = 0.0, x_pos = 0.0;
  // posterior means of the intercept alpha_ik (propensity factors)
  double pf_adv = 0.0, pf_neu = 0.0, pf_pos = 0.0;
  double selection_index = 0.0;
  bool adverse_lean = false;
  // 90% intervals, indexed by event
  std::array<std::pair<double, double>, 3> x_interval{};
  std::array<std::pair<double, double>, 3> pf_interval{};
};

struct BiasTable {
  std::vector<BiasRow> rows;
  std::vector<std::string> excluded;  // outlets missing at least one event-type fit

  const BiasRow* find(const std::string& id) const {
    for (const auto& r : rows)
      if (r.outlet_id == id) return &r;
    return nullptr;
  }
};

// Outlets follow the order of the first fit supplied.
inline BiasTable build_bias_table(const std::vector<EventFit>& fits, double theta = kBalancedTheta) {
  std::array<const EventFit*, 3> by_event{};
  for (const auto& f : fits) by_event[static_cast<std::size_t>(f.event)] = &f;
  std::array<std::unordered_map<std::string, std::size_t>, 3> index;
  for (std::size_t k = 0; k < 3; ++k) {
    if (!by_event[k]) continue;
    for (std::size_t i = 0; i < by_event[k]->outlets.size(); ++i) index[k].emplace(by_event[k]->outlets[i], i);
  }

  std::vector<std::string> order;
  std::unordered_map<std::string, bool> seen;
  for (const auto& f : fits)
    for (const auto& id : f.outlets)
      if (seen.emplace(id, true).second) order.push_back(id);

  BiasTable table;
  for (const auto& id : order) {
    std::array<std::size_t, 3> pos{};
    bool complete = true;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!by_event[k]) {
        complete = false;
        break;
      }
      auto it = index[k].find(id);
      if (it == index[k].end()) {
        complete = false;
        break;
      }
      pos[k] = it->second;
    }
    if (!complete) {
      table.excluded.push_back(id);
      continue;
    }
    BiasRow row;
    row.outlet_id = id;
    std::array<double, 3> xs{}, pfs{};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& xa = by_event[k]->summary.x(pos[k]);
      const auto& al = by_event[k]->summary.alpha(pos[k]);
      xs[k] = xa.mean;
      pfs[k] = al.mean;
      row.x_interval[k] = {xa.q05, xa.q95};
      row.pf_interval[k] = {al.q05, al.q95};
    }
    row.x_adv = xs[0];
    row.x_neu = xs[1];
    row.x_pos = xs[2];
    row.pf_adv = pfs[0];
    row.pf_neu = pfs[1];
    row.pf_pos = pfs[2];
    row.selection_index = selection_index(row.pf_adv, row.pf_pos, theta);
    row.adverse_lean = row.pf_adv > row.pf_pos;
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_bias(std::ostream& out, const BiasTable& t, const std::vector<OutletProfile>& registry) {
  std::unordered_map<std::string, Reliability> rel;
  for (const auto& p : registry) rel.emplace(p.outlet_id, p.reliability);
  csv::write_row(out, {"outlet_id", "reliability", "x_adv", "x_neu", "x_pos", "pf_adv", "pf_neu", "pf_pos",
                       "selection_index", "adverse_lean"});
  for (const auto& r : t.rows) {
    auto it = rel.find(r.outlet_id);
    const std::string reliability = it == rel.end() ? std::string() : std::string(to_string(it->second));
    csv::write_row(out, {r.outlet_id, reliability, csv::format_double(r.x_adv), csv::format_double(r.x_neu),
                         csv::format_double(r.x_pos), csv::format_double(r.pf_adv), csv::format_double(r.pf_neu),
                         csv::format_double(r.pf_pos), csv::format_double(r.selection_index),
                         r.adverse_lean ? "true" : "false"});
  }
}

// Reads bias.csv back. Intervals are not stored there and stay zero.
inline BiasTable read_bias(std::istream& in) {
  BiasTable t;
  csv::Reader reader(in);
  if (!reader.read_header({"outlet_id", "reliability", "x_adv", "x_neu", "x_pos", "pf_adv", "pf_neu", "pf_pos",
                           "selection_index", "adverse_lean"})) {
    return t;
  }
  while (auto f = reader.next()) {
    const auto line = reader.line_no();
    BiasRow r;
    r.outlet_id = (*f)[0];
    r.x_adv = csv::parse_double((*f)[2], line, "x_adv");
    r.x_neu = csv::parse_double((*f)[3], line, "x_neu");
    r.x_pos = csv::parse_double((*f)[4], line, "x_pos");
    r.pf_adv = csv::parse_double((*f)[5], line, "pf_adv");
    r.pf_neu = csv::parse_double((*f)[6], line, "pf_neu");
    r.pf_pos = csv::parse_double((*f)[7], line, "pf_pos");
    r.selection_index = csv::parse_double((*f)[8], line, "selection_index");
    if ((*f)[9] != "true" && (*f)[9] != "false") {
      throw InputError("malformed field 'adverse_lean' value '" + (*f)[9] + "' at line " + std::to_string(line));
    }
    r.adverse_lean = (*f)[9] == "true";
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline void write_engagement(std::ostream& out, const std::vector<EngagementRecord>& rows) {
  csv::write_row(out, {"outlet_id", "event_type", "contents", "interactions", "followers", "engagement"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.outlet_id, std::string(to_string(r.event)), std::to_string(r.contents),
                         std::to_string(r.interactions), csv::format_double(r.followers),
                         csv::format_double(r.engagement)});
  }
}

// ---------------------------------------------------------------------------
// engagement regressions: {narrative, selection} bias x event type

struct PanelFit {
  std::string dimension;  // "narrative" or "selection"
  Event event{};
  std::optional<QuadFit> fit;
  std::string error;  // set when the fit could not be computed
};

inline std::vector<PanelFit> engagement_fits(const BiasTable& table, const std::vector<EngagementRecord>& engagement) {
  std::vector<PanelFit> panels;
  for (const std::string dim : {"narrative", "selection"}) {
    for (auto k : kEvents) {
      std::vector<double> xs, ys;
      for (const auto& e : engagement) {
        if (e.event != k) continue;
        const auto* row = table.find(e.outlet_id);
        if (!row) continue;
        double x = row->selection_index;
        if (dim == "narrative") {
          x = k == Event::adverse ? row->x_adv : (k == Event::neutral ? row->x_neu : row->x_pos);
        }
        xs.push_back(x);
        ys.push_back(e.engagement);
      }
      PanelFit p;
      p.dimension = dim;
      p.event = k;
      try {
        p.fit = quadratic_fit(xs, ys);
      } catch (const DomainError& err) {
        p.error = err.what();
      }
      panels.push_back(std::move(p));
    }
  }
  return panels;
}

}  // namespace newsbias::bias
