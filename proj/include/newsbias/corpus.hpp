#pragma once

// Canonical records, their CSV/JSONL encodings, and the aggregation of
// labeled articles into the outlet x narrative x event count tensor.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/csv.hpp"
#include "newsbias/error.hpp"

namespace newsbias {

enum class Platform { facebook, instagram, twitter, youtube };
enum class Narrative { anti = 0, neutral = 1, pro = 2 };
enum class Event { adverse = 0, neutral = 1, positive = 2 };
enum class Reliability { questionable, reliable };
enum class OutletKind { newspaper, online, tv, radio };
enum class Format { csv, jsonl };

inline constexpr std::array<Event, 3> kEvents{Event::adverse, Event::neutral, Event::positive};

using Date = std::chrono::year_month_day;

// ---------------------------------------------------------------------------
// label <-> string

namespace detail {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E e, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table) {
    if (value == e) return name;
  }
  return "?";
}

inline constexpr std::array<std::pair<std::string_view, Platform>, 4> kPlatforms{{
    {"facebook", Platform::facebook},
    {"instagram", Platform::instagram},
    {"twitter", Platform::twitter},
    {"youtube", Platform::youtube},
}};
inline constexpr std::array<std::pair<std::string_view, Narrative>, 3> kNarratives{{
    {"anti", Narrative::anti},
    {"neutral", Narrative::neutral},
    {"pro", Narrative::pro},
}};
inline constexpr std::array<std::pair<std::string_view, Event>, 3> kEventNames{{
    {"adverse", Event::adverse},
    {"neutral", Event::neutral},
    {"positive", Event::positive},
}};
inline constexpr std::array<std::pair<std::string_view, Reliability>, 2> kReliabilities{{
    {"questionable", Reliability::questionable},
    {"reliable", Reliability::reliable},
}};
inline constexpr std::array<std::pair<std::string_view, OutletKind>, 4> kKinds{{
    {"newspaper", OutletKind::newspaper},
    {"online", OutletKind::online},
    {"tv", OutletKind::tv},
    {"radio", OutletKind::radio},
}};

template <typename E, std::size_t N>
E parse_label(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table,
              std::string_view what, std::size_t line_no) {
  if (auto v = lookup(s, table)) return *v;
  throw InputError("unknown " + std::string(what) + " label '" + std::string(s) + "' at line " +
                   std::to_string(line_no));
}

}  // namespace detail

inline std::string_view to_string(Platform p) { return detail::name_of(p, detail::kPlatforms); }
inline std::string_view to_string(Narrative n) { return detail::name_of(n, detail::kNarratives); }
inline std::string_view to_string(Event e) { return detail::name_of(e, detail::kEventNames); }
inline std::string_view to_string(Reliability r) { return detail::name_of(r, detail::kReliabilities); }
inline std::string_view to_string(OutletKind k) { return detail::name_of(k, detail::kKinds); }

inline std::optional<Event> parse_event(std::string_view s) { return detail::lookup(s, detail::kEventNames); }

inline std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

// Strict YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t from, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = from; i < from + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

// ---------------------------------------------------------------------------
// records

struct ArticleRecord {
  std::string outlet_id;
  Platform platform{};
  Date date{};
  Narrative narrative{};
  Event event{};
  std::uint64_t interactions = 0;

  friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

struct OutletProfile {
  std::string outlet_id;
  std::string name;
  Reliability reliability{};
  std::optional<OutletKind> kind;

  friend bool operator==(const OutletProfile&, const OutletProfile&) = default;
};

struct FollowerRecord {
  std::string outlet_id;
  Platform platform{};
  Date period_start{};
  Date period_end{};
  std::uint64_t followers = 0;

  friend bool operator==(const FollowerRecord&, const FollowerRecord&) = default;
};

struct RetweetRecord {
  std::string user_id;
  std::string outlet_id;
  std::uint64_t count = 1;

  friend bool operator==(const RetweetRecord&, const RetweetRecord&) = default;
};

inline const std::vector<std::string> kArticleFields{"outlet_id", "platform", "date", "narrative", "event",
                                                     "interactions"};
inline const std::vector<std::string> kOutletFields{"outlet_id", "name", "reliability", "kind"};
inline const std::vector<std::string> kFollowerFields{"outlet_id", "platform", "period_start", "period_end",
                                                      "followers"};
inline const std::vector<std::string> kRetweetFields{"user_id", "outlet_id", "count"};
inline const std::vector<std::string> kCountFields{"outlet_id", "event", "anti", "neutral", "pro"};

// ---------------------------------------------------------------------------
// generic row reader: both formats reduce to a field->string map per line

namespace detail {

using Row = std::unordered_map<std::string, std::string>;

inline std::string json_field_as_string(const nlohmann::json& obj, const std::string& key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError("malformed row at line " + std::to_string(line_no) + ": missing field '" + key + "'");
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_unsigned() || it->is_number_integer()) return it->dump();
  if (it->is_null()) return "";
  throw InputError("malformed field '" + key + "' at line " + std::to_string(line_no));
}

template <typename Fn>
void for_each_row(std::istream& in, Format format, const std::vector<std::string>& fields, Fn&& fn) {
  if (format == Format::csv) {
    csv::Reader reader(in);
    if (!reader.read_header(fields)) return;
    while (auto cols = reader.next()) {
      Row row;
      for (std::size_t i = 0; i < fields.size(); ++i) row[fields[i]] = std::move((*cols)[i]);
      fn(row, reader.line_no());
    }
    return;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw InputError("malformed JSON at line " + std::to_string(line_no));
    }
    if (!obj.is_object()) throw InputError("malformed row at line " + std::to_string(line_no) + ": not an object");
    Row row;
    for (const auto& f : fields) row[f] = json_field_as_string(obj, f, line_no);
    fn(row, line_no);
  }
}

inline Date field_date(const Row& row, const std::string& key, std::size_t line_no) {
  const auto& s = row.at(key);
  if (auto d = parse_date(s)) return *d;
  throw InputError("malformed field '" + key + "' value '" + s + "' at line " + std::to_string(line_no));
}

inline const std::string& field_key(const Row& row, const std::string& key, std::size_t line_no) {
  const auto& s = row.at(key);
  if (s.empty()) throw InputError("malformed field '" + key + "' (empty) at line " + std::to_string(line_no));
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// parsing

inline std::vector<ArticleRecord> parse_articles(std::istream& in, Format format) {
  std::vector<ArticleRecord> out;
  detail::for_each_row(in, format, kArticleFields, [&](const detail::Row& row, std::size_t line) {
    ArticleRecord r;
    r.outlet_id = detail::field_key(row, "outlet_id", line);
    r.platform = detail::parse_label(row.at("platform"), detail::kPlatforms, "platform", line);
    r.date = detail::field_date(row, "date", line);
    r.narrative = detail::parse_label(row.at("narrative"), detail::kNarratives, "narrative", line);
    r.event = detail::parse_label(row.at("event"), detail::kEventNames, "event", line);
    r.interactions = csv::parse_int<std::uint64_t>(row.at("interactions"), line, "interactions");
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<OutletProfile> parse_outlets(std::istream& in, Format format) {
  std::vector<OutletProfile> out;
  std::unordered_map<std::string, std::size_t> seen;
  detail::for_each_row(in, format, kOutletFields, [&](const detail::Row& row, std::size_t line) {
    OutletProfile p;
    p.outlet_id = detail::field_key(row, "outlet_id", line);
    p.name = row.at("name");
    p.reliability = detail::parse_label(row.at("reliability"), detail::kReliabilities, "reliability", line);
    if (const auto& k = row.at("kind"); !k.empty()) {
      p.kind = detail::parse_label(k, detail::kKinds, "kind", line);
    }
    if (!seen.emplace(p.outlet_id, line).second) {
      throw InputError("duplicate outlet_id '" + p.outlet_id + "' at line " + std::to_string(line));
    }
    out.push_back(std::move(p));
  });
  return out;
}

inline std::vector<FollowerRecord> parse_followers(std::istream& in, Format format) {
  std::vector<FollowerRecord> out;
  detail::for_each_row(in, format, kFollowerFields, [&](const detail::Row& row, std::size_t line) {
    FollowerRecord r;
    r.outlet_id = detail::field_key(row, "outlet_id", line);
    r.platform = detail::parse_label(row.at("platform"), detail::kPlatforms, "platform", line);
    r.period_start = detail::field_date(row, "period_start", line);
    r.period_end = detail::field_date(row, "period_end", line);
    r.followers = csv::parse_int<std::uint64_t>(row.at("followers"), line, "followers");
    if (r.period_end < r.period_start) {
      throw InputError("malformed row at line " + std::to_string(line) + ": period_end before period_start");
    }
    out.push_back(std::move(r));
  });
  return out;
}

// Duplicate (user, outlet) pairs are summed; first-occurrence order is kept.
inline std::vector<RetweetRecord> parse_retweets(std::istream& in, Format format) {
  std::vector<RetweetRecord> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  detail::for_each_row(in, format, kRetweetFields, [&](const detail::Row& row, std::size_t line) {
    RetweetRecord r;
    r.user_id = detail::field_key(row, "user_id", line);
    r.outlet_id = detail::field_key(row, "outlet_id", line);
    r.count = csv::parse_int<std::uint64_t>(row.at("count"), line, "count");
    if (r.count < 1) {
      throw InputError("malformed field 'count' value '0' at line " + std::to_string(line));
    }
    auto [it, inserted] = index.emplace(std::make_pair(r.user_id, r.outlet_id), out.size());
    if (inserted) out.push_back(std::move(r));
    else out[it->second].count += r.count;
  });
  return out;
}

// ---------------------------------------------------------------------------
// writing (canonical CSV)

inline void write_articles(std::ostream& out, const std::vector<ArticleRecord>& rows) {
  csv::write_row(out, kArticleFields);
  for (const auto& r : rows) {
    csv::write_row(out, {r.outlet_id, std::string(to_string(r.platform)), to_string(r.date),
                         std::string(to_string(r.narrative)), std::string(to_string(r.event)),
                         std::to_string(r.interactions)});
  }
}

inline void write_outlets(std::ostream& out, const std::vector<OutletProfile>& rows) {
  csv::write_row(out, kOutletFields);
  for (const auto& r : rows) {
    csv::write_row(out, {r.outlet_id, r.name, std::string(to_string(r.reliability)),
                         r.kind ? std::string(to_string(*r.kind)) : std::string()});
  }
}

inline void write_followers(std::ostream& out, const std::vector<FollowerRecord>& rows) {
  csv::write_row(out, kFollowerFields);
  for (const auto& r : rows) {
    csv::write_row(out, {r.outlet_id, std::string(to_string(r.platform)), to_string(r.period_start),
                         to_string(r.period_end), std::to_string(r.followers)});
  }
}

inline void write_retweets(std::ostream& out, const std::vector<RetweetRecord>& rows) {
  csv::write_row(out, kRetweetFields);
  for (const auto& r : rows) csv::write_row(out, {r.user_id, r.outlet_id, std::to_string(r.count)});
}

// ---------------------------------------------------------------------------
// count tensor

using CountCell = std::array<std::array<std::uint64_t, 3>, 3>;  // [narrative][event]
using CountRow = std::array<std::uint64_t, 3>;                    // per narrative, one event type

struct CountTensor {
  std::vector<std::string> outlets;
  std::vector<CountCell> counts;

  std::size_t size() const { return outlets.size(); }

  std::uint64_t at(std::size_t i, Narrative j, Event k) const {
    return counts[i][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& c : counts)
      for (const auto& row : c)
        for (auto v : row) t += v;
    return t;
  }

  // The N x 3 slice Y_k for one event type.
  std::vector<CountRow> slice(Event k) const {
    std::vector<CountRow> out(counts.size());
    const auto kk = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) out[i][j] = counts[i][j][kk];
    return out;
  }

  friend bool operator==(const CountTensor&, const CountTensor&) = default;
};

inline CountTensor aggregate_counts(const std::vector<ArticleRecord>& articles,
                                    const std::vector<OutletProfile>& registry) {
  CountTensor t;
  std::unordered_map<std::string, std::size_t> index;
  t.outlets.reserve(registry.size());
  for (const auto& p : registry) {
    index.emplace(p.outlet_id, t.outlets.size());
    t.outlets.push_back(p.outlet_id);
  }
  t.counts.assign(registry.size(), CountCell{});
  for (const auto& a : articles) {
    auto it = index.find(a.outlet_id);
    if (it == index.end()) throw InputError("article references unregistered outlet '" + a.outlet_id + "'");
    ++t.counts[it->second][static_cast<std::size_t>(a.narrative)][static_cast<std::size_t>(a.event)];
  }
  return t;
}

inline void write_counts(std::ostream& out, const CountTensor& t) {
  csv::write_row(out, kCountFields);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (auto k : kEvents) {
      const auto kk = static_cast<std::size_t>(k);
      csv::write_row(out, {t.outlets[i], std::string(to_string(k)), std::to_string(t.counts[i][0][kk]),
                           std::to_string(t.counts[i][1][kk]), std::to_string(t.counts[i][2][kk])});
    }
  }
}

inline CountTensor read_counts(std::istream& in) {
  CountTensor t;
  std::unordered_map<std::string, std::size_t> index;
  csv::Reader reader(in);
  if (!reader.read_header(kCountFields)) return t;
  while (auto row = reader.next()) {
    const auto line = reader.line_no();
    const auto& id = (*row)[0];
    auto ev = parse_event((*row)[1]);
    if (!ev) throw InputError("unknown event label '" + (*row)[1] + "' at line " + std::to_string(line));
    auto [it, inserted] = index.emplace(id, t.outlets.size());
    if (inserted) {
      t.outlets.push_back(id);
      t.counts.push_back(CountCell{});
    }
    const auto kk = static_cast<std::size_t>(*ev);
    for (std::size_t j = 0; j < 3; ++j) {
      t.counts[it->second][j][kk] = csv::parse_int<std::uint64_t>((*row)[2 + j], line, kCountFields[2 + j]);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// dataset breakdown

struct BreakdownRow {
  std::string category;
  std::uint64_t sources = 0;
  std::uint64_t contents = 0;
  std::uint64_t interactions = 0;
  double sources_pct = 0.0;
  double contents_pct = 0.0;
  double interactions_pct = 0.0;
};

// Rows: questionable, reliable, total. Sources are registry entries per class.
struct BreakdownTable {
  std::array<BreakdownRow, 3> rows;
};

inline double round1(double pct) { return std::round(pct * 10.0) / 10.0; }

inline std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round1(pct));
  return buf;
}

inline BreakdownTable dataset_breakdown(const std::vector<ArticleRecord>& articles,
                                        const std::vector<OutletProfile>& registry) {
  if (articles.empty()) throw InputError("no articles");
  std::unordered_map<std::string, Reliability> rel;
  for (const auto& p : registry) rel.emplace(p.outlet_id, p.reliability);

  BreakdownTable t;
  t.rows[0].category = "questionable";
  t.rows[1].category = "reliable";
  t.rows[2].category = "total";
  auto row_of = [](Reliability r) { return r == Reliability::questionable ? 0 : 1; };
  for (const auto& p : registry) ++t.rows[row_of(p.reliability)].sources;
  for (const auto& a : articles) {
    auto it = rel.find(a.outlet_id);
    if (it == rel.end()) throw InputError("article references unregistered outlet '" + a.outlet_id + "'");
    auto& r = t.rows[row_of(it->second)];
    ++r.contents;
    r.interactions += a.interactions;
  }
  auto& tot = t.rows[2];
  tot.sources = t.rows[0].sources + t.rows[1].sources;
  tot.contents = t.rows[0].contents + t.rows[1].contents;
  tot.interactions = t.rows[0].interactions + t.rows[1].interactions;
  auto pct = [](std::uint64_t v, std::uint64_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(v) / static_cast<double>(total);
  };
  for (auto& r : t.rows) {
    r.sources_pct = pct(r.sources, tot.sources);
    r.contents_pct = pct(r.contents, tot.contents);
    r.interactions_pct = pct(r.interactions, tot.interactions);
  }
  return t;
}

inline void write_breakdown(std::ostream& out, const BreakdownTable& t) {
  csv::write_row(out, {"category", "sources", "sources_pct", "contents", "contents_pct", "interactions",
                       "interactions_pct"});
  for (const auto& r : t.rows) {
    csv::write_row(out, {r.category, std::to_string(r.sources), format_pct(r.sources_pct),
                         std::to_string(r.contents), format_pct(r.contents_pct), std::to_string(r.interactions),
                         format_pct(r.interactions_pct)});
  }
}

// Inclusive window; either bound may be absent.
inline std::vector<ArticleRecord> filter_window(const std::vector<ArticleRecord>& articles, std::optional<Date> from,
                                                std::optional<Date> to) {
  std::vector<ArticleRecord> out;
  std::copy_if(articles.begin(), articles.end(), std::back_inserter(out), [&](const ArticleRecord& a) {
    return (!from || a.date >= *from) && (!to || a.date <= *to);
  });
  return out;
}

}  // namespace newsbias
