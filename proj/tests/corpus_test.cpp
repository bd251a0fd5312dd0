#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "newsbias/corpus.hpp"

using namespace newsbias;

namespace {

const char* kHeader = "outlet_id,platform,date,narrative,event,interactions\n";

std::vector<OutletProfile> registry(std::initializer_list<std::pair<const char*, Reliability>> ids) {
  std::vector<OutletProfile> out;
  for (const auto& [id, rel] : ids) out.push_back({id, id, rel, std::nullopt});
  return out;
}

ArticleRecord article(const std::string& id, Narrative n, Event e, std::uint64_t interactions = 0) {
  return {id, Platform::twitter, *parse_date("2021-03-01"), n, e, interactions};
}

}  // namespace

TEST(ParseArticles, MapsFieldsDirectly) {
  std::istringstream in(std::string(kHeader) + "o1,twitter,2021-03-01,anti,adverse,12\n");
  const auto rows = parse_articles(in, Format::csv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].outlet_id, "o1");
  EXPECT_EQ(rows[0].platform, Platform::twitter);
  EXPECT_EQ(to_string(rows[0].date), "2021-03-01");
  EXPECT_EQ(rows[0].narrative, Narrative::anti);
  EXPECT_EQ(rows[0].event, Event::adverse);
  EXPECT_EQ(rows[0].interactions, 12u);
}

TEST(ParseArticles, EmptyStreamGivesEmptyList) {
  std::istringstream csv_in("");
  EXPECT_TRUE(parse_articles(csv_in, Format::csv).empty());
  std::istringstream jsonl_in("");
  EXPECT_TRUE(parse_articles(jsonl_in, Format::jsonl).empty());
}

TEST(ParseArticles, UnknownNarrativeNamesValueAndLine) {
  std::istringstream in(std::string(kHeader) + "o1,twitter,2021-03-01,anti,adverse,1\n"
                                               "o1,twitter,2021-03-01,provax,adverse,1\n");
  try {
    parse_articles(in, Format::csv);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "unknown narrative label 'provax' at line 3");
  }
}

TEST(ParseArticles, MalformedRowsCarryLineAndField) {
  std::istringstream bad_count(std::string(kHeader) + "o1,twitter,2021-03-01,anti,adverse,-4\n");
  EXPECT_THROW(
      {
        try {
          parse_articles(bad_count, Format::csv);
        } catch (const InputError& e) {
          EXPECT_NE(std::string(e.what()).find("interactions"), std::string::npos);
          EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
          throw;
        }
      },
      InputError);

  std::istringstream short_row(std::string(kHeader) + "o1,twitter,2021-03-01\n");
  EXPECT_THROW(parse_articles(short_row, Format::csv), InputError);
  std::istringstream bad_date(std::string(kHeader) + "o1,twitter,2021-02-30,anti,adverse,1\n");
  EXPECT_THROW(parse_articles(bad_date, Format::csv), InputError);
  std::istringstream bad_header("outlet,platform\n");
  EXPECT_THROW(parse_articles(bad_header, Format::csv), InputError);
}

TEST(ParseArticles, UnknownPlatformIsRejected) {
  std::istringstream in(std::string(kHeader) + "o1,tiktok,2021-03-01,anti,adverse,1\n");
  EXPECT_THROW(parse_articles(in, Format::csv), InputError);
}

TEST(ParseArticles, JsonlMatchesCsv) {
  std::istringstream csv_in(std::string(kHeader) + "o1,twitter,2021-03-01,anti,adverse,12\n"
                                                   "\"o,2\",youtube,2020-12-31,pro,positive,0\n");
  std::istringstream jsonl_in(
      R"({"outlet_id":"o1","platform":"twitter","date":"2021-03-01","narrative":"anti","event":"adverse","interactions":12})"
      "\n"
      R"({"outlet_id":"o,2","platform":"youtube","date":"2020-12-31","narrative":"pro","event":"positive","interactions":0})"
      "\n");
  EXPECT_EQ(parse_articles(csv_in, Format::csv), parse_articles(jsonl_in, Format::jsonl));
}

TEST(ParseArticles, JsonlErrorsReportLine) {
  std::istringstream in("{\"outlet_id\":\"o1\"}\n");
  EXPECT_THROW(parse_articles(in, Format::jsonl), InputError);
  std::istringstream garbage("not json\n");
  EXPECT_THROW(parse_articles(garbage, Format::jsonl), InputError);
}

TEST(ParseRetweets, DuplicatePairsAreSummed) {
  std::istringstream in("user_id,outlet_id,count\nu1,o1,2\nu1,o1,3\n");
  const auto rows = parse_retweets(in, Format::csv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (RetweetRecord{"u1", "o1", 5}));
}

TEST(ParseRetweets, EmptyStream) {
  std::istringstream in("");
  EXPECT_TRUE(parse_retweets(in, Format::csv).empty());
}

TEST(ParseRetweets, ZeroCountRejected) {
  std::istringstream in("user_id,outlet_id,count\nu1,o1,0\n");
  EXPECT_THROW(parse_retweets(in, Format::csv), InputError);
}

TEST(ParseRetweets, TotalCountPreservedUnderDedup) {
  std::mt19937_64 rng(7);
  std::ostringstream text;
  text << "user_id,outlet_id,count\n";
  std::uint64_t expected = 0;
  for (int r = 0; r < 10; ++r) {
    const auto c = 1 + rng() % 9;
    expected += c;
    text << "u" << rng() % 3 << ",o" << rng() % 4 << "," << c << "\n";
  }
  std::istringstream in(text.str());
  std::uint64_t got = 0;
  for (const auto& r : parse_retweets(in, Format::csv)) got += r.count;
  EXPECT_EQ(got, expected);
}

TEST(ParseOutlets, DuplicateIdRejectedAndKindOptional) {
  std::istringstream ok("outlet_id,name,reliability,kind\no1,\"Daily, News\",reliable,\no2,B,questionable,tv\n");
  const auto rows = parse_outlets(ok, Format::csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].name, "Daily, News");
  EXPECT_FALSE(rows[0].kind.has_value());
  EXPECT_EQ(rows[1].kind, OutletKind::tv);
  std::istringstream dup("outlet_id,name,reliability,kind\no1,A,reliable,\no1,B,reliable,\n");
  EXPECT_THROW(parse_outlets(dup, Format::csv), InputError);
}

TEST(ParseFollowers, PeriodOrderEnforced) {
  std::istringstream bad("outlet_id,platform,period_start,period_end,followers\no1,facebook,2021-02-01,2021-01-01,5\n");
  EXPECT_THROW(parse_followers(bad, Format::csv), InputError);
}

TEST(AggregateCounts, SingleCell) {
  const auto reg = registry({{"o1", Reliability::reliable}});
  std::vector<ArticleRecord> a(3, article("o1", Narrative::pro, Event::positive));
  const auto t = aggregate_counts(a, reg);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k)
      EXPECT_EQ(t.counts[0][j][k], (j == 2 && k == 2) ? 3u : 0u);
}

TEST(AggregateCounts, TwoOutletsOneEach) {
  const auto reg = registry({{"o1", Reliability::reliable}, {"o2", Reliability::questionable}});
  const auto t = aggregate_counts({article("o1", Narrative::anti, Event::adverse), article("o2", Narrative::neutral, Event::neutral)}, reg);
  EXPECT_EQ(t.total(), 2u);
  EXPECT_EQ(t.at(0, Narrative::anti, Event::adverse), 1u);
  EXPECT_EQ(t.at(1, Narrative::neutral, Event::neutral), 1u);
}

TEST(AggregateCounts, UnregisteredOutletNamed) {
  const auto reg = registry({{"o1", Reliability::reliable}});
  try {
    aggregate_counts({article("ghost", Narrative::anti, Event::adverse)}, reg);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(AggregateCounts, ConservationAgainstIndependentTally) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto reg = registry({{"a", Reliability::reliable}, {"b", Reliability::questionable}, {"c", Reliability::reliable}});
    std::vector<ArticleRecord> arts;
    const std::size_t n = trial == 0 ? 1000 : rng() % 500;
    std::map<std::tuple<std::string, int, int>, std::uint64_t> tally;
    for (std::size_t r = 0; r < n; ++r) {
      const auto id = reg[rng() % 3].outlet_id;
      const int j = static_cast<int>(rng() % 3), k = static_cast<int>(rng() % 3);
      arts.push_back(article(id, static_cast<Narrative>(j), static_cast<Event>(k)));
      ++tally[{id, j, k}];
    }
    const auto t = aggregate_counts(arts, reg);
    EXPECT_EQ(t.total(), n);
    for (std::size_t i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          auto it = tally.find({reg[i].outlet_id, j, k});
          EXPECT_EQ(t.counts[i][j][k], it == tally.end() ? 0u : it->second);
        }
  }
}

TEST(AggregateCounts, RegistryPermutationPermutesRows) {
  std::mt19937_64 rng(5);
  auto reg = registry({{"a", Reliability::reliable}, {"b", Reliability::questionable}, {"c", Reliability::reliable},
                       {"d", Reliability::reliable}});
  std::vector<ArticleRecord> arts;
  for (int r = 0; r < 300; ++r) {
    arts.push_back(article(reg[rng() % 4].outlet_id, static_cast<Narrative>(rng() % 3), static_cast<Event>(rng() % 3)));
  }
  const auto base = aggregate_counts(arts, reg);
  for (int trial = 0; trial < 5; ++trial) {
    auto perm = reg;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto t = aggregate_counts(arts, perm);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto orig = std::find(base.outlets.begin(), base.outlets.end(), perm[i].outlet_id) - base.outlets.begin();
      EXPECT_EQ(t.outlets[i], perm[i].outlet_id);
      EXPECT_EQ(t.counts[i], base.counts[static_cast<std::size_t>(orig)]);
    }
  }
}

TEST(CountTensor, CsvRoundTrip) {
  std::mt19937_64 rng(11);
  CountTensor t;
  for (int i = 0; i < 7; ++i) {
    t.outlets.push_back("outlet-" + std::to_string(i));
    CountCell c{};
    for (auto& row : c)
      for (auto& v : row) v = rng() % 1000;
    t.counts.push_back(c);
  }
  std::stringstream buf;
  write_counts(buf, t);
  EXPECT_EQ(read_counts(buf), t);
}

TEST(DatasetBreakdown, SingleReliableOutlet) {
  const auto reg = registry({{"o1", Reliability::reliable}});
  std::vector<ArticleRecord> arts;
  for (int i = 0; i < 5; ++i) arts.push_back(article("o1", Narrative::neutral, Event::neutral, 10 + i));
  const auto t = dataset_breakdown(arts, reg);
  EXPECT_EQ(t.rows[1].sources, 1u);
  EXPECT_EQ(t.rows[1].contents, 5u);
  EXPECT_EQ(t.rows[1].interactions, 60u);
  EXPECT_DOUBLE_EQ(t.rows[1].contents_pct, 100.0);
  EXPECT_EQ(t.rows[0].sources, 0u);
  EXPECT_EQ(t.rows[0].contents, 0u);
  EXPECT_DOUBLE_EQ(t.rows[0].sources_pct, 0.0);
}

TEST(DatasetBreakdown, EmptyInputRejected) {
  EXPECT_THROW(dataset_breakdown({}, registry({{"o1", Reliability::reliable}})), InputError);
}

TEST(DatasetBreakdown, PercentagesRoundToOneDecimal) {
  EXPECT_EQ(format_pct(100.0 * 44547 / 353530), "12.6");
  EXPECT_EQ(format_pct(100.0 * 161 / 682), "23.6");
  EXPECT_EQ(format_pct(100.0 * 10898774 / 95230911), "11.4");
}

TEST(FilterWindow, InclusiveBounds) {
  std::vector<ArticleRecord> arts{article("o1", Narrative::anti, Event::adverse)};
  arts.push_back(arts[0]);
  arts[1].date = *parse_date("2021-04-01");
  EXPECT_EQ(filter_window(arts, parse_date("2021-03-01"), parse_date("2021-03-31")).size(), 1u);
  EXPECT_EQ(filter_window(arts, std::nullopt, std::nullopt).size(), 2u);
  EXPECT_EQ(filter_window(arts, parse_date("2021-03-02"), std::nullopt).size(), 1u);
}
