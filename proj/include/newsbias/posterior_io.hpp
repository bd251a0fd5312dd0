#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "newsbias/bias.hpp"
#include "newsbias/csv.hpp"
#include "newsbias/diagnostics.hpp"

namespace newsbias {

inline const std::vector<std::string> kPosteriorFields{"outlet_id", "event_type", "param", "mean", "sd",
                                                       "q05",       "q95",        "rhat",  "ess"};

inline void write_posterior(std::ostream& out, const std::vector<bias::EventFit>& fits) {
  csv::write_row(out, kPosteriorFields);
  auto row = [&](const std::string& id, Event k, const char* param, const latent::ParamStat& s) {
    csv::write_row(out, {id, std::string(to_string(k)), param, csv::format_double(s.mean), csv::format_double(s.sd),
                         csv::format_double(s.q05), csv::format_double(s.q95), csv::format_double(s.rhat),
                         csv::format_double(s.ess)});
  };
  for (const auto& f : fits) {
    for (std::size_t i = 0; i < f.outlets.size(); ++i) {
      row(f.outlets[i], f.event, "alpha", f.summary.alpha(i));
      row(f.outlets[i], f.event, "x", f.summary.x(i));
    }
  }
}

// Fits come back in event order; outlets keep their file order.
inline std::vector<bias::EventFit> read_posterior(std::istream& in) {
  struct Partial {
    std::vector<std::string> outlets;
    std::map<std::string, std::pair<latent::ParamStat, latent::ParamStat>> stats;
  };
  std::map<Event, Partial> by_event;
  csv::Reader reader(in);
  if (!reader.read_header(kPosteriorFields)) return {};
  while (auto f = reader.next()) {
    const auto line = reader.line_no();
    auto ev = parse_event((*f)[1]);
    if (!ev) throw InputError("unknown event label '" + (*f)[1] + "' at line " + std::to_string(line));
    latent::ParamStat s;
    s.mean = csv::parse_double((*f)[3], line, "mean");
    s.sd = csv::parse_double((*f)[4], line, "sd");
    s.q05 = csv::parse_double((*f)[5], line, "q05");
    s.q95 = csv::parse_double((*f)[6], line, "q95");
    s.rhat = csv::parse_double((*f)[7], line, "rhat");
    s.ess = csv::parse_double((*f)[8], line, "ess");
    auto& part = by_event[*ev];
    auto [it, inserted] = part.stats.emplace((*f)[0], std::pair<latent::ParamStat, latent::ParamStat>{});
    if (inserted) part.outlets.push_back((*f)[0]);
    if ((*f)[2] == "alpha") it->second.first = s;
    else if ((*f)[2] == "x") it->second.second = s;
    else throw InputError("unknown param '" + (*f)[2] + "' at line " + std::to_string(line));
  }
  std::vector<bias::EventFit> fits;
  for (auto& [ev, part] : by_event) {
    bias::EventFit fit;
    fit.event = ev;
    fit.outlets = part.outlets;
    fit.summary.outlets = part.outlets.size();
    fit.summary.stats.resize(2 * part.outlets.size());
    for (std::size_t i = 0; i < part.outlets.size(); ++i) {
      const auto& [a, x] = part.stats.at(part.outlets[i]);
      fit.summary.stats[i] = a;
      fit.summary.stats[part.outlets.size() + i] = x;
    }
    fits.push_back(std::move(fit));
  }
  return fits;
}

}  // namespace newsbias
