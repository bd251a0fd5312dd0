// newsbias: command-line driver for the ingest -> fit -> bias -> engagement
// -> network -> report pipeline.
//
// Exit codes: 0 success, 1 internal error, 2 input error, 3 missing stage.

#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "newsbias/pipeline.hpp"

namespace {

using newsbias::pipeline::RunConfig;

struct Flags {
  std::string articles, outlets, followers, retweets;
  std::string from, to;
  std::string strict_threshold = "on";
  std::string drop_isolates = "on";
  std::string prior_scale = "sd";
  std::string follower_averaging = "unweighted";
  double prior_alpha = 15.0;
  double prior_x = 1.0;
};

std::optional<newsbias::Date> date_flag(const std::string& s, const char* name) {
  if (s.empty()) return std::nullopt;
  if (auto d = newsbias::parse_date(s)) return d;
  throw newsbias::InputError(std::string("--") + name + " expects YYYY-MM-DD, got '" + s + "'");
}

bool on_off(const std::string& s, const char* name) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw newsbias::InputError(std::string("--") + name + " expects on|off, got '" + s + "'");
}

void resolve(const Flags& f, RunConfig& c) {
  auto path = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };
  c.articles = path(f.articles);
  c.outlets = path(f.outlets);
  c.followers = path(f.followers);
  c.retweets = path(f.retweets);
  c.from = date_flag(f.from, "from");
  c.to = date_flag(f.to, "to");
  c.threshold.strict = on_off(f.strict_threshold, "strict-threshold");
  c.threshold.drop_isolates = on_off(f.drop_isolates, "drop-isolates");
  if (f.prior_scale == "sd") {
    c.model.prior_sd_alpha = f.prior_alpha;
    c.model.prior_sd_x = f.prior_x;
  } else if (f.prior_scale == "variance") {
    c.model = newsbias::latent::ModelConstants::from_variances(f.prior_alpha, f.prior_x);
  } else {
    throw newsbias::InputError("--prior-scale expects sd|variance");
  }
  if (f.follower_averaging == "unweighted") c.follower_averaging = newsbias::bias::FollowerAveraging::unweighted;
  else if (f.follower_averaging == "duration") c.follower_averaging = newsbias::bias::FollowerAveraging::duration_weighted;
  else throw newsbias::InputError("--follower-averaging expects unweighted|duration");
  c.model.validate();
  try {
    c.chain.validate();
  } catch (const newsbias::DomainError& e) {
    throw newsbias::InputError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Narrative and selection bias of news outlets from labeled article counts"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key = value config file; flags override it");

  RunConfig cfg;
  Flags flags;

  app.add_option("--articles", flags.articles, "articles.csv or .jsonl");
  app.add_option("--outlets", flags.outlets, "outlets.csv or .jsonl");
  app.add_option("--followers", flags.followers, "followers.csv or .jsonl");
  app.add_option("--retweets", flags.retweets, "retweets.csv or .jsonl");
  app.add_option("--from", flags.from, "first day of the window (YYYY-MM-DD)");
  app.add_option("--to", flags.to, "last day of the window (YYYY-MM-DD)");
  app.add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  app.add_option("--chains", cfg.chain.chains, "MCMC chains per event type")->capture_default_str();
  app.add_option("--iters", cfg.chain.iterations, "MCMC iterations per chain")->capture_default_str();
  app.add_option("--burnin", cfg.chain.burn_in, "burn-in iterations")->capture_default_str();
  app.add_option("--proposal-sd", cfg.chain.initial_proposal_sd, "initial random-walk sd")->capture_default_str();
  app.add_flag("!--no-adapt", cfg.chain.adapt, "disable proposal adaptation during burn-in");
  app.add_option("--prior-alpha", flags.prior_alpha, "prior scale of the intercepts")->capture_default_str();
  app.add_option("--prior-x", flags.prior_x, "prior scale of the stances")->capture_default_str();
  app.add_option("--prior-scale", flags.prior_scale, "read prior scales as sd|variance")->capture_default_str();
  app.add_option("--theta", cfg.theta, "selection-index angle in radians")->capture_default_str();
  app.add_option("--out", cfg.out, "run directory")->capture_default_str();
  app.add_option("--strict-threshold", flags.strict_threshold, "drop edges strictly below the mean (on) or at/below it (off)")
      ->capture_default_str();
  app.add_option("--drop-isolates", flags.drop_isolates, "drop nodes isolated by the edge cut (on|off)")
      ->capture_default_str();
  app.add_option("--follower-averaging", flags.follower_averaging, "unweighted|duration")->capture_default_str();
  app.add_flag("--draws", cfg.dump_draws, "also write raw draws per event type");

  app.add_option("--n-outlets", cfg.simulation.outlets, "simulate: number of outlets")->capture_default_str();
  app.add_option("--clusters", cfg.simulation.clusters, "simulate: planted audience communities")->capture_default_str();
  app.add_option("--users", cfg.simulation.users, "simulate: number of retweeters")->capture_default_str();
  app.add_option("--row-total", cfg.simulation.mean_row_total, "simulate: mean articles per outlet and event type")
      ->capture_default_str();

  const std::map<std::string, void (*)(const RunConfig&, std::ostream&)> commands{
      {"ingest", newsbias::pipeline::cmd_ingest},         {"fit", newsbias::pipeline::cmd_fit},
      {"bias", newsbias::pipeline::cmd_bias},             {"engagement", newsbias::pipeline::cmd_engagement},
      {"network", newsbias::pipeline::cmd_network},       {"report", newsbias::pipeline::cmd_report},
      {"simulate", newsbias::pipeline::cmd_simulate},     {"run", newsbias::pipeline::cmd_run},
  };
  const std::map<std::string, std::string> help{
      {"ingest", "validate inputs, write canonical files, counts and breakdown"},
      {"fit", "fit the latent-space model per event type (posterior.csv)"},
      {"bias", "narrative bias, propensity factors and selection index (bias.csv)"},
      {"engagement", "adjusted engagement and quadratic fits (engagement.csv, fits.json)"},
      {"network", "retweeter similarity graph and Louvain clusters"},
      {"report", "join the artifacts into report.json"},
      {"simulate", "write a synthetic corpus with a truth.json sidecar"},
      {"run", "ingest, fit, bias, engagement, network and report in sequence"},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    resolve(flags, cfg);
    for (const auto* sub : app.get_subcommands()) commands.at(sub->get_name())(cfg, std::cerr);
  } catch (const newsbias::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const newsbias::MissingStageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const newsbias::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
