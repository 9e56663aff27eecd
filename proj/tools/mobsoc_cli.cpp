// mobsoc: command line front end for every pipeline stage.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mobsoc/cohesion.hpp"
#include "mobsoc/correlation.hpp"
#include "mobsoc/dataset.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/eval.hpp"
#include "mobsoc/homophily.hpp"
#include "mobsoc/sost.hpp"
#include "mobsoc/synthgen.hpp"

using namespace mobsoc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw IntegrityError("missing input " + p.string());
}

// Writes to `path`, or stdout when empty.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write(out);
}

void emit_json(const std::string& path, const json& j) {
  emit(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

struct DataArgs {
  std::string dir;
  std::string checkins;
  std::string edges;
  std::size_t activity = 50;
  double utc_offset_hours = -8.0;
  double slot_hours = 1.0;

  void add(CLI::App* app) {
    app->add_option("--data", dir, "Directory with checkins.csv and edges.csv");
    app->add_option("--checkins", checkins, "Check-in CSV (instead of --data)");
    app->add_option("--edges", edges, "Edge CSV (instead of --data)");
    app->add_option("--activity-threshold", activity, "Minimum check-ins of an active user");
    app->add_option("--utc-offset-hours", utc_offset_hours, "Local time offset of the data");
    app->add_option("--slot-hours", slot_hours, "Width of a time-of-day slot");
  }

  TimeConfig time() const {
    TimeConfig t;
    t.utc_offset = static_cast<Seconds>(utc_offset_hours * kHour);
    t.slot_hours = slot_hours;
    return t;
  }

  Dataset load() const {
    DatasetConfig cfg;
    cfg.activity_threshold = activity;
    cfg.time = time();
    if (!dir.empty()) {
      require_file(fs::path(dir) / "checkins.csv");
      require_file(fs::path(dir) / "edges.csv");
      return load_dataset_dir(dir, cfg);
    }
    if (checkins.empty() || edges.empty()) throw ConfigError("give --data or both --checkins and --edges");
    require_file(checkins);
    require_file(edges);
    return load_dataset(checkins, edges, cfg);
  }
};

struct ModelArgs {
  double beta = 0.05;
  std::string drift = "exponential";
  std::optional<double> stay_hours;  // estimated from the data when absent
  std::size_t kappa = 3;
  std::string estimator = "B";
  std::string classes = "I+II+III";
  bool no_trend = false;
  bool evidence_when_alone = false;
  double window_min = 60;
  double horizon_min = 120;

  void add(CLI::App* app) {
    app->add_option("--beta", beta, "Drift rate in (0, 1)");
    app->add_option("--drift", drift, "none | geometric | exponential");
    app->add_option("--stay-hours", stay_hours, "Drift time unit; estimated from the data when omitted");
    app->add_option("--kappa", kappa, "Number of previous venues in a context");
    app->add_option("--estimator", estimator, "Social estimator: A or B");
    app->add_option("--classes", classes, "Influence classes, e.g. I+II or none");
    app->add_flag("--no-trend", no_trend, "Disable the friends' trend model");
    app->add_flag("--evidence-when-alone", evidence_when_alone, "Use all friends as evidence outside situations");
    app->add_option("--window-min", window_min, "Co-presence window in minutes");
    app->add_option("--horizon-min", horizon_min, "How long a situation stays current, in minutes");
  }

  SostConfig config(const TimeConfig& time) const {
    SostConfig c;
    c.beta = beta;
    c.drift = parse_drift_kind(drift);
    c.stay_hours = stay_hours.value_or(1.0);
    c.kappa = kappa;
    c.estimator = parse_estimator_kind(estimator);
    c.classes = parse_classes(classes);
    c.use_trend = !no_trend;
    c.evidence_when_alone = evidence_when_alone;
    c.situation_window = static_cast<Seconds>(window_min * 60);
    c.situation_horizon = static_cast<Seconds>(horizon_min * 60);
    c.time = time;
    c.validate();
    return c;
  }
};

std::vector<UserIdx> population(const Dataset& d, bool all) {
  if (!all) return d.active_users();
  std::vector<UserIdx> out;
  for (std::uint32_t u = 0; u < d.num_users(); ++u) out.push_back(UserIdx{u});
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Mobility and social ties toolkit"};
  app.set_config("--config", "", "TOML file mirroring the flags; flags win");
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  app.add_option("--seed", seed, "Seed of every randomized step");
  app.add_option("--threads", threads, "Worker cap; 0 uses all cores");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate raw CSVs and write a normalized dataset");
  DataArgs ingest_data;
  std::string ingest_out;
  ingest_data.add(ingest);
  ingest->add_option("--out", ingest_out, "Output directory")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "Descriptive statistics");
  DataArgs stats_data;
  std::string stats_out;
  std::size_t path_samples = 100;
  stats_data.add(stats);
  stats->add_option("--out", stats_out, "JSON output (stdout when omitted)");
  stats->add_option("--path-samples", path_samples, "Source nodes for the mean path length");

  // homophily
  auto* homophily = app.add_subcommand("homophily", "Homophily measures for user pairs");
  DataArgs hom_data;
  std::string hom_out, hom_a, hom_b;
  std::vector<std::string> hom_measures;
  std::size_t hom_pairs = 1000;
  bool hom_all = false;
  hom_data.add(homophily);
  homophily->add_option("--out", hom_out, "CSV output (stdout when omitted)");
  homophily->add_option("--measure", hom_measures, "Measure labels; all standard measures when omitted");
  homophily->add_option("--pairs", hom_pairs, "Number of sampled pairs");
  homophily->add_option("--user-a", hom_a, "First user of a single pair");
  homophily->add_option("--user-b", hom_b, "Second user of a single pair");
  homophily->add_flag("--all-users", hom_all, "Sample among all users, not only active ones");

  // cohesion
  auto* cohesion = app.add_subcommand("cohesion", "Clique and 2-plex subgroups");
  DataArgs coh_data;
  std::string coh_graph, coh_out;
  bool coh_cliques = false, coh_plexes = false;
  std::size_t coh_min = 3, coh_max = 0;
  coh_data.add(cohesion);
  cohesion->add_option("--graph", coh_graph, "Edge CSV (instead of --data)");
  cohesion->add_option("--out", coh_out, "JSON output (stdout when omitted)");
  cohesion->add_flag("--cliques", coh_cliques, "Enumerate maximal cliques");
  cohesion->add_flag("--two-plexes", coh_plexes, "Enumerate maximal 2-plexes");
  cohesion->add_option("--min-size", coh_min, "Smallest group reported (at least 3)");
  cohesion->add_option("--max-count", coh_max, "Stop after this many groups; 0 for no limit");

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Homophily against neighbourhood cohesion");
  DataArgs cor_data;
  std::string cor_out, cor_source = "global";
  std::size_t cor_pairs = 10000;
  bool cor_rank = false, cor_all = false;
  double cor_lat = 0, cor_lon = 0, cor_radius = 25;
  cor_data.add(correlate);
  correlate->add_option("--out", cor_out, "CSV output (stdout when omitted)");
  correlate->add_option("--pairs", cor_pairs, "Number of sampled pairs");
  correlate->add_option("--source", cor_source, "global | home_city | two_plex");
  correlate->add_option("--lat", cor_lat, "Home city centre latitude");
  correlate->add_option("--lon", cor_lon, "Home city centre longitude");
  correlate->add_option("--radius-km", cor_radius, "Home city radius");
  correlate->add_flag("--rank", cor_rank, "Add Spearman columns");
  correlate->add_flag("--all-users", cor_all, "Sample among all users, not only active ones");

  // train
  auto* train = app.add_subcommand("train", "Fit the social model of one user on all data");
  DataArgs train_data;
  ModelArgs train_model;
  std::string train_user, train_out;
  train_data.add(train);
  train_model.add(train);
  train->add_option("--user", train_user, "Target user id")->required();
  train->add_option("--out", train_out, "Model JSON (stdout when omitted)");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Prequential evaluation of all active users");
  DataArgs eval_data;
  ModelArgs eval_model;
  std::string eval_out, eval_users, eval_hourly, eval_breakdown;
  bool eval_no_ablations = false;
  eval_data.add(evaluate_cmd);
  eval_model.add(evaluate_cmd);
  evaluate_cmd->add_option("--out", eval_out, "Report JSON (stdout when omitted)");
  evaluate_cmd->add_option("--users-csv", eval_users, "Per-user records");
  evaluate_cmd->add_option("--hourly-csv", eval_hourly, "Hourly improvement shares");
  evaluate_cmd->add_option("--breakdown-csv", eval_breakdown, "Improvement correlations");
  evaluate_cmd->add_flag("--no-ablations", eval_no_ablations, "Only the configured model");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted influence");
  GenConfig gen;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--users", gen.n_users, "Number of users");
  synth->add_option("--venues", gen.n_venues, "Number of venues");
  synth->add_option("--days", gen.days, "Days of activity");
  synth->add_option("--p-follow", gen.p_follow, "Daily chance to repeat a friend's visit");
  synth->add_option("--p-cositu", gen.p_cositu, "Daily chance of a group outing");
  synth->add_option("--p-join", gen.p_join, "Chance that a member joins an outing");
  synth->add_option("--p-recommend", gen.p_recommend, "Chance that an outing ends at a scouted venue");
  synth->add_option("--p-trend", gen.p_trend, "Daily chance to visit a trending venue");
  synth->add_option("--rewiring", gen.rewiring, "Share of group ties moved outside");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Predictability limits");
  double b_entropy = 0, b_locations = 0;
  std::optional<double> b_new, b_visits;
  bounds->add_option("--entropy", b_entropy, "Mean entropy in nats")->required();
  bounds->add_option("--locations", b_locations, "Mean number of locations")->required();
  bounds->add_option("--new-fraction", b_new, "Share of visits to new locations");
  bounds->add_option("--visits", b_visits, "Mean visits per location");

  // report
  auto* report = app.add_subcommand("report", "Plot data and a summary from an evaluation report");
  std::string rep_in, rep_dir;
  report->add_option("--in", rep_in, "Report JSON written by evaluate")->required();
  report->add_option("--out-dir", rep_dir, "Directory for plot-data CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    throw;
  }

  if (*ingest) {
    const auto d = ingest_data.load();
    save_dataset(d, ingest_out);
    emit_json("", {{"users", d.num_users()},
                   {"venues", d.num_venues()},
                   {"checkins", d.checkins().size()},
                   {"edges", d.graph().num_edges()},
                   {"active_users", d.active_users().size()}});
  } else if (*stats) {
    const auto d = stats_data.load();
    emit_json(stats_out, to_json(descriptive_stats(d, {path_samples, seed})));
  } else if (*homophily) {
    const auto d = hom_data.load();
    std::vector<Measure> measures;
    for (const auto& m : hom_measures) measures.push_back(parse_measure(m));
    if (measures.empty()) measures = standard_measures();
    std::vector<std::pair<UserIdx, UserIdx>> pairs;
    if (!hom_a.empty() || !hom_b.empty()) {
      const auto a = d.find_user(hom_a), b = d.find_user(hom_b);
      if (!a || !b) throw IntegrityError("unknown user in --user-a/--user-b");
      pairs.emplace_back(*a, *b);
    } else {
      pairs = sample_pairs(population(d, hom_all), hom_pairs, seed).pairs;
    }
    const HomophilyEvaluator eval(d);
    emit(hom_out, [&](std::ostream& o) {
      o << "user_a,user_b";
      for (const auto& m : measures) o << ',' << m.label();
      o << '\n';
      o.precision(17);
      for (const auto& [a, b] : pairs) {
        o << d.user_id(a) << ',' << d.user_id(b);
        for (const auto& m : measures) o << ',' << eval(m, a, b);
        o << '\n';
      }
    });
  } else if (*cohesion) {
    std::optional<Dataset> d;
    if (!coh_graph.empty()) {
      require_file(coh_graph);
      std::ifstream in(coh_graph);
      d.emplace(std::vector<CheckInRow>{}, read_edges(in));
    } else {
      d.emplace(coh_data.load());
    }
    if (!coh_cliques && !coh_plexes) coh_cliques = true;
    json out;
    const EnumerationOptions opts{coh_min, coh_max};
    const auto dump = [&](const Enumeration& e) {
      json groups = json::array();
      for (const auto& g : e.groups) {
        json members = json::array();
        for (auto m : g.members) members.push_back(d->user_id(UserIdx{m}));
        groups.push_back({{"members", members},
                          {"size", g.members.size()},
                          {"cohesion", std::isinf(g.cohesion) ? json("inf") : json(g.cohesion)}});
      }
      return json{{"count", e.groups.size()}, {"truncated", e.truncated}, {"groups", groups}};
    };
    if (coh_cliques) out["cliques"] = dump(enumerate_cliques(d->graph(), opts));
    if (coh_plexes) out["two_plexes"] = dump(enumerate_two_plexes(d->graph(), opts));
    out["clustering_coefficient"] = clustering_coefficient(d->graph());
    emit_json(coh_out, out);
  } else if (*correlate) {
    const auto d = cor_data.load();
    const auto source = parse_pair_source(cor_source);
    PairSample sample;
    if (source == PairSource::TwoPlex) {
      const auto plexes = enumerate_two_plexes(d.graph());
      std::vector<UserSet> groups;
      for (const auto& g : plexes.groups) {
        UserSet s;
        for (auto m : g.members) s.push_back(UserIdx{m});
        groups.push_back(s);
      }
      sample = sample_group_pairs(groups, cor_pairs, seed);
    } else if (source == PairSource::HomeCity) {
      sample = sample_pairs(home_city_users(d, {cor_lat, cor_lon}, cor_radius), cor_pairs, seed, source);
    } else {
      sample = sample_pairs(population(d, cor_all), cor_pairs, seed, source);
    }
    const auto measures = standard_measures();
    const auto table = correlation_matrix(d, sample, measures, threads);
    emit(cor_out, [&](std::ostream& o) { write_csv(o, table, cor_rank); });
  } else if (*train) {
    const auto d = train_data.load();
    const auto u = d.find_user(train_user);
    if (!u) throw IntegrityError("unknown user " + train_user);
    auto cfg = train_model.config(train_data.time());
    if (!train_model.stay_hours) cfg.stay_hours = estimate_stay_hours(d);
    std::vector<UserIdx> friends;
    for (auto f : d.graph().neighbors(index(*u))) friends.push_back(UserIdx{f});
    std::vector<CheckIn> stream(d.history(*u).begin(), d.history(*u).end());
    for (auto f : friends) stream.insert(stream.end(), d.history(f).begin(), d.history(f).end());
    std::sort(stream.begin(), stream.end(), ByTime{});
    SostModel model(*u, friends, cfg);
    for (const auto& c : stream) model.observe(c);
    emit_json(train_out, model.to_json());
  } else if (*evaluate_cmd) {
    const auto d = eval_data.load();
    EvalConfig cfg;
    cfg.sost = eval_model.config(eval_data.time());
    cfg.estimate_stay = !eval_model.stay_hours;
    cfg.ablations = !eval_no_ablations;
    cfg.threads = threads;
    const auto r = evaluate(d, cfg);
    emit_json(eval_out, to_json(r));
    if (!eval_users.empty()) emit(eval_users, [&](std::ostream& o) { write_user_csv(o, r.per_user); });
    if (!eval_hourly.empty()) emit(eval_hourly, [&](std::ostream& o) { write_hourly_csv(o, r); });
    if (!eval_breakdown.empty()) {
      const auto rows = improvement_breakdowns(r.per_user);
      emit(eval_breakdown, [&](std::ostream& o) { write_breakdown_csv(o, rows); });
    }
  } else if (*synth) {
    gen.seed = seed;
    gen.validate();
    const auto s = generate(gen);
    save_synthetic(s, synth_out);
    emit_json("", {{"users", gen.n_users},
                   {"checkins", s.rows.size()},
                   {"edges", s.edges.size()},
                   {"groups", s.truth.groups.size()},
                   {"influence_events", s.truth.influence.size()}});
  } else if (*bounds) {
    // The upper bound needs both the new-location share and the visit rate.
    const bool upper = b_new && b_visits;
    const auto b = predictability_bounds(b_entropy, b_locations, b_new.value_or(0.0), b_visits.value_or(2.0));
    auto j = to_json(b);
    if (!upper) j["upper"] = nullptr;
    emit_json("", j);
  } else if (*report) {
    require_file(rep_in);
    std::ifstream in(rep_in);
    const auto r = json::parse(in);
    if (r.value("format", "") != "mobsoc-eval") throw SchemaError("not an evaluation report: " + rep_in);
    std::cout << "users " << r.at("users") << ", events " << r.at("events") << '\n';
    std::cout << "individual accuracy " << r.at("accuracy_st") << '\n';
    std::cout << "social accuracy     " << r.at("accuracy_sost") << '\n';
    for (const auto& v : r.at("variants")) {
      std::cout << "  " << v.at("name").get<std::string>() << ": gain " << v.at("gain")
                << " (p = " << v.at("test").at("p_value") << ")\n";
    }
    if (!rep_dir.empty()) {
      fs::create_directories(rep_dir);
      emit((fs::path(rep_dir) / "variants.csv").string(), [&](std::ostream& o) {
        o << "variant,accuracy,gain,relative_gain,p_value\n";
        for (const auto& v : r.at("variants")) {
          o << v.at("name").get<std::string>() << ',' << v.at("accuracy") << ',' << v.at("gain") << ','
            << v.at("relative_gain") << ',' << v.at("test").at("p_value") << '\n';
        }
      });
      emit((fs::path(rep_dir) / "hourly.csv").string(), [&](std::ostream& o) {
        o << "hour,workday,weekend\n";
        for (std::size_t h = 0; h < 24; ++h) {
          o << h << ',' << r.at("hourly").at("workday").at(h) << ',' << r.at("hourly").at("weekend").at(h) << '\n';
        }
      });
    }
  }
  return 0;
}

void error_record(const std::string& name, const std::string& message, int code) {
  std::cerr << json{{"error", name}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    error_record("UsageError", e.what(), static_cast<int>(ErrorKind::Usage));
    return static_cast<int>(ErrorKind::Usage);
  } catch (const Error& e) {
    error_record(e.name(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const json::exception& e) {
    error_record("SchemaError", e.what(), static_cast<int>(ErrorKind::Parse));
    return static_cast<int>(ErrorKind::Parse);
  } catch (const std::exception& e) {
    error_record("InternalError", e.what(), 1);
    return 1;
  }
}
