#include "mobsoc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <boost/math/tools/roots.hpp>

#include "mobsoc/core.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/parallel.hpp"

namespace mobsoc {

namespace {

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

}  // namespace

Bounds predictability_bounds(double entropy, double locations, double new_fraction, double visits) {
  if (!(entropy >= 0.0) || !(locations >= 2.0) || !(new_fraction >= 0.0 && new_fraction < 1.0) ||
      !(visits > 1.0)) {
    throw DegenerateInput("predictability bounds need H >= 0, N >= 2, 0 <= f < 1 and v > 1");
  }
  Bounds b;
  b.lower = std::exp(-entropy);
  const double x = (visits - new_fraction) / (1.0 - new_fraction);
  b.upper = (x - 1.0) / x * (1.0 - new_fraction);
  const double n = locations;
  if (entropy > std::log(n)) {
    b.fano = 1.0 / n;
    b.fano_clamped = true;
    return b;
  }
  if (entropy == 0.0) {
    b.fano = 1.0;
    return b;
  }
  const auto g = [&](double p) { return binary_entropy(p) + (1.0 - p) * std::log(n - 1.0) - entropy; };
  // g falls from ln N - H >= 0 at 1/N to -H < 0 at 1.
  const auto [lo, hi] =
      boost::math::tools::bisect(g, 1.0 / n, 1.0, boost::math::tools::eps_tolerance<double>(52));
  b.fano = 0.5 * (lo + hi);
  return b;
}

std::vector<EventOutcome> evaluate_user(const Dataset& data, UserIdx user,
                                        std::span<const SostConfig> configs) {
  if (configs.empty()) throw ConfigError("evaluate_user needs at least one model configuration");
  std::vector<UserIdx> friends;
  for (auto f : data.graph().neighbors(index(user))) friends.push_back(UserIdx{f});

  std::vector<CheckIn> stream(data.history(user).begin(), data.history(user).end());
  for (auto f : friends) stream.insert(stream.end(), data.history(f).begin(), data.history(f).end());
  std::sort(stream.begin(), stream.end(), ByTime{});

  std::vector<SostModel> models;
  models.reserve(configs.size());
  for (const auto& c : configs) models.emplace_back(user, friends, c);

  std::vector<EventOutcome> out;
  std::set<std::uint32_t> seen;
  for (std::size_t k = 0; k < stream.size();) {
    const Seconds t = stream[k].timestamp;
    std::size_t end = k;
    while (end < stream.size() && stream[end].timestamp == t) ++end;
    bool target_here = false;
    for (std::size_t e = k; e < end; ++e) target_here = target_here || stream[e].user == user;
    if (target_here) {
      const auto& base = models.front();
      std::optional<VenueIdx> st;
      if (!base.individual().empty()) st = base.individual().predict(base.context(t)).ranked.front().first;
      std::vector<std::optional<VenueIdx>> preds;
      Branch branch = Branch::None;
      for (std::size_t m = 0; m < models.size(); ++m) {
        const auto p = models[m].predict(t);
        preds.push_back(p.venue);
        if (m == 0) branch = p.branch;
      }
      for (std::size_t e = k; e < end; ++e) {
        if (stream[e].user != user) continue;
        EventOutcome o;
        o.timestamp = t;
        o.actual = stream[e].venue;
        o.st = st;
        o.models = preds;
        o.branch = branch;
        o.new_venue = !seen.count(index(o.actual));
        o.in_situation = base.co_present(user, o.actual, t).size() >= 2;
        out.push_back(std::move(o));
      }
    }
    for (std::size_t e = k; e < end; ++e) {
      for (auto& m : models) m.observe(stream[e]);
      if (stream[e].user == user) seen.insert(index(stream[e].venue));
    }
    k = end;
  }
  return out;
}

namespace {

struct Variant {
  std::string name;
  SostConfig config;
};

std::vector<Variant> variants_for(const EvalConfig& cfg, double stay) {
  SostConfig main = cfg.sost;
  main.stay_hours = stay;
  std::vector<Variant> out{{"sost", main}};
  if (!cfg.ablations) return out;
  const ClassSet steps[] = {{true, false, false}, {true, true, false}, {true, true, true}};
  for (const auto& cs : steps) {
    auto c = main;
    c.classes = cs;
    out.push_back({"class_" + cs.label(), c});
  }
  auto nodrift = main;
  nodrift.drift = DriftKind::None;
  out.push_back({"no_drift", nodrift});
  auto other = main;
  other.estimator = main.estimator == EstimatorKind::B ? EstimatorKind::A : EstimatorKind::B;
  out.push_back({"estimator_" + to_string(other.estimator), other});
  return out;
}

bool hit(const std::optional<VenueIdx>& p, VenueIdx actual) { return p && *p == actual; }

}  // namespace

EvalReport evaluate(const Dataset& data, const EvalConfig& config) {
  const auto& users = data.active_users();
  if (users.empty()) throw NoData("no active users to evaluate");
  EvalReport report;
  report.stay_hours = config.estimate_stay ? estimate_stay_hours(data) : config.sost.stay_hours;
  const auto variants = variants_for(config, report.stay_hours);

  // Identical configurations share one model.
  std::vector<SostConfig> unique;
  std::vector<std::size_t> slot_of;
  for (const auto& v : variants) {
    const auto j = to_json(v.config);
    std::size_t s = 0;
    while (s < unique.size() && to_json(unique[s]) != j) ++s;
    if (s == unique.size()) unique.push_back(v.config);
    slot_of.push_back(s);
  }

  std::vector<std::vector<EventOutcome>> outcomes(users.size());
  parallel_for(users.size(), config.threads,
               [&](std::size_t k) { outcomes[k] = evaluate_user(data, users[k], unique); });

  const auto nv = variants.size();
  std::vector<std::size_t> hits(nv, 0);
  std::vector<std::vector<double>> user_acc(nv);
  std::vector<double> st_acc;
  std::array<double, 24> workday{}, weekend{};
  std::size_t new_visits = 0;
  double net = 0.0;
  double entropy_sum = 0.0, locations_sum = 0.0, vpl_sum = 0.0;

  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto u = users[k];
    const auto& evs = outcomes[k];
    const auto hist = data.history(u);
    UserRecord rec;
    rec.user = u;
    rec.events = evs.size();
    rec.degree = data.graph().degree(index(u));
    rec.entropy = user_entropy(hist);
    std::set<std::uint32_t> venues;
    for (const auto& c : hist) venues.insert(index(c.venue));
    rec.locations = venues.size();
    rec.visits_per_location = static_cast<double>(hist.size()) / static_cast<double>(rec.locations);

    std::vector<std::size_t> uh(nv, 0);
    std::size_t company = 0;
    for (const auto& e : evs) {
      const bool st = hit(e.st, e.actual);
      rec.st_hits += st;
      for (std::size_t v = 0; v < nv; ++v) uh[v] += hit(e.models[slot_of[v]], e.actual);
      const bool so = hit(e.models[slot_of[0]], e.actual);
      rec.sost_hits += so;
      const double diff = static_cast<double>(so) - static_cast<double>(st);
      if (diff != 0.0) {
        const auto tc = temporal_context(e.timestamp, config.sost.time);
        auto& bins = tc.day_class == DayClass::Weekend ? weekend : workday;
        bins[static_cast<std::size_t>(local_hour(e.timestamp, config.sost.time))] += diff;
        net += diff;
      }
      switch (e.branch) {
        case Branch::Main: ++report.main_branch; break;
        case Branch::Trend: ++report.trend_branch; break;
        case Branch::None: ++report.no_prediction; break;
      }
      new_visits += e.new_venue;
      company += e.in_situation;
    }
    // Distinct friends met at the user's check-ins.
    std::set<std::uint32_t> met;
    for (const auto& c : hist) {
      for (const auto& o : data.visits(c.venue)) {
        if (o.user != u && std::llabs(o.timestamp - c.timestamp) <= config.sost.situation_window &&
            data.graph().has_edge(index(u), index(o.user))) {
          met.insert(index(o.user));
        }
      }
    }
    rec.influencers = met.size();
    const double n = static_cast<double>(std::max<std::size_t>(evs.size(), 1));
    rec.situation_rate = static_cast<double>(company) / n;
    rec.improvement = (static_cast<double>(rec.sost_hits) - static_cast<double>(rec.st_hits)) / n;
    st_acc.push_back(static_cast<double>(rec.st_hits) / n);
    for (std::size_t v = 0; v < nv; ++v) {
      hits[v] += uh[v];
      user_acc[v].push_back(static_cast<double>(uh[v]) / n);
    }
    report.events += evs.size();
    report.st_hits += rec.st_hits;
    entropy_sum += rec.entropy;
    locations_sum += static_cast<double>(rec.locations);
    vpl_sum += rec.visits_per_location;
    report.per_user.push_back(rec);
  }

  report.users = users.size();
  const double events = static_cast<double>(std::max<std::size_t>(report.events, 1));
  report.accuracy_st = static_cast<double>(report.st_hits) / events;
  for (std::size_t v = 0; v < nv; ++v) {
    VariantResult r;
    r.name = variants[v].name;
    r.config = variants[v].config;
    r.hits = hits[v];
    r.accuracy = static_cast<double>(hits[v]) / events;
    r.gain = r.accuracy - report.accuracy_st;
    r.relative_gain = report.accuracy_st > 0.0 ? r.gain / report.accuracy_st : 0.0;
    if (users.size() >= 2) {
      try {
        r.test = welch_t_test(user_acc[v], st_acc);
      } catch (const DegenerateInput&) {
        r.test = {};
      }
    }
    report.variants.push_back(r);
  }
  report.accuracy_sost = report.variants.front().accuracy;
  report.improvement = report.variants.front().gain;
  report.relative_improvement = report.variants.front().relative_gain;
  report.significance = report.variants.front().test;
  if (net != 0.0) {
    for (std::size_t h = 0; h < 24; ++h) {
      report.hourly_workday[h] = workday[h] / net;
      report.hourly_weekend[h] = weekend[h] / net;
    }
  }
  const double nu = static_cast<double>(users.size());
  report.new_location_fraction = static_cast<double>(new_visits) / events;
  report.mean_entropy = entropy_sum / nu;
  report.mean_locations = locations_sum / nu;
  report.mean_visits_per_location = vpl_sum / nu;
  try {
    report.bounds = predictability_bounds(report.mean_entropy, report.mean_locations,
                                          report.new_location_fraction, report.mean_visits_per_location);
  } catch (const DegenerateInput&) {
    report.bounds.reset();
  }
  return report;
}

std::vector<Breakdown> improvement_breakdowns(std::span<const UserRecord> records) {
  if (records.size() < 3) throw DegenerateInput("breakdowns need at least three users");
  std::vector<double> imp;
  for (const auto& r : records) imp.push_back(r.improvement);
  const std::pair<const char*, double (*)(const UserRecord&)> dims[] = {
      {"degree", [](const UserRecord& r) { return static_cast<double>(r.degree); }},
      {"entropy", [](const UserRecord& r) { return r.entropy; }},
      {"locations", [](const UserRecord& r) { return static_cast<double>(r.locations); }},
      {"visits_per_location", [](const UserRecord& r) { return r.visits_per_location; }},
      {"situation_rate", [](const UserRecord& r) { return r.situation_rate; }},
      {"influencers", [](const UserRecord& r) { return static_cast<double>(r.influencers); }},
  };
  std::vector<Breakdown> out;
  for (const auto& [name, get] : dims) {
    std::vector<double> xs;
    for (const auto& r : records) xs.push_back(get(r));
    Breakdown b{name, {}};
    try {
      b.cell.r = pearson(xs, imp);
      const auto s = spearman(xs, imp);
      b.cell.rho = s.rho;
      b.cell.p_value = s.p_value;
    } catch (const DegenerateInput&) {
      b.cell = {std::nan(""), std::nan(""), std::nan(""), true};
    }
    out.push_back(b);
  }
  return out;
}

nlohmann::json to_json(const Bounds& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"fano", b.fano}, {"fano_clamped", b.fano_clamped}};
}

namespace {

nlohmann::json test_json(const TTest& t) {
  return {{"t", t.t}, {"dof", t.dof}, {"p_value", t.p_value}};
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : r.variants) {
    variants.push_back({{"name", v.name},
                        {"config", to_json(v.config)},
                        {"hits", v.hits},
                        {"accuracy", v.accuracy},
                        {"gain", v.gain},
                        {"relative_gain", v.relative_gain},
                        {"test", test_json(v.test)}});
  }
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : r.per_user) {
    users.push_back({{"user", index(u.user)},
                     {"events", u.events},
                     {"st_hits", u.st_hits},
                     {"sost_hits", u.sost_hits},
                     {"entropy", u.entropy},
                     {"locations", u.locations},
                     {"degree", u.degree},
                     {"visits_per_location", u.visits_per_location},
                     {"situation_rate", u.situation_rate},
                     {"influencers", u.influencers},
                     {"improvement", u.improvement}});
  }
  return {{"format", "mobsoc-eval"},
          {"version", 1},
          {"protocol", "prequential"},
          {"users", r.users},
          {"events", r.events},
          {"accuracy_st", r.accuracy_st},
          {"accuracy_sost", r.accuracy_sost},
          {"improvement", r.improvement},
          {"relative_improvement", r.relative_improvement},
          {"significance", test_json(r.significance)},
          {"variants", variants},
          {"hourly", {{"workday", r.hourly_workday}, {"weekend", r.hourly_weekend}}},
          {"branches", {{"main", r.main_branch}, {"trend", r.trend_branch}, {"none", r.no_prediction}}},
          {"new_location_fraction", r.new_location_fraction},
          {"mean_entropy", r.mean_entropy},
          {"mean_locations", r.mean_locations},
          {"mean_visits_per_location", r.mean_visits_per_location},
          {"bounds", r.bounds ? to_json(*r.bounds) : nlohmann::json()},
          {"stay_hours", r.stay_hours},
          {"per_user", users}};
}

void write_user_csv(std::ostream& out, std::span<const UserRecord> records) {
  out << "user,events,st_hits,sost_hits,entropy,locations,degree,visits_per_location,"
         "situation_rate,influencers,improvement\n";
  for (const auto& r : records) {
    out << index(r.user) << ',' << r.events << ',' << r.st_hits << ',' << r.sost_hits << ','
        << r.entropy << ',' << r.locations << ',' << r.degree << ',' << r.visits_per_location << ','
        << r.situation_rate << ',' << r.influencers << ',' << r.improvement << '\n';
  }
}

void write_hourly_csv(std::ostream& out, const EvalReport& r) {
  out << "hour,workday,weekend\n";
  for (std::size_t h = 0; h < 24; ++h) {
    out << h << ',' << r.hourly_workday[h] << ',' << r.hourly_weekend[h] << '\n';
  }
}

void write_breakdown_csv(std::ostream& out, std::span<const Breakdown> rows) {
  out << "dimension,r,rho,p_value\n";
  for (const auto& b : rows) {
    out << b.dimension << ',' << b.cell.r << ',' << b.cell.rho << ',' << b.cell.p_value << '\n';
  }
}

}  // namespace mobsoc
