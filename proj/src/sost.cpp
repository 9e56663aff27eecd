#include "mobsoc/sost.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mobsoc/error.hpp"

namespace mobsoc {

DriftKind parse_drift_kind(const std::string& name) {
  if (name == "none") return DriftKind::None;
  if (name == "geometric" || name == "psi1") return DriftKind::Geometric;
  if (name == "exponential" || name == "psi2") return DriftKind::Exponential;
  throw ConfigError("unknown drift kind '" + name + "'");
}

std::string to_string(DriftKind k) {
  switch (k) {
    case DriftKind::None: return "none";
    case DriftKind::Geometric: return "geometric";
    case DriftKind::Exponential: return "exponential";
  }
  return "none";
}

EstimatorKind parse_estimator_kind(const std::string& name) {
  if (name == "A" || name == "a") return EstimatorKind::A;
  if (name == "B" || name == "b") return EstimatorKind::B;
  throw ConfigError("unknown estimator '" + name + "'");
}

std::string to_string(EstimatorKind k) { return k == EstimatorKind::A ? "A" : "B"; }

std::string to_string(Branch b) {
  switch (b) {
    case Branch::Main: return "main";
    case Branch::Trend: return "trend";
    case Branch::None: return "none";
  }
  return "none";
}

double drift_factor(DriftKind kind, double beta, Seconds elapsed, double unit_hours) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(unit_hours > 0.0)) throw ConfigError("drift unit must be positive");
  if (elapsed < 0) throw ConfigError("drift evaluated before the last occurrence");
  const double units = static_cast<double>(elapsed) / (unit_hours * kHour);
  switch (kind) {
    case DriftKind::None: return 1.0;
    case DriftKind::Geometric: return std::pow(1.0 - beta, units);
    case DriftKind::Exponential: return std::exp(-beta * units);
  }
  return 1.0;
}

std::optional<InfluenceClass> classify(const UserSet& users, UserIdx target) {
  if (users.empty()) return std::nullopt;
  const bool has_target = contains(users, target);
  if (users.size() == 1) {
    if (has_target) return std::nullopt;
    return InfluenceClass::III;
  }
  return has_target ? InfluenceClass::I : InfluenceClass::II;
}

bool ClassSet::enabled(InfluenceClass c) const {
  switch (c) {
    case InfluenceClass::I: return one;
    case InfluenceClass::II: return two;
    case InfluenceClass::III: return three;
  }
  return false;
}

std::string ClassSet::label() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(one, "I");
  add(two, "II");
  add(three, "III");
  return out.empty() ? "none" : out;
}

void SostConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(stay_hours > 0.0)) throw ConfigError("stay_hours must be positive");
  if (situation_window <= 0) throw ConfigError("situation window must be positive");
  if (situation_horizon < 0) throw ConfigError("situation horizon must be non-negative");
  if (!(time.slot_hours > 0.0 && time.slot_hours <= 24.0)) throw ConfigError("slot_hours must lie in (0, 24]");
}

// ---------------------------------------------------------------- ties

TieStrengths::TieStrengths(UserIdx target, std::vector<UserIdx> friends,
                           std::vector<double> venue_weights)
    : target_(target), friends_(make_user_set(std::move(friends))),
      venue_weights_(std::move(venue_weights)), col_(friends_.size(), 0.0) {
  if (contains(friends_, target_)) throw IntegrityError("target listed among its own friends");
}

std::optional<std::size_t> TieStrengths::slot(UserIdx u) const {
  const auto it = std::lower_bound(friends_.begin(), friends_.end(), u);
  if (it == friends_.end() || *it != u) return std::nullopt;
  return static_cast<std::size_t>(it - friends_.begin());
}

double TieStrengths::weight(VenueIdx v) const {
  return index(v) < venue_weights_.size() ? venue_weights_[index(v)] : 1.0;
}

void TieStrengths::observe(const CheckIn& c) {
  const auto v = index(c.venue);
  const double w = weight(c.venue);
  if (c.user == target_) {
    target_visits_[v] += 1.0;
    const auto it = friend_visits_.find(v);
    if (it == friend_visits_.end()) return;
    for (std::size_t k = 0; k < friends_.size(); ++k) {
      const double add = w * it->second[k];
      col_[k] += add;
      total_ += add;
    }
    return;
  }
  const auto k = slot(c.user);
  if (!k) return;
  auto& per = friend_visits_[v];
  per.resize(friends_.size(), 0.0);
  per[*k] += 1.0;
  const auto t = target_visits_.find(v);
  if (t == target_visits_.end()) return;
  const double add = w * t->second;
  col_[*k] += add;
  total_ += add;
}

double TieStrengths::operator()(UserIdx u) const {
  const auto k = slot(u);
  if (!k || total_ == 0.0) return 0.0;
  return col_[*k] / total_;
}

double TieStrengths::weight_of(UserIdx u) const {
  const auto k = slot(u);
  if (!k) return 0.0;
  if (total_ == 0.0) return 1.0 / static_cast<double>(friends_.size());
  return col_[*k] / total_;
}

TieStrengths tie_strengths(UserIdx target, std::span<const UserIdx> friends,
                           std::span<const CheckIn> checkins,
                           std::vector<double> venue_weights) {
  TieStrengths t(target, {friends.begin(), friends.end()}, std::move(venue_weights));
  for (const auto& c : checkins) t.observe(c);
  return t;
}

// ---------------------------------------------------------------- model

SostModel::SostModel(UserIdx target, std::vector<UserIdx> friends, SostConfig config,
                     std::vector<double> venue_weights)
    : target_(target), friends_(make_user_set(std::move(friends))), config_(config),
      venue_weights_(std::move(venue_weights)), ties_(target, friends_, venue_weights_),
      st_(config.kappa), trend_(config.kappa) {
  config_.validate();
}

std::vector<Label> SostModel::social_path(VenueIdx q, const TemporalContext& t) const {
  std::vector<Label> path{Label::venue(q)};
  for (const auto& l : temporal_path(t)) path.push_back(l);
  return path;
}

UserSet SostModel::co_present(UserIdx user, VenueIdx venue, Seconds t) const {
  std::vector<UserIdx> users{user};
  const Seconds from = t - config_.situation_window;
  for (auto it = log_.rbegin(); it != log_.rend() && it->timestamp >= from; ++it) {
    if (it->timestamp < t && it->venue == venue && it->user != user) users.push_back(it->user);
  }
  return make_user_set(std::move(users));
}

void SostModel::record(const UserSet& users, VenueIdx q, Seconds t) {
  const auto path = social_path(q, temporal_context(t, config_.time));
  const auto chain = social_.insert_path(path);
  for (std::size_t k = 1; k < chain.size(); ++k) {
    auto& recs = social_.node(chain[k]).data.records;
    auto it = std::lower_bound(recs.begin(), recs.end(), users,
                               [](const InfluenceRecord& r, const UserSet& u) { return r.users < u; });
    if (it != recs.end() && it->users == users) {
      if (config_.drift == DriftKind::None) {
        it->counter += 1.0;
      } else {
        it->counter *= drift_factor(config_.drift, config_.beta, t - it->last_seen, config_.stay_hours) + 1.0;
      }
      it->last_seen = t;
    } else {
      recs.insert(it, InfluenceRecord{users, t, 1.0});
    }
  }
}

void SostModel::observe(const CheckIn& c) {
  if (!log_.empty() && c.timestamp < log_.back().timestamp) {
    throw IntegrityError("check-ins must be observed in time order");
  }
  const bool is_target = c.user == target_;
  if (!is_target && !contains(friends_, c.user)) {
    throw IntegrityError("check-in of a user outside the target's circle");
  }
  const auto users = co_present(c.user, c.venue, c.timestamp);
  if (const auto cls = classify(users, target_); cls && config_.classes.enabled(*cls)) {
    record(users, c.venue, c.timestamp);
  }
  ties_.observe(c);
  if (is_target) {
    st_.add(make_context(own_, c.timestamp, config_.time, config_.kappa), c.venue);
    own_.push_back(c);
  } else if (config_.use_trend) {
    auto& recent = recent_[index(c.user)];
    trend_.add(ContextKey{recent, temporal_context(c.timestamp, config_.time)}, c.venue);
    recent.push_back(c.venue);
    if (recent.size() > config_.kappa) recent.erase(recent.begin());
  }
  log_.push_back(c);
}

std::optional<UserSet> SostModel::situation(Seconds t) const {
  auto it = std::partition_point(own_.begin(), own_.end(),
                                 [t](const CheckIn& c) { return c.timestamp < t; });
  if (it == own_.begin()) return std::nullopt;
  const auto& last = *std::prev(it);
  if (t - last.timestamp > config_.situation_horizon) return std::nullopt;
  std::vector<UserIdx> users{target_};
  const Seconds w = config_.situation_window;
  for (auto c = log_.rbegin(); c != log_.rend() && c->timestamp >= last.timestamp - w; ++c) {
    if (c->timestamp >= t || c->timestamp > last.timestamp + w) continue;
    if (c->venue == last.venue && c->user != target_) users.push_back(c->user);
  }
  auto set = make_user_set(std::move(users));
  if (set.size() < 2) return std::nullopt;
  return set;
}

std::optional<UserSet> SostModel::evidence_set(Seconds t) const {
  if (auto s = situation(t)) return s;
  if (!config_.evidence_when_alone || friends_.empty()) return std::nullopt;
  auto all = friends_;
  all.push_back(target_);
  return make_user_set(std::move(all));
}

double SostModel::node_effective(const SocialNode& node, const UserSet& now, Seconds t) const {
  const auto ties = [this](UserIdx u) { return ties_.weight_of(u); };
  double e = 0.0;
  for (const auto& r : node.records) {
    const double decay = config_.drift == DriftKind::None
                             ? 1.0
                             : drift_factor(config_.drift, config_.beta, t - r.last_seen, config_.stay_hours);
    e += r.counter * decay * influence_jaccard(now, r.users, ties);
  }
  return e;
}

double SostModel::node_raw(const SocialNode& node) const {
  double s = 0.0;
  for (const auto& r : node.records) s += r.counter;
  return s;
}

double SostModel::effective_counter(const UserSet& now, std::span<const Label> node_path,
                                    Seconds t) const {
  const auto chain = social_.chain(node_path);
  if (chain.size() != node_path.size() + 1 || chain.size() == 1) return 0.0;
  return node_effective(social_.node(chain.back()).data, now, t);
}

double SostModel::social_prob_impl(VenueIdx q, const UserSet& now, Seconds t,
                                   std::vector<double>& memo) const {
  const auto eff = [&](SocialTree::NodeId n) {
    if (std::isnan(memo[n])) memo[n] = node_effective(social_.node(n).data, now, t);
    return memo[n];
  };
  const auto chain = social_.chain(social_path(q, temporal_context(t, config_.time)));
  // Most specific temporal refinement that carries evidence for this
  // situation.
  std::size_t depth = 0;
  for (std::size_t k = chain.size(); k-- > 1;) {
    if (eff(chain[k]) > 0.0) {
      depth = k;
      break;
    }
  }
  if (depth == 0) return 0.0;
  const double e = eff(chain[depth]);
  if (config_.estimator == EstimatorKind::B) return e / node_raw(social_.node(chain[depth]).data);
  double sigma = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < depth; ++k) {
    for (const auto& [label, child] : social_.node(chain[k]).children) {
      sigma += 1.0;
      mass += eff(child);
    }
  }
  return e / (sigma + mass);
}

double SostModel::social_prob(VenueIdx q, const UserSet& now, Seconds t) const {
  std::vector<double> memo(social_.size(), std::nan(""));
  return social_prob_impl(q, now, t, memo);
}

ContextKey SostModel::context(Seconds t) const {
  const auto it = std::partition_point(own_.begin(), own_.end(),
                                       [t](const CheckIn& c) { return c.timestamp < t; });
  return make_context(std::span(own_.begin(), it), t, config_.time, config_.kappa);
}

std::vector<VenueIdx> SostModel::social_venues() const {
  std::vector<VenueIdx> out;
  for (const auto& [label, child] : social_.node(SocialTree::root()).children) {
    if (label.kind == Label::Kind::Venue) out.push_back(VenueIdx{label.value});
  }
  return out;
}

std::vector<InfluenceRecord> SostModel::records(std::span<const Label> node_path) const {
  const auto chain = social_.chain(node_path);
  if (chain.size() != node_path.size() + 1 || chain.size() == 1) return {};
  return social_.node(chain.back()).data.records;
}

SostPrediction SostModel::predict(Seconds t) const {
  if (!log_.empty() && log_.back().timestamp >= t) {
    throw IntegrityError("prediction at or before an observed check-in");
  }
  SostPrediction out;
  const auto ctx = context(t);
  const bool trend_ready = config_.use_trend && !trend_.empty();
  if (st_.empty()) {
    if (trend_ready) {
      out.venue = trend_.predict(ctx).ranked.front().first;
      out.branch = Branch::Trend;
    }
    return out;
  }
  const auto own = st_.alphabet();
  const auto social = social_venues();
  std::vector<VenueIdx> candidates;
  std::set_union(own.begin(), own.end(), social.begin(), social.end(),
                 std::back_inserter(candidates));

  auto combined = st_.probs(candidates, ctx, candidates.size());
  // Venues outside the target's history compete only on social evidence.
  std::vector<char> eligible(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    eligible[k] = std::binary_search(own.begin(), own.end(), candidates[k]);
  }
  if (config_.classes.any()) {
    out.situation = evidence_set(t);
    if (out.situation) {
      std::vector<double> memo(social_.size(), std::nan(""));
      std::vector<double> factor(candidates.size());
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        factor[k] = social_prob_impl(candidates[k], *out.situation, t, memo);
        out.social_evidence = out.social_evidence || factor[k] > 0.0;
      }
      if (out.social_evidence) {
        for (std::size_t k = 0; k < candidates.size(); ++k) {
          combined[k] *= factor[k];
          eligible[k] = eligible[k] || factor[k] > 0.0;
        }
      }
    }
  }
  std::size_t best = candidates.size();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (eligible[k] && (best == candidates.size() || combined[k] > combined[best])) best = k;
  }
  out.escape = st_.escape_to_root(ctx);
  out.probability = combined[best];
  out.venue = candidates[best];
  out.branch = Branch::Main;
  if (combined[best] <= out.escape && trend_ready) {
    // The trend tree is held to the same test: it must name a location
    // with more mass than its own escape.
    const auto alt = trend_.predict(ctx);
    if (alt.matched_depth > 0 && alt.ranked.front().second > alt.escape_to_root) {
      out.venue = alt.ranked.front().first;
      out.branch = Branch::Trend;
    }
  }
  return out;
}

// ---------------------------------------------------------------- json

namespace {

std::string exact(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

nlohmann::json to_json(const SostConfig& c) {
  return {{"beta", c.beta},
          {"drift", to_string(c.drift)},
          {"stay_hours", c.stay_hours},
          {"situation_window", c.situation_window},
          {"situation_horizon", c.situation_horizon},
          {"kappa", c.kappa},
          {"estimator", to_string(c.estimator)},
          {"classes", c.classes.label()},
          {"use_trend", c.use_trend},
          {"evidence_when_alone", c.evidence_when_alone},
          {"utc_offset", c.time.utc_offset},
          {"slot_hours", c.time.slot_hours}};
}

ClassSet parse_classes(const std::string& s) {
  ClassSet c = ClassSet::none();
  if (s == "none") return c;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find('+', start), s.size());
    const auto part = s.substr(start, end - start);
    if (part == "I") {
      c.one = true;
    } else if (part == "II") {
      c.two = true;
    } else if (part == "III") {
      c.three = true;
    } else {
      throw ConfigError("unknown influence class '" + part + "'");
    }
    start = end + 1;
  }
  return c;
}

SostConfig sost_config_from_json(const nlohmann::json& j) {
  try {
    SostConfig c;
    c.beta = j.at("beta").get<double>();
    c.drift = parse_drift_kind(j.at("drift").get<std::string>());
    c.stay_hours = j.at("stay_hours").get<double>();
    c.situation_window = j.at("situation_window").get<Seconds>();
    c.situation_horizon = j.at("situation_horizon").get<Seconds>();
    c.kappa = j.at("kappa").get<std::size_t>();
    c.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
    c.classes = parse_classes(j.at("classes").get<std::string>());
    c.use_trend = j.at("use_trend").get<bool>();
    c.evidence_when_alone = j.at("evidence_when_alone").get<bool>();
    c.time.utc_offset = j.at("utc_offset").get<Seconds>();
    c.time.slot_hours = j.at("slot_hours").get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("social model config: ") + e.what());
  }
}

nlohmann::json SostModel::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t n = 0; n < social_.size(); ++n) {
    const auto& node = social_.node(static_cast<SocialTree::NodeId>(n));
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : node.data.records) {
      nlohmann::json users = nlohmann::json::array();
      for (auto u : r.users) users.push_back(index(u));
      recs.push_back({{"users", users}, {"last_seen", r.last_seen}, {"counter", exact(r.counter)}});
    }
    nodes.push_back({{"kind", static_cast<int>(node.label.kind)},
                     {"value", node.label.value},
                     {"parent", node.parent},
                     {"records", recs}});
  }
  nlohmann::json friends = nlohmann::json::array();
  for (auto f : friends_) friends.push_back(index(f));
  nlohmann::json events = nlohmann::json::array();
  for (const auto& c : log_) {
    events.push_back({index(c.user), index(c.venue), c.timestamp, exact(c.lat), exact(c.lon)});
  }
  return {{"format", "mobsoc-sost"},
          {"version", 1},
          {"target", index(target_)},
          {"friends", friends},
          {"config", mobsoc::to_json(config_)},
          {"venue_weights", venue_weights_},
          {"individual", st_.to_json()},
          {"trend", trend_.to_json()},
          {"social_nodes", nodes},
          {"events", events}};
}

SostModel SostModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "mobsoc-sost" || j.at("version") != 1) {
      throw SchemaError("not a social model document");
    }
    std::vector<UserIdx> friends;
    for (const auto& f : j.at("friends")) friends.push_back(UserIdx{f.get<std::uint32_t>()});
    SostModel m(UserIdx{j.at("target").get<std::uint32_t>()}, std::move(friends),
                sost_config_from_json(j.at("config")), j.at("venue_weights").get<std::vector<double>>());
    for (const auto& e : j.at("events")) {
      const auto lat = e.at(3).get<std::string>();
      const auto lon = e.at(4).get<std::string>();
      CheckIn c{UserIdx{e.at(0).get<std::uint32_t>()}, VenueIdx{e.at(1).get<std::uint32_t>()},
                e.at(2).get<Seconds>(), 0.0, 0.0};
      std::from_chars(lat.data(), lat.data() + lat.size(), c.lat);
      std::from_chars(lon.data(), lon.data() + lon.size(), c.lon);
      m.observe(c);
    }
    const auto again = m.to_json();
    if (again.at("social_nodes") != j.at("social_nodes") ||
        again.at("individual") != j.at("individual") || again.at("trend") != j.at("trend")) {
      throw SchemaError("social model dump is inconsistent with its event log");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("social model: ") + e.what());
  }
}

}  // namespace mobsoc
