#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobsoc/context_tree.hpp"
#include "mobsoc/types.hpp"

namespace mobsoc {

enum class DriftKind { None, Geometric, Exponential };
enum class EstimatorKind { A, B };

DriftKind parse_drift_kind(const std::string& name);
std::string to_string(DriftKind k);
EstimatorKind parse_estimator_kind(const std::string& name);
std::string to_string(EstimatorKind k);

/// Geometric: (1 - beta)^(elapsed / unit); exponential: exp(-beta * elapsed / unit);
/// None: 1. `unit_hours` is the average stay time. Throws ConfigError unless
/// 0 < beta < 1 and unit_hours > 0, or when elapsed is negative.
double drift_factor(DriftKind kind, double beta, Seconds elapsed, double unit_hours);

/// Class I: the target and at least one friend. Class II: two or more
/// friends without the target. Class III: one friend alone.
enum class InfluenceClass : std::uint8_t { I = 1, II = 2, III = 3 };

/// Class of a co-present user set seen from `target`; nullopt for the target
/// alone (not an influence factor).
std::optional<InfluenceClass> classify(const UserSet& users, UserIdx target);

struct ClassSet {
  bool one = true;
  bool two = true;
  bool three = true;

  bool enabled(InfluenceClass c) const;
  bool any() const { return one || two || three; }
  static ClassSet none() { return {false, false, false}; }
  std::string label() const;  // e.g. "I+II"
};

struct InfluenceRecord {
  UserSet users;
  Seconds last_seen = 0;
  double counter = 0.0;

  friend bool operator==(const InfluenceRecord&, const InfluenceRecord&) = default;
};

struct SostConfig {
  double beta = 0.05;
  DriftKind drift = DriftKind::Exponential;
  double stay_hours = 1.0;                   // drift time unit
  Seconds situation_window = kHour;          // co-presence window
  Seconds situation_horizon = 2 * kHour;     // how long a situation stays current
  std::size_t kappa = 3;
  EstimatorKind estimator = EstimatorKind::B;
  ClassSet classes;
  bool use_trend = true;          // fall back to the friends' trajectory tree
  bool evidence_when_alone = false;
  TimeConfig time;

  void validate() const;
};

nlohmann::json to_json(const SostConfig& c);
/// Throws ConfigError or SchemaError.
SostConfig sost_config_from_json(const nlohmann::json& j);
/// "I", "I+II", "I+II+III", "none", ...
ClassSet parse_classes(const std::string& s);

/// Online tie strengths of one target towards its friends: co-location
/// pair counts per venue, optionally weighted per venue, normalized over
/// all friends.
class TieStrengths {
 public:
  TieStrengths() = default;
  TieStrengths(UserIdx target, std::vector<UserIdx> friends,
               std::vector<double> venue_weights = {});

  void observe(const CheckIn& c);

  /// Normalized strength of a friend; 0 for everybody else and for every
  /// friend while no_overlap().
  double operator()(UserIdx u) const;
  bool no_overlap() const { return total_ == 0.0; }
  /// Strength used for similarity: like operator() but friends share 1/|N|
  /// while no_overlap().
  double weight_of(UserIdx u) const;
  const std::vector<UserIdx>& friends() const { return friends_; }

 private:
  std::optional<std::size_t> slot(UserIdx u) const;
  double weight(VenueIdx v) const;

  UserIdx target_{};
  std::vector<UserIdx> friends_;  // sorted
  std::vector<double> venue_weights_;
  std::map<std::uint32_t, double> target_visits_;
  std::map<std::uint32_t, std::vector<double>> friend_visits_;  // venue -> per friend
  std::vector<double> col_;
  double total_ = 0.0;
};

/// Tie strengths over complete histories. Check-ins of users other than
/// the target and its friends are ignored.
TieStrengths tie_strengths(UserIdx target, std::span<const UserIdx> friends,
                           std::span<const CheckIn> checkins,
                           std::vector<double> venue_weights = {});

/// Tie-weighted Jaccard similarity of two user sets.
template <class Ties>
double influence_jaccard(const UserSet& a, const UserSet& b, const Ties& ties) {
  double inter = 0.0, uni = 0.0;
  std::size_t x = 0, y = 0;
  while (x < a.size() || y < b.size()) {
    if (y == b.size() || (x < a.size() && a[x] < b[y])) {
      uni += ties(a[x++]);
    } else if (x == a.size() || b[y] < a[x]) {
      uni += ties(b[y++]);
    } else {
      const double t = ties(a[x]);
      inter += t;
      uni += t;
      ++x;
      ++y;
    }
  }
  return uni > 0.0 ? inter / uni : 0.0;
}

struct SocialNode {
  std::vector<InfluenceRecord> records;  // sorted by users
};

enum class Branch { Main, Trend, None };
std::string to_string(Branch b);

struct SostPrediction {
  std::optional<VenueIdx> venue;
  Branch branch = Branch::None;
  bool social_evidence = false;  // a social factor other than 1 was applied
  double probability = 0.0;      // combined probability of the main argmax
  double escape = 1.0;           // escape mass of the individual model
  std::optional<UserSet> situation;
};

/// Socio-spatial-temporal model of one target user. Feed every check-in of
/// the target and its friends through observe() in time order; predict(t)
/// is only allowed once every observed event lies strictly before t.
class SostModel {
 public:
  SostModel(UserIdx target, std::vector<UserIdx> friends, SostConfig config = {},
            std::vector<double> venue_weights = {});

  UserIdx target() const { return target_; }
  const SostConfig& config() const { return config_; }
  const ContextTree& individual() const { return st_; }
  const ContextTree& trend() const { return trend_; }
  const TieStrengths& ties() const { return ties_; }

  void observe(const CheckIn& c);

  /// Co-present set for a check-in of `user` at (venue, t): the user plus
  /// target and friends seen at the venue within [t - window, t).
  UserSet co_present(UserIdx user, VenueIdx venue, Seconds t) const;

  /// Adds or reinforces the record of `users` at (q, temporal context of t)
  /// on every level of the path.
  void record(const UserSet& users, VenueIdx q, Seconds t);

  /// The target's current social situation at time t, if any.
  std::optional<UserSet> situation(Seconds t) const;

  /// Sum of decayed counters times Jaccard similarity with `now`.
  double effective_counter(const UserSet& now, std::span<const Label> node_path, Seconds t) const;

  /// P(q | now, temporal context of t) under the configured estimator.
  double social_prob(VenueIdx q, const UserSet& now, Seconds t) const;

  /// Context of the target's next check-in at t.
  ContextKey context(Seconds t) const;

  /// Throws IntegrityError when an observed event is at or after t.
  SostPrediction predict(Seconds t) const;

  /// Records stored at a (venue, temporal...) path; empty when absent.
  std::vector<InfluenceRecord> records(std::span<const Label> node_path) const;

  /// Venues with a node in the social tree, ascending.
  std::vector<VenueIdx> social_venues() const;

  nlohmann::json to_json() const;
  /// Rebuilds by replaying the stored events; throws SchemaError when the
  /// rebuilt social tree differs from the dumped one.
  static SostModel from_json(const nlohmann::json& j);

 private:
  using SocialTree = LabelTree<SocialNode>;

  std::vector<Label> social_path(VenueIdx q, const TemporalContext& t) const;
  double node_effective(const SocialNode& node, const UserSet& now, Seconds t) const;
  double node_raw(const SocialNode& node) const;
  std::optional<UserSet> evidence_set(Seconds t) const;
  // memo caches effective counters per social node during one prediction.
  double social_prob_impl(VenueIdx q, const UserSet& now, Seconds t,
                          std::vector<double>& memo) const;

  UserIdx target_;
  std::vector<UserIdx> friends_;  // sorted
  SostConfig config_;
  std::vector<double> venue_weights_;
  TieStrengths ties_;
  ContextTree st_;
  ContextTree trend_;
  SocialTree social_;
  std::vector<CheckIn> log_;  // everything observed, time-ordered
  std::vector<CheckIn> own_;  // target's check-ins
  std::map<std::uint32_t, std::vector<VenueIdx>> recent_;  // friend -> last venues
};

}  // namespace mobsoc
