#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobsoc/correlation.hpp"
#include "mobsoc/dataset.hpp"
#include "mobsoc/sost.hpp"

namespace mobsoc {

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  double fano = 0.0;
  bool fano_clamped = false;  // entropy above ln N, fano set to 1/N
};

/// Predictability limits from mean entropy `entropy` (nats), number of
/// locations `locations`, fraction of visits to new locations
/// `new_fraction` and mean visits per location `visits`:
///   lower = exp(-H)
///   upper = (x - 1) / x * (1 - f) where f + x (1 - f) = v
///   fano  = P solving H = H_b(P) + (1 - P) ln(N - 1)
/// Throws DegenerateInput unless H >= 0, N >= 2, 0 <= f < 1 and v > 1.
Bounds predictability_bounds(double entropy, double locations, double new_fraction, double visits);

struct EvalConfig {
  SostConfig sost;
  bool estimate_stay = true;  // drift unit from the data instead of sost.stay_hours
  bool ablations = true;      // class-cumulative, no-drift and estimator variants
  std::size_t threads = 0;    // 0: all cores
};

/// Outcome of one target check-in.
struct EventOutcome {
  Seconds timestamp = 0;
  VenueIdx actual{};
  std::optional<VenueIdx> st;
  std::vector<std::optional<VenueIdx>> models;  // one per evaluated config
  Branch branch = Branch::None;                 // branch of the first config
  bool new_venue = false;
  bool in_situation = false;  // a friend was at the venue within the window
};

/// Prequential run for one user: every check-in is predicted from the
/// events strictly before its timestamp, then all events at that timestamp
/// are learned. Check-ins of the user's friends feed the social models.
std::vector<EventOutcome> evaluate_user(const Dataset& data, UserIdx user,
                                        std::span<const SostConfig> configs);

struct VariantResult {
  std::string name;
  SostConfig config;
  std::size_t hits = 0;
  double accuracy = 0.0;
  double gain = 0.0;           // absolute, against the individual model
  double relative_gain = 0.0;  // gain / individual accuracy
  TTest test;                  // per-user accuracies against the individual model
};

struct UserRecord {
  UserIdx user{};
  std::size_t events = 0;
  std::size_t st_hits = 0;
  std::size_t sost_hits = 0;
  double entropy = 0.0;
  std::size_t locations = 0;
  std::size_t degree = 0;
  double visits_per_location = 0.0;
  double situation_rate = 0.0;  // share of check-ins made in company
  std::size_t influencers = 0;  // distinct friends met at check-ins
  double improvement = 0.0;     // sost accuracy minus individual accuracy
};

struct EvalReport {
  std::size_t users = 0;
  std::size_t events = 0;
  std::size_t st_hits = 0;
  double accuracy_st = 0.0;
  double accuracy_sost = 0.0;
  double improvement = 0.0;
  double relative_improvement = 0.0;
  TTest significance;
  std::vector<VariantResult> variants;  // first entry: the configured model
  std::array<double, 24> hourly_workday{};  // share of the net improvement
  std::array<double, 24> hourly_weekend{};
  std::size_t main_branch = 0;
  std::size_t trend_branch = 0;
  std::size_t no_prediction = 0;
  double new_location_fraction = 0.0;
  double mean_entropy = 0.0;
  double mean_locations = 0.0;
  double mean_visits_per_location = 0.0;
  std::optional<Bounds> bounds;
  std::vector<UserRecord> per_user;
  double stay_hours = 1.0;
};

/// Evaluates every active user. Throws NoData when there is none.
EvalReport evaluate(const Dataset& data, const EvalConfig& config = {});

struct Breakdown {
  std::string dimension;
  CorrelationCell cell;
};

/// Correlation of per-user improvement with degree, entropy, number of
/// locations, visits per location, situation rate and influencer count.
/// Throws DegenerateInput below three users.
std::vector<Breakdown> improvement_breakdowns(std::span<const UserRecord> records);

nlohmann::json to_json(const Bounds& b);
nlohmann::json to_json(const EvalReport& r);
void write_user_csv(std::ostream& out, std::span<const UserRecord> records);
void write_hourly_csv(std::ostream& out, const EvalReport& r);
void write_breakdown_csv(std::ostream& out, std::span<const Breakdown> rows);

}  // namespace mobsoc
