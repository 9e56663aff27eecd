#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobsoc/dataset.hpp"
#include "mobsoc/types.hpp"

namespace mobsoc {

struct GenConfig {
  std::size_t n_users = 200;
  std::size_t n_venues = 2000;
  int days = 60;
  std::uint64_t seed = 1;
  Seconds start = 1609747200;  // 2021-01-04 08:00 UTC, local midnight on a Monday

  // Friendship structure: planted groups that are near-complete 2-plexes.
  std::size_t group_min = 4;
  std::size_t group_max = 8;
  double rewiring = 0.05;       // share of group ties moved outside the group
  double cross_ties = 2.0;      // mean extra random ties per user

  // Individual routine: first-order Markov chain over personal venues.
  std::size_t personal_min = 5;
  std::size_t personal_max = 10;
  std::size_t routine_min = 3;  // routine check-ins per day
  std::size_t routine_max = 5;
  double routine_bias = 0.75;   // probability of the habitual next venue
  double skip = 0.1;            // chance to skip a routine check-in

  // Social influence.
  double p_follow = 0.5;               // per user and day
  Seconds follow_window = 24 * kHour;  // how far back a followed visit may lie
  double p_cositu = 0.8;               // per group and day: a group outing
  double p_join = 0.8;                 // per member and outing
  std::size_t group_venues = 6;
  std::size_t outing_stops = 4;
  Seconds arrival_spread = 40 * 60;
  double p_recommend = 0.5;  // per outing: last stop tried alone by one participant

  // General trend: weekly popular venues.
  double p_trend = 0.05;  // per user and day
  std::size_t trend_venues = 2;

  TimeConfig time;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

struct InfluenceEvent {
  std::string user;
  std::string venue;
  Seconds timestamp = 0;
  std::string kind;  // "situation", "recommendation", "follow" or "trend"
  std::vector<std::string> influencers;
};

struct PlantedSituation {
  std::vector<std::string> participants;
  std::string venue;
  Seconds start = 0;
  Seconds end = 0;
};

struct GroundTruth {
  std::vector<std::vector<std::string>> groups;
  std::vector<InfluenceEvent> influence;
  std::vector<PlantedSituation> situations;
};

struct Synthetic {
  std::vector<CheckInRow> rows;  // sorted by (timestamp, user, venue)
  std::vector<EdgeRow> edges;
  GroundTruth truth;
};

/// Deterministic corpus for a configuration; identical seeds give identical
/// output.
Synthetic generate(const GenConfig& config);

nlohmann::json to_json(const GroundTruth& truth);

/// Writes checkins.csv, edges.csv and ground_truth.json into `dir`.
void save_synthetic(const Synthetic& data, const std::filesystem::path& dir);

}  // namespace mobsoc
