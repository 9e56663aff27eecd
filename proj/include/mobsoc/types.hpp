#pragma once

#include <algorithm>
#include <tuple>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mobsoc {

/// Absolute time in integer seconds UTC.
using Seconds = std::int64_t;

inline constexpr Seconds kHour = 3600;
inline constexpr Seconds kDay = 24 * kHour;
inline constexpr Seconds kWeek = 7 * kDay;

enum class UserIdx : std::uint32_t {};
enum class VenueIdx : std::uint32_t {};

constexpr std::uint32_t index(UserIdx u) { return static_cast<std::uint32_t>(u); }
constexpr std::uint32_t index(VenueIdx v) { return static_cast<std::uint32_t>(v); }

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct CheckIn {
  UserIdx user{};
  VenueIdx venue{};
  Seconds timestamp = 0;
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

/// Orders check-ins by (timestamp, user, venue).
struct ByTime {
  bool operator()(const CheckIn& a, const CheckIn& b) const {
    return std::tie(a.timestamp, a.user, a.venue) <
           std::tie(b.timestamp, b.user, b.venue);
  }
};

struct Venue {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  std::size_t population = 0;  // distinct visiting users
  double entropy = 0.0;        // nats, over the visiting-user distribution
  std::size_t density = 0;     // other venues within the density radius
};

/// Sorted, duplicate-free member list. Used as the canonical key for
/// co-present user sets everywhere.
using UserSet = std::vector<UserIdx>;

inline UserSet make_user_set(std::vector<UserIdx> users) {
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  return users;
}

inline bool contains(const UserSet& set, UserIdx u) {
  return std::binary_search(set.begin(), set.end(), u);
}

/// Undirected simple graph over dense node indices. Immutable after
/// construction; adjacency lists are sorted.
class SocialGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  SocialGraph() = default;
  /// Duplicate edges are ignored. Throws IntegrityError on self-loops or
  /// out-of-range endpoints.
  SocialGraph(std::size_t num_nodes, std::span<const Edge> edges);

  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t num_edges() const { return num_edges_; }

  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return adj_[v];
  }
  std::size_t degree(std::uint32_t v) const { return adj_[v].size(); }
  bool has_edge(std::uint32_t a, std::uint32_t b) const {
    const auto& n = adj_[a];
    return std::binary_search(n.begin(), n.end(), b);
  }
  bool has_node(std::uint32_t v) const { return v < adj_.size(); }

  /// Edge list with a < b, sorted.
  std::vector<Edge> edges() const;

 private:
  std::vector<std::vector<std::uint32_t>> adj_;
  std::size_t num_edges_ = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

enum class DayClass : std::uint8_t { Workday = 0, Weekend = 1 };

/// Temporal features of a visit: workday/weekend, day of week (0 = Sunday)
/// and time slot of the day.
struct TemporalContext {
  DayClass day_class = DayClass::Workday;
  std::uint8_t day_of_week = 0;
  std::uint16_t slot = 0;

  friend bool operator==(const TemporalContext&,
                         const TemporalContext&) = default;
};

struct TimeConfig {
  Seconds utc_offset = -8 * kHour;  // San Francisco standard time
  double slot_hours = 1.0;

  int num_slots() const;
};

TemporalContext temporal_context(Seconds t, const TimeConfig& cfg);

/// Local hour of day in [0, 24).
int local_hour(Seconds t, const TimeConfig& cfg);

struct SocialSituation {
  UserSet participants;
  VenueIdx venue{};
  Seconds window_start = 0;
  Seconds window_end = 0;

  friend bool operator==(const SocialSituation&,
                         const SocialSituation&) = default;
};

}  // namespace mobsoc
