#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobsoc/types.hpp"

namespace mobsoc {

struct DatasetConfig {
  std::size_t activity_threshold = 50;
  double density_radius_m = 200.0;
  TimeConfig time;
};

/// A check-in row with opaque string identifiers, as read from disk.
struct CheckInRow {
  std::string user_id;
  std::string venue_id;
  Seconds timestamp = 0;
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const CheckInRow&, const CheckInRow&) = default;
};

using EdgeRow = std::pair<std::string, std::string>;

/// Check-in corpus plus friendship graph. User and venue indices follow the
/// lexicographic order of their string identifiers.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<CheckInRow> rows, std::vector<EdgeRow> edges,
          const DatasetConfig& config = {});

  const std::vector<CheckIn>& checkins() const { return checkins_; }
  const std::vector<Venue>& venues() const { return venues_; }
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const SocialGraph& graph() const { return graph_; }
  const std::vector<UserIdx>& active_users() const { return active_; }
  const DatasetConfig& config() const { return config_; }

  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_venues() const { return venues_.size(); }

  /// Time-ordered check-ins of one user.
  std::span<const CheckIn> history(UserIdx u) const { return by_user_[index(u)]; }
  /// Time-ordered check-ins at one venue.
  std::span<const CheckIn> visits(VenueIdx v) const { return by_venue_[index(v)]; }

  const Venue& venue(VenueIdx v) const { return venues_[index(v)]; }
  const std::string& user_id(UserIdx u) const { return user_ids_[index(u)]; }

  std::optional<UserIdx> find_user(const std::string& id) const;
  std::optional<VenueIdx> find_venue(const std::string& id) const;

  bool is_active(UserIdx u) const;

  /// Check-in rows and edge rows in canonical order, suitable for writing.
  std::vector<CheckInRow> rows() const;
  std::vector<EdgeRow> edge_rows() const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  DatasetConfig config_;
  std::vector<CheckIn> checkins_;
  std::vector<Venue> venues_;
  std::vector<std::string> user_ids_;
  SocialGraph graph_;
  std::vector<UserIdx> active_;
  std::vector<std::vector<CheckIn>> by_user_;
  std::vector<std::vector<CheckIn>> by_venue_;
};

std::vector<CheckInRow> read_checkins(std::istream& in);
std::vector<EdgeRow> read_edges(std::istream& in);
void write_checkins(std::ostream& out, std::span<const CheckInRow> rows);
void write_edges(std::ostream& out, std::span<const EdgeRow> edges);

/// Reads the check-in CSV (`user_id,venue_id,timestamp,lat,lon`) and the
/// edge CSV (`user_a,user_b`). Malformed rows raise ParseError carrying the
/// line number; inconsistent content raises IntegrityError.
Dataset load_dataset(const std::filesystem::path& checkin_path,
                     const std::filesystem::path& edges_path,
                     const DatasetConfig& config = {});

/// Loads `checkins.csv` and `edges.csv` from a directory.
Dataset load_dataset_dir(const std::filesystem::path& dir,
                         const DatasetConfig& config = {});

void save_dataset(const Dataset& data, const std::filesystem::path& dir);

/// One column of the descriptive statistics table, computed over a user set.
struct StatsColumn {
  std::size_t num_users = 0;
  std::size_t num_edges = 0;
  double avg_degree = 0.0;
  std::size_t num_users_friends = 0;
  std::size_t num_edges_friends = 0;
  double avg_degree_friends = 0.0;
  std::size_t num_users_friends_fof = 0;
  MeanStd mean_path_length;
  double clustering_coefficient = 0.0;
  std::size_t num_locations = 0;
  std::size_t num_checkins = 0;
  double avg_checkins_per_user_per_day = 0.0;
  MeanStd avg_checkins_per_location;
  MeanStd avg_checkins_per_user;
  MeanStd avg_locations_per_user;
  MeanStd avg_users_per_location;
  MeanStd avg_checkins_per_user_location;
  MeanStd avg_degree_of_repetition;
  MeanStd avg_user_entropy;
  MeanStd avg_location_entropy;
};

struct StatsReport {
  StatsColumn all;
  StatsColumn active;
};

struct StatsOptions {
  std::size_t path_samples = 100;
  std::uint64_t seed = 7;
};

StatsColumn stats_for_users(const Dataset& data, std::span<const UserIdx> users,
                            const StatsOptions& opts = {});

/// Throws NoData on a dataset without check-ins.
StatsReport descriptive_stats(const Dataset& data, const StatsOptions& opts = {});

nlohmann::json to_json(const StatsColumn& c);
nlohmann::json to_json(const StatsReport& r);

/// Mean gap between consecutive check-ins of a user that share a venue,
/// in hours, clamped to [1, 6]. Returns 1 when no such pair exists.
double estimate_stay_hours(const Dataset& data);

}  // namespace mobsoc
