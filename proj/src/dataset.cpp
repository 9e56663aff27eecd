#include "mobsoc/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string_view>
#include <unordered_map>

#include "mobsoc/cohesion.hpp"
#include "mobsoc/core.hpp"
#include "mobsoc/error.hpp"

namespace mobsoc {

namespace {

constexpr std::string_view kCheckinHeader = "user_id,venue_id,timestamp,lat,lon";
constexpr std::string_view kEdgeHeader = "user_a,user_b";

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view field, const char* what, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(field) + "'", line);
  }
  return value;
}

// Reads header + rows, calling `row` on each non-empty data line.
template <class F>
void read_csv(std::istream& in, std::string_view header, std::size_t width, F row) {
  std::string buf;
  std::size_t line = 0;
  bool seen_header = false;
  while (std::getline(in, buf)) {
    ++line;
    const auto text = trim_cr(buf);
    if (text.empty()) continue;
    if (!seen_header) {
      if (text != header) {
        throw ParseError("expected header '" + std::string(header) + "'", line);
      }
      seen_header = true;
      continue;
    }
    const auto fields = split(text);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line);
    }
    for (const auto f : fields) {
      if (f.empty()) throw ParseError("empty field", line);
    }
    row(fields, line);
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<CheckInRow> read_checkins(std::istream& in) {
  std::vector<CheckInRow> rows;
  read_csv(in, kCheckinHeader, 5, [&](const auto& f, std::size_t line) {
    CheckInRow r;
    r.user_id = std::string(f[0]);
    r.venue_id = std::string(f[1]);
    r.timestamp = parse_number<Seconds>(f[2], "timestamp", line);
    r.lat = parse_number<double>(f[3], "lat", line);
    r.lon = parse_number<double>(f[4], "lon", line);
    if (!std::isfinite(r.lat) || !std::isfinite(r.lon)) {
      throw ParseError("non-finite coordinate", line);
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

std::vector<EdgeRow> read_edges(std::istream& in) {
  std::vector<EdgeRow> edges;
  read_csv(in, kEdgeHeader, 2, [&](const auto& f, std::size_t) {
    edges.emplace_back(std::string(f[0]), std::string(f[1]));
  });
  return edges;
}

void write_checkins(std::ostream& out, std::span<const CheckInRow> rows) {
  out << kCheckinHeader << '\n';
  for (const auto& r : rows) {
    out << r.user_id << ',' << r.venue_id << ',' << r.timestamp << ','
        << format_double(r.lat) << ',' << format_double(r.lon) << '\n';
  }
}

void write_edges(std::ostream& out, std::span<const EdgeRow> edges) {
  out << kEdgeHeader << '\n';
  for (const auto& [a, b] : edges) out << a << ',' << b << '\n';
}

Dataset::Dataset(std::vector<CheckInRow> rows, std::vector<EdgeRow> edges,
                 const DatasetConfig& config)
    : config_(config) {
  std::set<std::string> users;
  std::map<std::string, LatLon> venue_pos;
  for (const auto& r : rows) {
    if (r.timestamp < 0) throw IntegrityError("negative timestamp for user " + r.user_id);
    if (!(std::abs(r.lat) <= 90.0) || !(std::abs(r.lon) <= 180.0)) {
      throw IntegrityError("coordinates out of range for venue " + r.venue_id);
    }
    users.insert(r.user_id);
    const auto [it, fresh] = venue_pos.emplace(r.venue_id, LatLon{r.lat, r.lon});
    if (!fresh && !(it->second == LatLon{r.lat, r.lon})) {
      throw IntegrityError("conflicting coordinates for venue " + r.venue_id);
    }
  }
  for (const auto& [a, b] : edges) {
    if (a == b) throw IntegrityError("self-loop on user " + a);
    users.insert(a);
    users.insert(b);
  }

  user_ids_.assign(users.begin(), users.end());
  std::unordered_map<std::string, std::uint32_t> user_index;
  for (std::uint32_t k = 0; k < user_ids_.size(); ++k) user_index[user_ids_[k]] = k;
  std::unordered_map<std::string, std::uint32_t> venue_index;
  for (const auto& [id, pos] : venue_pos) {
    venue_index[id] = static_cast<std::uint32_t>(venues_.size());
    venues_.push_back(Venue{id, pos.lat, pos.lon});
  }

  checkins_.reserve(rows.size());
  for (const auto& r : rows) {
    checkins_.push_back(CheckIn{UserIdx{user_index.at(r.user_id)},
                                VenueIdx{venue_index.at(r.venue_id)}, r.timestamp, r.lat,
                                r.lon});
  }
  std::sort(checkins_.begin(), checkins_.end(), ByTime{});

  std::vector<SocialGraph::Edge> graph_edges;
  graph_edges.reserve(edges.size());
  for (const auto& [a, b] : edges) graph_edges.emplace_back(user_index.at(a), user_index.at(b));
  graph_ = SocialGraph(user_ids_.size(), graph_edges);

  by_user_.resize(user_ids_.size());
  by_venue_.resize(venues_.size());
  for (const auto& c : checkins_) {
    by_user_[index(c.user)].push_back(c);
    by_venue_[index(c.venue)].push_back(c);
  }

  for (std::size_t v = 0; v < venues_.size(); ++v) {
    std::set<UserIdx> visitors;
    for (const auto& c : by_venue_[v]) visitors.insert(c.user);
    venues_[v].population = visitors.size();
    venues_[v].entropy = location_entropy(by_venue_[v]);
  }

  // Venue density: neighbours within the radius, found through a grid whose
  // cells are at least one radius wide.
  const double radius_km = config_.density_radius_m / 1000.0;
  if (radius_km > 0.0 && !venues_.empty()) {
    constexpr double km_per_degree = 110.0;  // below the true value, so cells are never narrower than the radius
    const double cell_lat = radius_km / km_per_degree;
    std::map<std::pair<long long, long long>, std::vector<std::size_t>> grid;
    std::vector<std::pair<long long, long long>> cell_of(venues_.size());
    double max_abs_lat = 0.0;
    for (const auto& v : venues_) max_abs_lat = std::max(max_abs_lat, std::abs(v.lat));
    const double cos_min = std::max(std::cos(max_abs_lat * std::numbers::pi / 180.0), 1e-6);
    const double cell_lon = std::min(360.0, cell_lat / cos_min);
    for (std::size_t v = 0; v < venues_.size(); ++v) {
      const auto key = std::make_pair(
          static_cast<long long>(std::floor(venues_[v].lat / cell_lat)),
          static_cast<long long>(std::floor(venues_[v].lon / cell_lon)));
      cell_of[v] = key;
      grid[key].push_back(v);
    }
    for (std::size_t v = 0; v < venues_.size(); ++v) {
      std::size_t count = 0;
      const auto [row, col] = cell_of[v];
      for (long long dr = -1; dr <= 1; ++dr) {
        for (long long dc = -1; dc <= 1; ++dc) {
          const auto it = grid.find({row + dr, col + dc});
          if (it == grid.end()) continue;
          for (std::size_t w : it->second) {
            if (w == v) continue;
            const double d = haversine_km({venues_[v].lat, venues_[v].lon},
                                          {venues_[w].lat, venues_[w].lon});
            if (d <= radius_km) ++count;
          }
        }
      }
      venues_[v].density = count;
    }
  }

  for (std::uint32_t u = 0; u < user_ids_.size(); ++u) {
    if (by_user_[u].size() >= config_.activity_threshold && !by_user_[u].empty()) {
      active_.push_back(UserIdx{u});
    }
  }
}

std::optional<UserIdx> Dataset::find_user(const std::string& id) const {
  const auto it = std::lower_bound(user_ids_.begin(), user_ids_.end(), id);
  if (it == user_ids_.end() || *it != id) return std::nullopt;
  return UserIdx{static_cast<std::uint32_t>(it - user_ids_.begin())};
}

std::optional<VenueIdx> Dataset::find_venue(const std::string& id) const {
  const auto it = std::lower_bound(venues_.begin(), venues_.end(), id,
                                   [](const Venue& v, const std::string& s) { return v.id < s; });
  if (it == venues_.end() || it->id != id) return std::nullopt;
  return VenueIdx{static_cast<std::uint32_t>(it - venues_.begin())};
}

bool Dataset::is_active(UserIdx u) const {
  return std::binary_search(active_.begin(), active_.end(), u);
}

std::vector<CheckInRow> Dataset::rows() const {
  std::vector<CheckInRow> out;
  out.reserve(checkins_.size());
  for (const auto& c : checkins_) {
    out.push_back({user_ids_[index(c.user)], venues_[index(c.venue)].id, c.timestamp, c.lat,
                   c.lon});
  }
  return out;
}

std::vector<EdgeRow> Dataset::edge_rows() const {
  std::vector<EdgeRow> out;
  for (const auto& [a, b] : graph_.edges()) out.emplace_back(user_ids_[a], user_ids_[b]);
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.user_ids_ == b.user_ids_ && a.rows() == b.rows() &&
         a.edge_rows() == b.edge_rows();
}

Dataset load_dataset(const std::filesystem::path& checkin_path,
                     const std::filesystem::path& edges_path, const DatasetConfig& config) {
  std::ifstream cin_file(checkin_path);
  if (!cin_file) throw ConfigError("cannot open " + checkin_path.string());
  std::ifstream edge_file(edges_path);
  if (!edge_file) throw ConfigError("cannot open " + edges_path.string());
  return Dataset(read_checkins(cin_file), read_edges(edge_file), config);
}

Dataset load_dataset_dir(const std::filesystem::path& dir, const DatasetConfig& config) {
  return load_dataset(dir / "checkins.csv", dir / "edges.csv", config);
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream c(dir / "checkins.csv", std::ios::binary);
  write_checkins(c, data.rows());
  std::ofstream e(dir / "edges.csv", std::ios::binary);
  write_edges(e, data.edge_rows());
  if (!c || !e) throw ConfigError("cannot write dataset to " + dir.string());
}

StatsColumn stats_for_users(const Dataset& data, std::span<const UserIdx> users,
                            const StatsOptions& opts) {
  const auto& g = data.graph();
  StatsColumn s;
  s.num_users = users.size();
  if (users.empty()) return s;

  std::vector<char> in_u(data.num_users(), 0);
  for (UserIdx u : users) in_u[index(u)] = 1;
  std::vector<char> in_uf = in_u;
  for (UserIdx u : users) {
    for (std::uint32_t f : g.neighbors(index(u))) in_uf[f] = 1;
  }
  std::vector<char> in_uff = in_uf;
  for (std::uint32_t v = 0; v < in_uf.size(); ++v) {
    if (!in_uf[v]) continue;
    for (std::uint32_t f : g.neighbors(v)) in_uff[f] = 1;
  }

  std::vector<std::uint32_t> uf_nodes;
  for (std::uint32_t v = 0; v < in_uf.size(); ++v) {
    if (in_uf[v]) uf_nodes.push_back(v);
  }
  for (const auto& [a, b] : g.edges()) {
    if (in_u[a] && in_u[b]) ++s.num_edges;
    if (in_uf[a] && in_uf[b]) ++s.num_edges_friends;
  }
  s.avg_degree = 2.0 * static_cast<double>(s.num_edges) / static_cast<double>(s.num_users);
  s.num_users_friends = uf_nodes.size();
  s.avg_degree_friends = 2.0 * static_cast<double>(s.num_edges_friends) /
                         static_cast<double>(s.num_users_friends);
  s.num_users_friends_fof =
      static_cast<std::size_t>(std::count(in_uff.begin(), in_uff.end(), char{1}));

  const SocialGraph uf = induced_subgraph(g, uf_nodes);
  if (uf.num_edges() > 0) s.mean_path_length = avg_path_length(uf, opts.path_samples, opts.seed);
  s.clustering_coefficient = clustering_coefficient(uf);

  // Check-in statistics restricted to the chosen users.
  std::map<std::uint32_t, std::vector<CheckIn>> at_venue;
  std::vector<double> per_user, locations_per_user, per_user_location, repetition,
      user_entropies;
  Seconds first = 0;
  Seconds last = 0;
  bool any = false;
  for (UserIdx u : users) {
    const auto hist = data.history(u);
    if (hist.empty()) continue;
    if (!any) {
      first = hist.front().timestamp;
      last = hist.back().timestamp;
      any = true;
    }
    first = std::min(first, hist.front().timestamp);
    last = std::max(last, hist.back().timestamp);
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& c : hist) {
      ++counts[index(c.venue)];
      at_venue[index(c.venue)].push_back(c);
    }
    s.num_checkins += hist.size();
    per_user.push_back(static_cast<double>(hist.size()));
    locations_per_user.push_back(static_cast<double>(counts.size()));
    const double mean_repeat =
        static_cast<double>(hist.size()) / static_cast<double>(counts.size());
    repetition.push_back(mean_repeat - 1.0);
    for (const auto& [v, n] : counts) per_user_location.push_back(static_cast<double>(n));
    user_entropies.push_back(user_entropy(hist));
  }

  std::vector<double> per_location, users_per_location, location_entropies;
  for (const auto& [v, visits] : at_venue) {
    per_location.push_back(static_cast<double>(visits.size()));
    std::set<UserIdx> who;
    for (const auto& c : visits) who.insert(c.user);
    users_per_location.push_back(static_cast<double>(who.size()));
    location_entropies.push_back(location_entropy(visits));
  }
  s.num_locations = at_venue.size();
  if (any) {
    const double days = std::max(1.0, static_cast<double>(last - first) / kDay);
    s.avg_checkins_per_user_per_day =
        static_cast<double>(s.num_checkins) / (static_cast<double>(s.num_users) * days);
  }
  s.avg_checkins_per_location = mean_std(per_location);
  s.avg_checkins_per_user = mean_std(per_user);
  s.avg_locations_per_user = mean_std(locations_per_user);
  s.avg_users_per_location = mean_std(users_per_location);
  s.avg_checkins_per_user_location = mean_std(per_user_location);
  s.avg_degree_of_repetition = mean_std(repetition);
  s.avg_user_entropy = mean_std(user_entropies);
  s.avg_location_entropy = mean_std(location_entropies);
  return s;
}

StatsReport descriptive_stats(const Dataset& data, const StatsOptions& opts) {
  if (data.checkins().empty()) throw NoData("descriptive_stats: no check-ins");
  std::vector<UserIdx> with_checkins;
  for (std::uint32_t u = 0; u < data.num_users(); ++u) {
    if (!data.history(UserIdx{u}).empty()) with_checkins.push_back(UserIdx{u});
  }
  return {stats_for_users(data, with_checkins, opts),
          stats_for_users(data, data.active_users(), opts)};
}

namespace {

nlohmann::json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

nlohmann::json to_json(const StatsColumn& c) {
  return {
      {"num_nodes_users", c.num_users},
      {"num_edges_ties", c.num_edges},
      {"avg_degree", c.avg_degree},
      {"num_nodes_users_friends", c.num_users_friends},
      {"num_edges_ties_users_friends", c.num_edges_friends},
      {"avg_degree_users_friends", c.avg_degree_friends},
      {"num_nodes_users_friends_fof", c.num_users_friends_fof},
      {"mean_average_path_length", to_json(c.mean_path_length)},
      {"clustering_coefficient", c.clustering_coefficient},
      {"num_locations", c.num_locations},
      {"num_checkins", c.num_checkins},
      {"avg_checkins_per_user_and_day", c.avg_checkins_per_user_per_day},
      {"avg_checkins_per_location", to_json(c.avg_checkins_per_location)},
      {"avg_checkins_per_user", to_json(c.avg_checkins_per_user)},
      {"avg_locations_per_user", to_json(c.avg_locations_per_user)},
      {"avg_users_per_location", to_json(c.avg_users_per_location)},
      {"avg_checkins_per_user_and_location", to_json(c.avg_checkins_per_user_location)},
      {"avg_degree_of_repetition", to_json(c.avg_degree_of_repetition)},
      {"avg_user_entropy", to_json(c.avg_user_entropy)},
      {"avg_location_entropy", to_json(c.avg_location_entropy)},
  };
}

nlohmann::json to_json(const StatsReport& r) {
  return {{"all", to_json(r.all)}, {"active", to_json(r.active)}};
}

double estimate_stay_hours(const Dataset& data) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint32_t u = 0; u < data.num_users(); ++u) {
    const auto hist = data.history(UserIdx{u});
    for (std::size_t k = 1; k < hist.size(); ++k) {
      if (hist[k].venue == hist[k - 1].venue) {
        sum += static_cast<double>(hist[k].timestamp - hist[k - 1].timestamp) / kHour;
        ++n;
      }
    }
  }
  if (n == 0) return 1.0;
  return std::clamp(sum / static_cast<double>(n), 1.0, 6.0);
}

}  // namespace mobsoc
