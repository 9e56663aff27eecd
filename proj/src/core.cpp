#include "mobsoc/core.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include "mobsoc/error.hpp"

namespace mobsoc {

SocialGraph::SocialGraph(std::size_t num_nodes, std::span<const Edge> edges)
    : adj_(num_nodes) {
  for (const auto& [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw IntegrityError("edge endpoint out of range");
    }
    if (a == b) {
      throw IntegrityError("self-loop on node " + std::to_string(a));
    }
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& n : adj_) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    num_edges_ += n.size();
  }
  num_edges_ /= 2;
}

std::vector<SocialGraph::Edge> SocialGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (std::uint32_t a = 0; a < adj_.size(); ++a) {
    for (std::uint32_t b : adj_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

int TimeConfig::num_slots() const {
  return static_cast<int>(std::ceil(24.0 / slot_hours - 1e-9));
}

namespace {

Seconds local_seconds(Seconds t, const TimeConfig& cfg) {
  return t + cfg.utc_offset;
}

Seconds floor_div(Seconds a, Seconds b) {
  Seconds q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

TemporalContext temporal_context(Seconds t, const TimeConfig& cfg) {
  const Seconds local = local_seconds(t, cfg);
  const Seconds day = floor_div(local, kDay);
  const Seconds sec_of_day = local - day * kDay;
  // 1970-01-01 was a Thursday.
  const auto dow = static_cast<std::uint8_t>(((day + 4) % 7 + 7) % 7);
  TemporalContext ctx;
  ctx.day_of_week = dow;
  ctx.day_class = (dow == 0 || dow == 6) ? DayClass::Weekend : DayClass::Workday;
  const double hours = static_cast<double>(sec_of_day) / kHour;
  int slot = static_cast<int>(std::floor(hours / cfg.slot_hours));
  ctx.slot = static_cast<std::uint16_t>(std::min(slot, cfg.num_slots() - 1));
  return ctx;
}

int local_hour(Seconds t, const TimeConfig& cfg) {
  const Seconds local = local_seconds(t, cfg);
  const Seconds day = floor_div(local, kDay);
  return static_cast<int>((local - day * kDay) / kHour);
}

double haversine_km(LatLon a, LatLon b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

LatLon home_location(std::span<const CheckIn> history, double cell_m) {
  if (history.empty()) throw NoData("home_location: empty history");

  constexpr double metres_per_degree = 111320.0;
  double ref_lat = history.front().lat;
  for (const auto& c : history) ref_lat = std::min(ref_lat, c.lat);
  const double lon_scale =
      metres_per_degree * std::cos(ref_lat * std::numbers::pi / 180.0);

  std::map<std::pair<long long, long long>, std::vector<LatLon>> cells;
  for (const auto& c : history) {
    const auto row =
        static_cast<long long>(std::floor(c.lat * metres_per_degree / cell_m));
    const auto col = static_cast<long long>(std::floor(c.lon * lon_scale / cell_m));
    cells[{row, col}].push_back({c.lat, c.lon});
  }

  // std::map iterates in (row, col) order, so the first maximum wins ties.
  const std::vector<LatLon>* best = nullptr;
  for (const auto& [key, pts] : cells) {
    if (best == nullptr || pts.size() > best->size()) best = &pts;
  }

  std::vector<LatLon> pts = *best;
  std::sort(pts.begin(), pts.end(), [](const LatLon& a, const LatLon& b) {
    return std::tie(a.lat, a.lon) < std::tie(b.lat, b.lon);
  });
  LatLon sum;
  for (const auto& p : pts) {
    sum.lat += p.lat;
    sum.lon += p.lon;
  }
  const auto n = static_cast<double>(pts.size());
  return {sum.lat / n, sum.lon / n};
}

double entropy(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (!(total > 0.0)) throw NoData("entropy: empty distribution");
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return h <= 0.0 ? 0.0 : h;
}

namespace {

template <class Key>
double entropy_by(std::span<const CheckIn> events, Key key) {
  if (events.empty()) throw NoData("entropy: no check-ins");
  std::map<std::uint32_t, double> counts;
  for (const auto& c : events) counts[key(c)] += 1.0;
  std::vector<double> v;
  v.reserve(counts.size());
  for (const auto& [k, n] : counts) v.push_back(n);
  return entropy(v);
}

}  // namespace

double user_entropy(std::span<const CheckIn> history) {
  return entropy_by(history, [](const CheckIn& c) { return index(c.venue); });
}

double location_entropy(std::span<const CheckIn> visits) {
  return entropy_by(visits, [](const CheckIn& c) { return index(c.user); });
}

MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace mobsoc
