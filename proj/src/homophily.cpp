#include "mobsoc/homophily.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "mobsoc/core.hpp"
#include "mobsoc/error.hpp"

namespace mobsoc {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

using VisitTimes = std::map<std::uint32_t, std::vector<Seconds>>;

VisitTimes times_by_venue(std::span<const CheckIn> h) {
  VisitTimes out;
  for (const auto& c : h) out[index(c.venue)].push_back(c.timestamp);
  for (auto& [v, ts] : out) std::sort(ts.begin(), ts.end());
  return out;
}

// Number of elements of sorted `ts` within [t - window, t + window].
std::size_t count_within(const std::vector<Seconds>& ts, Seconds t, Seconds window) {
  const auto lo = std::lower_bound(ts.begin(), ts.end(), t - window);
  const auto hi = std::upper_bound(lo, ts.end(), t + window);
  return static_cast<std::size_t>(hi - lo);
}

// Weighted count of same-venue pairs within the window.
double same_venue_pairs(const VisitTimes& a, const VisitTimes& b, Seconds window,
                        const Weighting& w) {
  double total = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      std::size_t n = 0;
      for (Seconds t : ia->second) n += count_within(ib->second, t, window);
      total += static_cast<double>(n) * w.venue(VenueIdx{ia->first});
      ++ia;
      ++ib;
    }
  }
  return total;
}

}  // namespace

WeightScheme parse_weight_scheme(const std::string& name) {
  const auto n = lower(name);
  WeightScheme s;
  if (n == "none" || n.empty()) s.kind = WeightKind::None;
  else if (n == "density" || n == "dens") s.kind = WeightKind::Density;
  else if (n == "distance" || n == "dist") s.kind = WeightKind::DistanceFromHome;
  else if (n == "population" || n == "pop" || n == "user") s.kind = WeightKind::Population;
  else if (n == "entropy" || n == "entr") s.kind = WeightKind::Entropy;
  else if (n == "extra_role" || n == "extra-role" || n == "extrarole") s.kind = WeightKind::ExtraRole;
  else throw ConfigError("unknown weight scheme '" + name + "'");
  return s;
}

std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::None: return "none";
    case WeightKind::Density: return "density";
    case WeightKind::DistanceFromHome: return "distance";
    case WeightKind::Population: return "population";
    case WeightKind::Entropy: return "entropy";
    case WeightKind::ExtraRole: return "extra_role";
  }
  return "none";
}

Weighting::Weighting(const Dataset& data, const WeightScheme& scheme) : scheme_(scheme) {
  const auto& venues = data.venues();
  switch (scheme.kind) {
    case WeightKind::None:
      break;
    case WeightKind::Density:
      for (const auto& v : venues) venue_.push_back(std::log1p(static_cast<double>(v.density)));
      // A venue with no neighbours would get weight 0; keep weights positive.
      for (auto& x : venue_) x = std::max(x, std::log1p(0.5));
      break;
    case WeightKind::Population:
      for (const auto& v : venues) {
        venue_.push_back(1.0 / std::log(2.0 + static_cast<double>(v.population)));
      }
      break;
    case WeightKind::Entropy:
      for (const auto& v : venues) venue_.push_back(1.0 / (1.0 + v.entropy));
      break;
    case WeightKind::DistanceFromHome:
      home_.resize(data.num_users());
      has_home_.assign(data.num_users(), 0);
      for (std::uint32_t u = 0; u < data.num_users(); ++u) {
        const auto h = data.history(UserIdx{u});
        if (h.empty()) continue;
        home_[u] = home_location(h);
        has_home_[u] = 1;
      }
      break;
    case WeightKind::ExtraRole:
      throw Unsupported("the extra-role weighting has no definition");
  }
}

double Weighting::pair(UserIdx a, UserIdx b) const {
  if (scheme_.kind != WeightKind::DistanceFromHome) return 1.0;
  const auto ia = index(a);
  const auto ib = index(b);
  double km = 0.0;
  if (ia < has_home_.size() && ib < has_home_.size() && has_home_[ia] && has_home_[ib]) {
    km = haversine_km(home_[ia], home_[ib]);
  }
  return std::log1p(std::max(km, scheme_.min_distance_km));
}

double colocation_count(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                        Seconds window, const Weighting& w) {
  if (hi.empty() || hj.empty()) return 0.0;
  const double total = same_venue_pairs(times_by_venue(hi), times_by_venue(hj), window, w);
  return total * w.pair(hi.front().user, hj.front().user);
}

double scol_rate(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                 std::optional<ObservationPeriod> period) {
  if (!period) {
    ObservationPeriod p{INT64_MAX, INT64_MIN};
    for (auto h : {hi, hj}) {
      for (const auto& c : h) {
        p.start = std::min(p.start, c.timestamp);
        p.end = std::max(p.end, c.timestamp);
      }
    }
    if (hi.empty() && hj.empty()) p = {};
    period = p;
  }
  if (period->end - period->start < kWeek) {
    throw InsufficientSpan("scol_rate: observation period shorter than one week");
  }
  if (hi.empty() || hj.empty()) return 0.0;

  auto weekly_share = [&](std::span<const CheckIn> h) {
    std::set<std::pair<std::uint32_t, Seconds>> seen;
    for (const auto& c : h) {
      Seconds week = (c.timestamp - period->start) / kWeek;
      if (c.timestamp < period->start) week = -1 - (period->start - c.timestamp - 1) / kWeek;
      seen.emplace(index(c.venue), week);
    }
    std::map<std::uint32_t, double> share;
    for (const auto& [v, week] : seen) share[v] += 1.0;
    for (auto& [v, x] : share) x /= static_cast<double>(seen.size());
    return share;
  };
  const auto pi = weekly_share(hi);
  const auto pj = weekly_share(hj);
  double sum = 0.0;
  for (const auto& [v, x] : pi) {
    const auto it = pj.find(v);
    if (it != pj.end()) sum += x * it->second;
  }
  return std::min(sum, 1.0);
}

double spatial_cosine(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                      const Weighting& w) {
  if (hi.empty() || hj.empty()) return 0.0;
  std::map<std::uint32_t, double> xi, xj;
  for (const auto& c : hi) xi[index(c.venue)] += 1.0;
  for (const auto& c : hj) xj[index(c.venue)] += 1.0;
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (auto& [v, x] : xi) {
    x *= w.venue(VenueIdx{v});
    ni += x * x;
  }
  for (auto& [v, x] : xj) {
    x *= w.venue(VenueIdx{v});
    nj += x * x;
  }
  for (const auto& [v, x] : xi) {
    const auto it = xj.find(v);
    if (it != xj.end()) dot += x * it->second;
  }
  if (ni == 0.0 || nj == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(ni * nj), 0.0, 1.0);
}

double social_situation_rate(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                             Seconds window, const Weighting& w) {
  if (hi.empty() || hj.empty()) return 0.0;
  const double same = same_venue_pairs(times_by_venue(hi), times_by_venue(hj), window, w);
  if (same == 0.0) {
    // The denominator may still be positive; the rate is 0 either way.
    return 0.0;
  }
  std::vector<Seconds> tj;
  tj.reserve(hj.size());
  for (const auto& c : hj) tj.push_back(c.timestamp);
  // hj is time-sorted, so tj is as well.
  double any = 0.0;
  for (const auto& a : hi) {
    const auto lo = std::lower_bound(tj.begin(), tj.end(), a.timestamp - window);
    const auto hi_end = std::upper_bound(lo, tj.end(), a.timestamp + window);
    const double wa = w.venue(a.venue);
    for (auto it = lo; it != hi_end; ++it) {
      const auto& b = hj[static_cast<std::size_t>(it - tj.begin())];
      any += a.venue == b.venue ? wa : std::sqrt(wa * w.venue(b.venue));
    }
  }
  return any > 0.0 ? std::min(same / any, 1.0) : 0.0;
}

std::vector<SocialSituation> detect_social_situations(const Dataset& data, Seconds window) {
  const auto& g = data.graph();
  std::vector<SocialSituation> out;
  for (std::uint32_t v = 0; v < data.num_venues(); ++v) {
    const auto visits = data.visits(VenueIdx{v});
    std::vector<SocialSituation> found;
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t k = 0; k < visits.size(); ++k) {
      const Seconds t = visits[k].timestamp;
      while (visits[lo].timestamp < t) ++lo;
      if (hi < lo) hi = lo;
      while (hi < visits.size() && visits[hi].timestamp <= t + window) ++hi;

      std::map<UserIdx, Seconds> last_visit;
      for (std::size_t m = lo; m < hi; ++m) last_visit[visits[m].user] = visits[m].timestamp;
      if (last_visit.size() < 2) continue;

      // Component of the starting visitor among those present.
      UserSet component{visits[k].user};
      std::vector<UserIdx> frontier{visits[k].user};
      while (!frontier.empty()) {
        const auto u = frontier.back();
        frontier.pop_back();
        for (const auto& [x, ts] : last_visit) {
          if (!contains(component, x) && g.has_edge(index(u), index(x))) {
            component.insert(std::upper_bound(component.begin(), component.end(), x), x);
            frontier.push_back(x);
          }
        }
      }
      if (component.size() < 2) continue;
      Seconds end = t;
      for (UserIdx u : component) end = std::max(end, last_visit[u]);
      found.push_back({component, VenueIdx{v}, t, end});
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
      return std::tie(a.window_start, a.participants) < std::tie(b.window_start, b.participants);
    });
    found.erase(std::unique(found.begin(), found.end(),
                            [](const auto& a, const auto& b) {
                              return a.window_start == b.window_start &&
                                     a.participants == b.participants;
                            }),
                found.end());

    auto dominated = [&](std::size_t c) {
      const auto& a = found[c];
      for (std::size_t d = 0; d < found.size(); ++d) {
        if (d == c) continue;
        const auto& b = found[d];
        if (b.window_start > a.window_end || a.window_start > b.window_end) continue;
        if (!std::includes(b.participants.begin(), b.participants.end(),
                           a.participants.begin(), a.participants.end())) {
          continue;
        }
        if (b.participants.size() > a.participants.size() || b.window_start < a.window_start) {
          return true;
        }
      }
      return false;
    };
    for (std::size_t c = 0; c < found.size(); ++c) {
      if (!dominated(c)) out.push_back(found[c]);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.window_start, a.venue, a.participants) <
           std::tie(b.window_start, b.venue, b.participants);
  });
  return out;
}

std::string Measure::label() const {
  std::string base;
  switch (kind) {
    case MeasureKind::Col: base = "Col"; break;
    case MeasureKind::SCol: base = "SCol"; break;
    case MeasureKind::SCos: base = "SCos"; break;
    case MeasureKind::Situation: base = "s"; break;
  }
  switch (scheme.kind) {
    case WeightKind::None: return base;
    case WeightKind::Density: return base + "-Dens";
    case WeightKind::DistanceFromHome: return base + "-Dist";
    case WeightKind::Population: return base + "-User";
    case WeightKind::Entropy: return base + "-Entr";
    case WeightKind::ExtraRole: return base + "-ExtraRole";
  }
  return base;
}

Measure parse_measure(const std::string& name) {
  const auto n = lower(name);
  const auto dash = n.find('-');
  const auto head = n.substr(0, dash);
  Measure m;
  if (head == "col") m.kind = MeasureKind::Col;
  else if (head == "scol") m.kind = MeasureKind::SCol;
  else if (head == "scos") m.kind = MeasureKind::SCos;
  else if (head == "s" || head == "situation" || head == "ssr") m.kind = MeasureKind::Situation;
  else throw ConfigError("unknown measure '" + name + "'");
  if (dash != std::string::npos) m.scheme = parse_weight_scheme(n.substr(dash + 1));
  return m;
}

std::vector<Measure> standard_measures() {
  std::vector<Measure> out;
  for (const char* name : {"scos", "scos-user", "scos-dens", "scos-dist", "scos-entr", "scol",
                           "col", "s", "s-dens", "s-dist", "s-user", "s-entr"}) {
    out.push_back(parse_measure(name));
  }
  return out;
}

HomophilyEvaluator::HomophilyEvaluator(const Dataset& data, HomophilyParams params)
    : data_(data), params_(params) {
  if (!data.checkins().empty()) {
    period_ = {data.checkins().front().timestamp, data.checkins().back().timestamp};
  }
  for (auto kind : {WeightKind::None, WeightKind::Density, WeightKind::DistanceFromHome,
                    WeightKind::Population, WeightKind::Entropy}) {
    weightings_.emplace(kind, Weighting(data, WeightScheme{kind}));
  }
}

double HomophilyEvaluator::operator()(const Measure& m, UserIdx i, UserIdx j) const {
  const auto it = weightings_.find(m.scheme.kind);
  if (it == weightings_.end()) throw Unsupported("weighting " + to_string(m.scheme.kind));
  const Weighting& w = it->second;
  const auto hi = data_.history(i);
  const auto hj = data_.history(j);
  switch (m.kind) {
    case MeasureKind::Col: return colocation_count(hi, hj, params_.col_window, w);
    case MeasureKind::SCol: return scol_rate(hi, hj, period_);
    case MeasureKind::SCos: return spatial_cosine(hi, hj, w);
    case MeasureKind::Situation:
      return social_situation_rate(hi, hj, params_.situation_window, w);
  }
  return 0.0;
}

}  // namespace mobsoc
