#include "mobsoc/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>

#include "mobsoc/core.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/rng.hpp"

namespace mobsoc {

void GenConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  prob(rewiring, "rewiring");
  prob(routine_bias, "routine_bias");
  prob(skip, "skip");
  prob(p_follow, "p_follow");
  prob(p_recommend, "p_recommend");
  prob(p_cositu, "p_cositu");
  prob(p_join, "p_join");
  prob(p_trend, "p_trend");
  if (n_users < 2) throw ConfigError("n_users must be at least 2");
  if (days < 1) throw ConfigError("days must be positive");
  if (group_min < 3 || group_max < group_min) throw ConfigError("need 3 <= group_min <= group_max");
  if (personal_min < 1 || personal_max < personal_min) throw ConfigError("need 1 <= personal_min <= personal_max");
  if (routine_min < 1 || routine_max < routine_min || routine_max > 12) {
    throw ConfigError("need 1 <= routine_min <= routine_max <= 12");
  }
  if (cross_ties < 0.0) throw ConfigError("cross_ties must be non-negative");
  if (group_venues < 2 || outing_stops < 1 || outing_stops > group_venues) {
    throw ConfigError("need 1 <= outing_stops <= group_venues and group_venues >= 2");
  }
  if (n_venues < personal_max + group_venues + trend_venues) throw ConfigError("too few venues");
  if (follow_window <= 0 || arrival_spread < 0) throw ConfigError("windows must be positive");
}

namespace {

enum class Kind { Routine, Situation, Scout, Follow, Trend };

struct Event {
  Seconds t;
  std::uint32_t venue;
  Kind kind;
};

std::string padded(char prefix, std::size_t k, int width) {
  auto digits = std::to_string(k);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

int width_for(std::size_t n) {
  int w = 1;
  for (std::size_t x = n; x >= 10; x /= 10) ++w;
  return w;
}

// The `take` venues nearest to a point, closest first.
std::vector<std::uint32_t> nearest(const std::vector<LatLon>& venues, LatLon p, std::size_t take) {
  std::vector<std::pair<double, std::uint32_t>> d;
  d.reserve(venues.size());
  for (std::uint32_t v = 0; v < venues.size(); ++v) d.emplace_back(haversine_km(p, venues[v]), v);
  take = std::min(take, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
  std::vector<std::uint32_t> out;
  for (std::size_t k = 0; k < take; ++k) out.push_back(d[k].second);
  return out;
}

template <class T>
void shuffle(std::vector<T>& xs, Rng& rng) {
  for (std::size_t k = xs.size(); k > 1; --k) std::swap(xs[k - 1], xs[uniform_index(rng, k)]);
}

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

}  // namespace

Synthetic generate(const GenConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto n = cfg.n_users;

  // San Francisco bounding box.
  std::vector<LatLon> venue_pos(cfg.n_venues);
  for (auto& p : venue_pos) p = {uniform(rng, 37.70, 37.81), uniform(rng, -122.51, -122.39)};
  std::vector<LatLon> home(n);
  for (auto& p : home) p = {uniform(rng, 37.71, 37.80), uniform(rng, -122.50, -122.40)};

  // Groups over a random permutation of users.
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  std::vector<std::vector<std::uint32_t>> groups;
  for (std::size_t k = 0; k < n;) {
    auto size = uniform_between(rng, cfg.group_min, cfg.group_max);
    if (n - k < size + cfg.group_min) size = n - k;  // absorb the remainder
    groups.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(k),
                        perm.begin() + static_cast<std::ptrdiff_t>(k + size));
    k += size;
  }
  std::vector<std::size_t> group_of(n);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto u : groups[g]) group_of[u] = g;
  }

  std::set<std::pair<std::uint32_t, std::uint32_t>> ties;
  auto tie = [&](std::uint32_t a, std::uint32_t b) {
    if (a != b) ties.insert({std::min(a, b), std::max(a, b)});
  };
  auto random_outsider = [&](std::size_t g) {
    std::uint32_t x;
    do {
      x = static_cast<std::uint32_t>(uniform_index(rng, n));
    } while (group_of[x] == g);
    return x;
  };
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto members = groups[g];
    shuffle(members, rng);
    // A random matching of missing ties keeps every member adjacent to all
    // but at most one other member.
    std::set<std::pair<std::uint32_t, std::uint32_t>> missing;
    for (std::size_t k = 0; k + 1 < members.size(); k += 2) {
      if (bernoulli(rng, 0.5)) missing.insert({std::min(members[k], members[k + 1]), std::max(members[k], members[k + 1])});
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto e = std::make_pair(std::min(members[a], members[b]), std::max(members[a], members[b]));
        if (missing.count(e)) continue;
        if (groups.size() > 1 && bernoulli(rng, cfg.rewiring)) {
          tie(members[a], random_outsider(g));
        } else {
          tie(e.first, e.second);
        }
      }
    }
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    const int extra = poisson(rng, cfg.cross_ties / 2.0);
    for (int k = 0; k < extra; ++k) tie(u, static_cast<std::uint32_t>(uniform_index(rng, n)));
  }
  std::vector<std::vector<std::uint32_t>> friends(n);
  for (const auto& [a, b] : ties) {
    friends[a].push_back(b);
    friends[b].push_back(a);
  }

  // Personal venues and habits.
  struct Habit {
    std::vector<std::uint32_t> venues;
    std::vector<std::size_t> next;  // habitual successor per venue
    std::vector<int> minutes;       // daily check-in times, minutes after midnight
  };
  std::vector<Habit> habit(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    auto near = nearest(venue_pos, home[u], 40);
    shuffle(near, rng);
    auto& h = habit[u];
    h.venues.assign(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(uniform_between(rng, cfg.personal_min, cfg.personal_max)));
    h.next.resize(h.venues.size());
    std::vector<std::size_t> order(h.venues.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (std::size_t k = 0; k < order.size(); ++k) h.next[order[k]] = order[(k + 1) % order.size()];
    const auto per_day = uniform_between(rng, cfg.routine_min, cfg.routine_max);
    std::vector<int> hours;
    for (int x = 7; x <= 22; ++x) hours.push_back(x);
    shuffle(hours, rng);
    hours.resize(per_day);
    std::sort(hours.begin(), hours.end());
    for (int x : hours) h.minutes.push_back(x * 60 + static_cast<int>(uniform_index(rng, 40)));
  }

  std::vector<std::vector<Event>> events(n);
  GroundTruth truth;
  const int uw = width_for(n - 1);
  const int vw = width_for(cfg.n_venues - 1);
  auto uid = [&](std::uint32_t u) { return padded('u', u, uw); };
  auto vid = [&](std::uint32_t v) { return padded('v', v, vw); };

  // Routine days.
  for (std::uint32_t u = 0; u < n; ++u) {
    const auto& h = habit[u];
    std::size_t at = 0;
    for (int d = 0; d < cfg.days; ++d) {
      const Seconds day = cfg.start + d * kDay;
      for (std::size_t k = 0; k < h.minutes.size(); ++k) {
        if (k == 0) {
          at = bernoulli(rng, 0.8) ? 0 : uniform_index(rng, h.venues.size());
        } else {
          at = bernoulli(rng, cfg.routine_bias) ? h.next[at] : uniform_index(rng, h.venues.size());
        }
        if (bernoulli(rng, cfg.skip)) continue;
        const Seconds t = day + h.minutes[k] * 60 + static_cast<Seconds>(uniform_index(rng, 20 * 60));
        events[u].push_back({t, h.venues[at], Kind::Routine});
      }
    }
  }

  // Group outings in the evening.
  std::vector<std::vector<std::uint32_t>> pools(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    LatLon c{0, 0};
    for (auto u : groups[g]) {
      c.lat += home[u].lat / static_cast<double>(groups[g].size());
      c.lon += home[u].lon / static_cast<double>(groups[g].size());
    }
    std::set<std::uint32_t> personal;
    for (auto u : groups[g]) personal.insert(habit[u].venues.begin(), habit[u].venues.end());
    for (auto v : nearest(venue_pos, c, 60)) {
      if (!personal.count(v)) pools[g].push_back(v);
    }
    shuffle(pools[g], rng);
    pools[g].resize(std::min(cfg.group_venues, pools[g].size()));
    std::vector<std::string> ids;
    for (auto u : groups[g]) ids.push_back(uid(u));
    std::sort(ids.begin(), ids.end());
    truth.groups.push_back(ids);
  }
  const Seconds stop_gap = 100 * 60;
  for (int d = 0; d < cfg.days; ++d) {
    const Seconds day = cfg.start + d * kDay;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!bernoulli(rng, cfg.p_cositu)) continue;
      std::vector<std::uint32_t> who;
      for (auto u : groups[g]) {
        if (bernoulli(rng, cfg.p_join)) who.push_back(u);
      }
      if (who.size() < 2) continue;
      auto pool = pools[g];
      shuffle(pool, rng);
      const auto stops = std::min(cfg.outing_stops, pool.size());
      const Seconds begin = day + 18 * kHour + static_cast<Seconds>(uniform_index(rng, 90 * 60));
      const Seconds end = begin + static_cast<Seconds>(stops) * stop_gap;
      for (auto u : who) {
        auto& ev = events[u];
        ev.erase(std::remove_if(ev.begin(), ev.end(),
                                [&](const Event& e) {
                                  return e.kind == Kind::Routine && e.t >= begin - kHour && e.t < end + kHour;
                                }),
                 ev.end());
      }
      // The last stop may be a place one participant tried alone that
      // afternoon.
      std::optional<std::uint32_t> scout;
      if (stops > 0 && bernoulli(rng, cfg.p_recommend)) {
        scout = who[uniform_index(rng, who.size())];
        const Seconds t = day + 13 * kHour + static_cast<Seconds>(uniform_index(rng, 3 * kHour));
        events[*scout].push_back({t, pool[stops - 1], Kind::Scout});
      }
      for (std::size_t s = 0; s < stops; ++s) {
        const Seconds base = begin + static_cast<Seconds>(s) * stop_gap;
        std::vector<std::pair<Seconds, std::uint32_t>> arrivals;
        for (auto u : who) {
          arrivals.emplace_back(base + static_cast<Seconds>(uniform_index(rng, static_cast<std::uint64_t>(cfg.arrival_spread) + 1)), u);
        }
        std::sort(arrivals.begin(), arrivals.end());
        PlantedSituation sit;
        sit.venue = vid(pool[s]);
        sit.start = arrivals.front().first;
        sit.end = arrivals.back().first;
        for (const auto& [t, u] : arrivals) {
          events[u].push_back({t, pool[s], Kind::Situation});
          sit.participants.push_back(uid(u));
          InfluenceEvent ie{uid(u), sit.venue, t, "situation", {}};
          for (const auto& [t2, w] : arrivals) {
            if (w != u) ie.influencers.push_back(uid(w));
          }
          std::sort(ie.influencers.begin(), ie.influencers.end());
          truth.influence.push_back(std::move(ie));
          if (scout && s + 1 == stops && u != *scout) {
            truth.influence.push_back({uid(u), sit.venue, t, "recommendation", {uid(*scout)}});
          }
        }
        std::sort(sit.participants.begin(), sit.participants.end());
        truth.situations.push_back(std::move(sit));
      }
    }
  }

  // Weekly trend venues.
  const int weeks = (cfg.days + 6) / 7;
  std::vector<std::vector<std::uint32_t>> hot(static_cast<std::size_t>(weeks));
  for (auto& w : hot) {
    for (std::size_t k = 0; k < cfg.trend_venues; ++k) w.push_back(static_cast<std::uint32_t>(uniform_index(rng, cfg.n_venues)));
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    for (int d = 0; d < cfg.days; ++d) {
      if (hot[0].empty() || !bernoulli(rng, cfg.p_trend)) continue;
      const auto& w = hot[static_cast<std::size_t>(d / 7)];
      const Seconds t = cfg.start + d * kDay + 12 * kHour + static_cast<Seconds>(uniform_index(rng, 5 * kHour));
      const auto v = w[uniform_index(rng, w.size())];
      events[u].push_back({t, v, Kind::Trend});
      truth.influence.push_back({uid(u), vid(v), t, "trend", {}});
    }
  }

  // Follow visits: repeat a friend's recent visit to a venue outside the
  // follower's own routine.
  for (auto& ev : events) {
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  }
  std::vector<std::vector<Event>> follows(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    const std::set<std::uint32_t> own(habit[u].venues.begin(), habit[u].venues.end());
    for (int d = 0; d < cfg.days; ++d) {
      if (!bernoulli(rng, cfg.p_follow)) continue;
      const Seconds t = cfg.start + d * kDay + 10 * kHour + static_cast<Seconds>(uniform_index(rng, 12 * kHour));
      std::vector<std::pair<std::uint32_t, const Event*>> options;
      for (auto f : friends[u]) {
        for (const auto& e : events[f]) {
          if (e.t >= t) break;
          if (e.t >= t - cfg.follow_window && !own.count(e.venue)) options.emplace_back(f, &e);
        }
      }
      if (options.empty()) continue;
      const auto& [f, e] = options[uniform_index(rng, options.size())];
      follows[u].push_back({t, e->venue, Kind::Follow});
      truth.influence.push_back({uid(u), vid(e->venue), t, "follow", {uid(f)}});
    }
  }

  Synthetic out;
  for (std::uint32_t u = 0; u < n; ++u) {
    for (const auto* list : {&events[u], &follows[u]}) {
      for (const auto& e : *list) {
        const auto& p = venue_pos[e.venue];
        out.rows.push_back({uid(u), vid(e.venue), e.t, p.lat, p.lon});
      }
    }
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const CheckInRow& a, const CheckInRow& b) {
    return std::tie(a.timestamp, a.user_id, a.venue_id) < std::tie(b.timestamp, b.user_id, b.venue_id);
  });
  for (const auto& [a, b] : ties) out.edges.emplace_back(uid(a), uid(b));
  out.truth = std::move(truth);
  std::sort(out.truth.influence.begin(), out.truth.influence.end(),
            [](const InfluenceEvent& a, const InfluenceEvent& b) {
              return std::tie(a.timestamp, a.user, a.venue) < std::tie(b.timestamp, b.user, b.venue);
            });
  return out;
}

nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json influence = nlohmann::json::array();
  for (const auto& e : truth.influence) {
    influence.push_back({{"user", e.user},
                         {"venue", e.venue},
                         {"timestamp", e.timestamp},
                         {"kind", e.kind},
                         {"influencers", e.influencers}});
  }
  nlohmann::json situations = nlohmann::json::array();
  for (const auto& s : truth.situations) {
    situations.push_back({{"participants", s.participants},
                          {"venue", s.venue},
                          {"start", s.start},
                          {"end", s.end}});
  }
  return {{"format", "mobsoc-ground-truth"},
          {"version", 1},
          {"groups", truth.groups},
          {"influence", influence},
          {"situations", situations}};
}

void save_synthetic(const Synthetic& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "checkins.csv", std::ios::binary);
    write_checkins(out, data.rows);
  }
  {
    std::ofstream out(dir / "edges.csv", std::ios::binary);
    write_edges(out, data.edges);
  }
  std::ofstream out(dir / "ground_truth.json", std::ios::binary);
  out << to_json(data.truth).dump(1) << '\n';
  if (!out) throw IntegrityError("could not write " + (dir / "ground_truth.json").string());
}

}  // namespace mobsoc
