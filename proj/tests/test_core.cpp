#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "mobsoc/core.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/rng.hpp"

using namespace mobsoc;

namespace {

CheckIn at(std::uint32_t venue, double lat, double lon, Seconds t = 0) {
  return CheckIn{UserIdx{0}, VenueIdx{venue}, t, lat, lon};
}

}  // namespace

TEST_CASE("home location of a single venue is that venue") {
  std::vector<CheckIn> h(4, at(0, 37.7749, -122.4194));
  const auto home = home_location(h);
  CHECK(home.lat == doctest::Approx(37.7749).epsilon(1e-12));
  CHECK(home.lon == doctest::Approx(-122.4194).epsilon(1e-12));
}

TEST_CASE("home location picks the majority cell") {
  std::vector<CheckIn> h;
  for (int k = 0; k < 10; ++k) h.push_back(at(0, 37.7000 + 0.0001 * (k % 3), -122.40));
  h.push_back(at(1, 37.80, -122.20));
  h.push_back(at(1, 37.80, -122.20));
  double lat = 0;
  for (int k = 0; k < 10; ++k) lat += 37.7000 + 0.0001 * (k % 3);
  const auto home = home_location(h);
  CHECK(home.lat == doctest::Approx(lat / 10).epsilon(1e-12));
  CHECK(home.lon == doctest::Approx(-122.40).epsilon(1e-12));
}

TEST_CASE("home location ties resolve to the smallest cell and ignore order") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CheckIn> h;
    const int n = 2 + static_cast<int>(uniform_index(rng, 20));
    for (int k = 0; k < n; ++k) {
      h.push_back(at(0, 37.70 + 0.003 * static_cast<double>(uniform_index(rng, 4)),
                     -122.45 + 0.003 * static_cast<double>(uniform_index(rng, 4))));
    }
    // Exhaustive oracle: bucket with the same grid, scan keys in order.
    const double ref_lat = std::min_element(h.begin(), h.end(), [](auto& a, auto& b) {
                             return a.lat < b.lat;
                           })->lat;
    const double lon_scale = 111320.0 * std::cos(ref_lat * M_PI / 180.0);
    std::map<std::pair<long long, long long>, std::vector<LatLon>> cells;
    for (const auto& c : h) {
      cells[{static_cast<long long>(std::floor(c.lat * 111320.0 / 500.0)),
             static_cast<long long>(std::floor(c.lon * lon_scale / 500.0))}]
          .push_back({c.lat, c.lon});
    }
    std::size_t best = 0;
    LatLon expect;
    for (const auto& [key, pts] : cells) {
      if (pts.size() > best) {
        best = pts.size();
        expect = {};
        for (const auto& p : pts) {
          expect.lat += p.lat / static_cast<double>(pts.size());
          expect.lon += p.lon / static_cast<double>(pts.size());
        }
      }
    }
    const auto home = home_location(h);
    CHECK(home.lat == doctest::Approx(expect.lat).epsilon(1e-12));
    CHECK(home.lon == doctest::Approx(expect.lon).epsilon(1e-12));

    auto shuffled = h;
    std::reverse(shuffled.begin(), shuffled.end());
    std::rotate(shuffled.begin(), shuffled.begin() + 1, shuffled.end());
    CHECK(home_location(shuffled) == home);
  }
}

TEST_CASE("home location of nothing is an error") {
  CHECK_THROWS_AS(home_location({}), NoData);
}

TEST_CASE("entropy") {
  std::vector<CheckIn> same(5, at(2, 0, 0));
  CHECK(user_entropy(same) == 0.0);

  std::vector<CheckIn> uniform{at(0, 0, 0), at(1, 0, 0), at(2, 0, 0), at(3, 0, 0)};
  CHECK(std::abs(user_entropy(uniform) - std::log(4.0)) < 1e-12);

  std::vector<double> counts{2, 1, 1};
  const double expect = -(0.5 * std::log(0.5) + 2 * 0.25 * std::log(0.25));
  CHECK(entropy(counts) == doctest::Approx(expect).epsilon(1e-14));

  for (int n = 1; n <= 64; ++n) {
    std::vector<double> flat(static_cast<std::size_t>(n), 3.0);
    CHECK(std::abs(entropy(flat) - std::log(static_cast<double>(n))) < 1e-12);
  }

  CHECK_THROWS_AS(user_entropy({}), NoData);
  CHECK_THROWS_AS(location_entropy({}), NoData);
}

TEST_CASE("location entropy counts users") {
  std::vector<CheckIn> visits;
  for (std::uint32_t u : {0u, 0u, 1u, 2u}) visits.push_back(CheckIn{UserIdx{u}, VenueIdx{0}, 0, 0, 0});
  CHECK(location_entropy(visits) == doctest::Approx(entropy(std::vector<double>{2, 1, 1})));
}

TEST_CASE("temporal context") {
  TimeConfig cfg;
  // 2012-03-05 17:30 UTC is a Monday, 09:30 in UTC-8.
  const Seconds t = 1330968600;
  const auto ctx = temporal_context(t, cfg);
  CHECK(ctx.day_of_week == 1);
  CHECK(ctx.day_class == DayClass::Workday);
  CHECK(ctx.slot == 9);
  CHECK(local_hour(t, cfg) == 9);

  // Saturday night local time.
  const auto sat = temporal_context(t + 5 * kDay + 12 * kHour, cfg);
  CHECK(sat.day_of_week == 6);
  CHECK(sat.day_class == DayClass::Weekend);
  CHECK(sat.slot == 21);

  TimeConfig coarse;
  coarse.slot_hours = 3;
  CHECK(coarse.num_slots() == 8);
  CHECK(temporal_context(t, coarse).slot == 3);
}

TEST_CASE("haversine") {
  CHECK(haversine_km({0, 0}, {0, 0}) == 0.0);
  // One degree of latitude on the mean sphere.
  CHECK(haversine_km({0, 0}, {1, 0}) == doctest::Approx(kEarthRadiusKm * M_PI / 180).epsilon(1e-12));
  CHECK(haversine_km({37.77, -122.42}, {40.71, -74.0}) == doctest::Approx(4130).epsilon(0.01));
}

TEST_CASE("social graph") {
  std::vector<SocialGraph::Edge> e{{0, 1}, {1, 0}, {1, 2}};
  SocialGraph g(4, e);
  CHECK(g.num_edges() == 2);
  CHECK(g.degree(1) == 2);
  CHECK(g.has_edge(2, 1));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.degree(3) == 0);

  std::vector<SocialGraph::Edge> loop{{2, 2}};
  CHECK_THROWS_AS(SocialGraph(3, loop), IntegrityError);
  std::vector<SocialGraph::Edge> out_of_range{{0, 5}};
  CHECK_THROWS_AS(SocialGraph(3, out_of_range), IntegrityError);
}

TEST_CASE("mean and population deviation") {
  std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  const auto m = mean_std(xs);
  CHECK(m.mean == 5.0);
  CHECK(m.std == 2.0);
}
