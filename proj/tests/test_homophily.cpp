#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "homophily_oracle.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/core.hpp"
#include "mobsoc/homophily.hpp"
#include "mobsoc/rng.hpp"

using namespace mobsoc;

namespace {

std::vector<CheckIn> random_history(Rng& rng, std::uint32_t user, int n, int venues,
                                    Seconds span) {
  std::vector<CheckIn> h;
  for (int k = 0; k < n; ++k) {
    h.push_back({UserIdx{user}, VenueIdx{static_cast<std::uint32_t>(uniform_index(rng, static_cast<std::uint64_t>(venues)))},
                 static_cast<Seconds>(uniform_index(rng, static_cast<std::uint64_t>(span))), 0, 0});
  }
  std::sort(h.begin(), h.end(), ByTime{});
  return h;
}

CheckIn visit(std::uint32_t user, std::uint32_t venue, Seconds t) {
  return {UserIdx{user}, VenueIdx{venue}, t, 0, 0};
}

// Dataset with venue coordinates spread so that densities differ.
Dataset small_city(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckInRow> rows;
  for (int k = 0; k < 400; ++k) {
    const auto v = uniform_index(rng, 25);
    rows.push_back({"u" + std::to_string(uniform_index(rng, 12)), "v" + std::to_string(v),
                    static_cast<Seconds>(uniform_index(rng, 30 * kDay)),
                    37.70 + 0.001 * static_cast<double>(v % 5) + 0.01 * static_cast<double>(v / 5),
                    -122.45 + 0.0015 * static_cast<double>(v)});
  }
  return Dataset(rows, {{"u0", "u1"}, {"u1", "u2"}, {"u3", "u4"}});
}

}  // namespace

TEST_CASE("co-location count") {
  std::vector<CheckIn> a{visit(0, 1, 1000)};
  std::vector<CheckIn> b{visit(1, 1, 1000)};
  CHECK(colocation_count(a, b) == 1.0);
  std::vector<CheckIn> late{visit(1, 1, 1000 + 8 * kDay)};
  CHECK(colocation_count(a, late) == 0.0);
  std::vector<CheckIn> other{visit(1, 2, 1000)};
  CHECK(colocation_count(a, other) == 0.0);

  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hi = random_history(rng, 0, 20, 6, 30 * kDay);
    const auto hj = random_history(rng, 1, 20, 6, 30 * kDay);
    CHECK(colocation_count(hi, hj) == oracle::col(hi, hj, kWeek));
    CHECK(colocation_count(hi, hj) == colocation_count(hj, hi));
    // Unbounded window: product of per-venue counts.
    std::map<std::uint32_t, double> ci, cj;
    for (const auto& c : hi) ci[index(c.venue)] += 1;
    for (const auto& c : hj) cj[index(c.venue)] += 1;
    double prod = 0;
    for (const auto& [v, n] : ci) prod += n * cj[v];
    CHECK(colocation_count(hi, hj, INT64_MAX / 4) == prod);
  }
}

TEST_CASE("spatial co-location rate") {
  std::vector<CheckIn> a, b, c;
  for (int w = 0; w < 4; ++w) {
    a.push_back(visit(0, 7, w * kWeek + 3600));
    b.push_back(visit(1, 7, w * kWeek + 7200));
    c.push_back(visit(2, 8, w * kWeek + 7200));
  }
  CHECK(scol_rate(a, b) == doctest::Approx(1.0));
  CHECK(scol_rate(a, c) == 0.0);
  std::vector<CheckIn> short_a{visit(0, 1, 0)}, short_b{visit(1, 1, kDay)};
  CHECK_THROWS_AS(scol_rate(short_a, short_b), InsufficientSpan);

  // Weekly enumeration oracle.
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto hi = random_history(rng, 0, 15, 5, 5 * kWeek);
    const auto hj = random_history(rng, 1, 15, 5, 5 * kWeek);
    const ObservationPeriod period{0, 5 * kWeek};
    std::map<std::uint32_t, double> pi, pj;
    double ni = 0, nj = 0;
    for (int week = 0; week <= 5; ++week) {
      for (std::uint32_t v = 0; v < 5; ++v) {
        const auto in_week = [&](const CheckIn& x) {
          return index(x.venue) == v && x.timestamp >= week * kWeek && x.timestamp < (week + 1) * kWeek;
        };
        if (std::any_of(hi.begin(), hi.end(), in_week)) { pi[v] += 1; ni += 1; }
        if (std::any_of(hj.begin(), hj.end(), in_week)) { pj[v] += 1; nj += 1; }
      }
    }
    double expect = 0;
    for (const auto& [v, x] : pi) expect += (x / ni) * (pj[v] / nj);
    const double got = scol_rate(hi, hj, period);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    CHECK((got >= 0.0 && got <= 1.0));
    CHECK(got == scol_rate(hj, hi, period));
  }
}

TEST_CASE("spatial cosine") {
  std::vector<CheckIn> a{visit(0, 1, 0), visit(0, 1, 5), visit(0, 1, 9), visit(0, 2, 10)};
  std::vector<CheckIn> b{visit(1, 1, 0), visit(1, 2, 5), visit(1, 2, 9), visit(1, 2, 10)};
  CHECK(spatial_cosine(a, b) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(spatial_cosine(a, a) == doctest::Approx(1.0));
  std::vector<CheckIn> c{visit(2, 3, 0)};
  CHECK(spatial_cosine(a, c) == 0.0);
}

TEST_CASE("social situation rate") {
  std::vector<CheckIn> a{visit(0, 1, 1000)};
  std::vector<CheckIn> b{visit(1, 1, 1000)};
  CHECK(social_situation_rate(a, b) == 1.0);
  std::vector<CheckIn> elsewhere{visit(1, 2, 1200)};
  CHECK(social_situation_rate(a, elsewhere) == 0.0);

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hi = random_history(rng, 0, 25, 4, 3 * kDay);
    const auto hj = random_history(rng, 1, 25, 4, 3 * kDay);
    const double r = social_situation_rate(hi, hj);
    CHECK(r == doctest::Approx(oracle::situation_rate(hi, hj, kHour)).epsilon(1e-12));
    CHECK((r >= 0.0 && r <= 1.0));
    CHECK(r == doctest::Approx(social_situation_rate(hj, hi)).epsilon(1e-12));
  }
}

TEST_CASE("weighted measures against oracles") {
  const auto d = small_city(4);
  for (const char* name : {"none", "density", "population", "entropy", "distance"}) {
    const Weighting w(d, parse_weight_scheme(name));
    const oracle::VenueWeight vw = [&](VenueIdx v) { return w.venue(v); };
    for (std::uint32_t i = 0; i < 12; ++i) {
      CHECK(w.pair(UserIdx{i}, UserIdx{(i + 1) % 12}) > 0.0);
      for (std::uint32_t j = i + 1; j < 12; ++j) {
        const auto hi = d.history(UserIdx{i});
        const auto hj = d.history(UserIdx{j});
        const double pair = w.pair(UserIdx{i}, UserIdx{j});
        CHECK(colocation_count(hi, hj, kWeek, w) == doctest::Approx(pair * oracle::col(hi, hj, kWeek, vw)).epsilon(1e-10));
        CHECK(spatial_cosine(hi, hj, w) == doctest::Approx(oracle::cosine(hi, hj, vw)).epsilon(1e-10));
        CHECK(social_situation_rate(hi, hj, kHour, w) == doctest::Approx(oracle::situation_rate(hi, hj, kHour, vw)).epsilon(1e-10));
        CHECK(colocation_count(hi, hj, kWeek, w) == doctest::Approx(colocation_count(hj, hi, kWeek, w)));
      }
    }
    for (const auto& v : d.venues()) CHECK(w.venue(*d.find_venue(v.id)) > 0.0);
  }
  // Weight none is the unweighted measure.
  const Weighting none(d, WeightScheme{});
  CHECK(spatial_cosine(d.history(UserIdx{0}), d.history(UserIdx{1}), none) ==
        spatial_cosine(d.history(UserIdx{0}), d.history(UserIdx{1})));
  CHECK_THROWS_AS(Weighting(d, parse_weight_scheme("extra_role")), Unsupported);
  CHECK_THROWS_AS(parse_weight_scheme("bogus"), ConfigError);
}

TEST_CASE("weight formulas") {
  std::vector<CheckInRow> rows{{"a", "x", 0, 10.0, 10.0}, {"b", "x", 1, 10.0, 10.0},
                               {"a", "y", 2, 10.001, 10.0}, {"c", "z", 3, 11.0, 11.0}};
  Dataset d(rows, {});
  const auto x = *d.find_venue("x");
  const auto z = *d.find_venue("z");
  CHECK(Weighting(d, parse_weight_scheme("density")).venue(x) == doctest::Approx(std::log(2.0)));
  CHECK(Weighting(d, parse_weight_scheme("population")).venue(x) == doctest::Approx(1.0 / std::log(4.0)));
  CHECK(Weighting(d, parse_weight_scheme("entropy")).venue(x) == doctest::Approx(1.0 / (1.0 + std::log(2.0))));
  CHECK(Weighting(d, parse_weight_scheme("entropy")).venue(z) == 1.0);
  const Weighting dist(d, parse_weight_scheme("dist"));
  const double km = haversine_km({10.0, 10.0}, {11.0, 11.0});
  CHECK(dist.pair(*d.find_user("b"), *d.find_user("c")) == doctest::Approx(std::log1p(km)));
  CHECK(dist.pair(*d.find_user("a"), *d.find_user("a")) == doctest::Approx(std::log1p(0.5)));
}

TEST_CASE("measure labels") {
  const auto ms = standard_measures();
  REQUIRE(ms.size() == 12);
  CHECK(ms[0].label() == "SCos");
  CHECK(ms[1].label() == "SCos-User");
  CHECK(ms[6].label() == "Col");
  CHECK(ms[11].label() == "s-Entr");
  CHECK(parse_measure("S-Dist").scheme.kind == WeightKind::DistanceFromHome);
  CHECK_THROWS_AS(parse_measure("foo"), ConfigError);
}

namespace {

// Exhaustive oracle: every window start at every visit time, components by
// repeated relaxation, then the same maximality filter written directly.
std::set<std::tuple<Seconds, std::uint32_t, UserSet>> situations_oracle(const Dataset& d,
                                                                         Seconds window) {
  struct Cand {
    UserSet users;
    Seconds start, end;
  };
  std::set<std::tuple<Seconds, std::uint32_t, UserSet>> out;
  for (std::uint32_t v = 0; v < d.num_venues(); ++v) {
    const auto visits = d.visits(VenueIdx{v});
    std::vector<Cand> cands;
    for (const auto& start : visits) {
      std::vector<CheckIn> in;
      for (const auto& x : visits) {
        if (x.timestamp >= start.timestamp && x.timestamp <= start.timestamp + window) in.push_back(x);
      }
      std::set<UserIdx> comp{start.user};
      bool grew = true;
      while (grew) {
        grew = false;
        for (const auto& x : in) {
          if (comp.count(x.user)) continue;
          for (UserIdx c : comp) {
            if (d.graph().has_edge(index(c), index(x.user))) {
              comp.insert(x.user);
              grew = true;
              break;
            }
          }
        }
      }
      if (comp.size() < 2) continue;
      Seconds end = start.timestamp;
      for (const auto& x : in) {
        if (comp.count(x.user)) end = std::max(end, x.timestamp);
      }
      cands.push_back({UserSet(comp.begin(), comp.end()), start.timestamp, end});
    }
    for (const auto& a : cands) {
      bool drop = false;
      for (const auto& b : cands) {
        const bool overlap = !(b.start > a.end || a.start > b.end);
        const bool subset = std::includes(b.users.begin(), b.users.end(), a.users.begin(), a.users.end());
        if (overlap && subset && (b.users.size() > a.users.size() || b.start < a.start)) drop = true;
      }
      if (!drop) out.emplace(a.start, v, a.users);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("social situations") {
  {
    Dataset d({{"a", "V", 0, 1, 1}, {"b", "V", 1800, 1, 1}}, {{"a", "b"}});
    const auto s = detect_social_situations(d);
    REQUIRE(s.size() == 1);
    CHECK(s[0].participants.size() == 2);
    CHECK(s[0].window_end - s[0].window_start == 1800);
  }
  {
    Dataset d({{"a", "V", 0, 1, 1}, {"b", "V", 1800, 1, 1}, {"c", "W", 0, 2, 2}}, {{"a", "c"}});
    CHECK(detect_social_situations(d).empty());
  }
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CheckInRow> rows;
    for (int k = 0; k < 120; ++k) {
      const auto v = uniform_index(rng, 4);
      rows.push_back({"u" + std::to_string(uniform_index(rng, 8)), "v" + std::to_string(v),
                      static_cast<Seconds>(uniform_index(rng, 2 * kDay)), 1.0 + static_cast<double>(v), 1.0});
    }
    std::vector<EdgeRow> edges;
    for (int a = 0; a < 8; ++a) {
      for (int b = a + 1; b < 8; ++b) {
        if (bernoulli(rng, 0.35)) edges.emplace_back("u" + std::to_string(a), "u" + std::to_string(b));
      }
    }
    Dataset d(rows, edges);
    const auto got = detect_social_situations(d);
    std::set<std::tuple<Seconds, std::uint32_t, UserSet>> got_set;
    for (const auto& s : got) {
      got_set.emplace(s.window_start, index(s.venue), s.participants);
      CHECK(s.participants.size() >= 2);
      CHECK(s.window_end - s.window_start <= kHour);
    }
    CHECK(got_set.size() == got.size());
    CHECK(got_set == situations_oracle(d, kHour));
    CHECK(std::is_sorted(got.begin(), got.end(), [](const auto& a, const auto& b) {
      return std::tie(a.window_start, a.venue) < std::tie(b.window_start, b.venue);
    }));
  }
}

TEST_CASE("evaluator dispatches every standard measure") {
  const auto d = small_city(6);
  const HomophilyEvaluator eval(d);
  for (const auto& m : standard_measures()) {
    const double x = eval(m, UserIdx{0}, UserIdx{1});
    CHECK(x >= 0.0);
    CHECK(x == doctest::Approx(eval(m, UserIdx{1}, UserIdx{0})));
  }
}
