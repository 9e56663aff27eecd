#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mobsoc/context_tree.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/rng.hpp"
#include "ppm_oracle.hpp"

using namespace mobsoc;

namespace {

const TimeConfig kTime{};

// Monday 2021-01-04 09:00 local.
constexpr Seconds kMonday9 = 1609779600 + 8 * kHour;

std::vector<CheckIn> sequence(std::initializer_list<std::uint32_t> venues, Seconds step = kHour) {
  std::vector<CheckIn> out;
  Seconds t = kMonday9;
  for (auto v : venues) {
    out.push_back({UserIdx{0}, VenueIdx{v}, t, 0, 0});
    t += step;
  }
  return out;
}

oracle::Tokens tokens(const ContextKey& ctx, std::size_t kappa) {
  oracle::Tokens out;
  for (std::size_t k = 0; k < std::min(kappa, ctx.spatial.size()); ++k) {
    out.push_back(index(ctx.spatial[ctx.spatial.size() - 1 - k]));
  }
  out.push_back(1000 + static_cast<std::uint64_t>(ctx.temporal.day_class));
  out.push_back(2000 + ctx.temporal.day_of_week);
  out.push_back(3000 + ctx.temporal.slot);
  return out;
}

struct Corpus {
  std::vector<CheckIn> history;
  std::size_t kappa;
  std::uint32_t alphabet;
};

Corpus random_corpus(Rng& rng) {
  Corpus c;
  c.alphabet = 1 + static_cast<std::uint32_t>(uniform_index(rng, 6));
  c.kappa = 1 + uniform_index(rng, 3);
  const auto len = 1 + uniform_index(rng, 50);
  Seconds t = kMonday9;
  for (std::size_t k = 0; k < len; ++k) {
    // Few distinct temporal contexts so deep nodes repeat.
    t += static_cast<Seconds>(uniform_index(rng, 3)) * kHour +
         static_cast<Seconds>(uniform_index(rng, 2)) * 6 * kDay;
    c.history.push_back({UserIdx{0}, VenueIdx{static_cast<std::uint32_t>(uniform_index(rng, c.alphabet))}, t, 0, 0});
  }
  return c;
}

}  // namespace

TEST_CASE("counting") {
  ContextTree single(3);
  single.train(sequence({4}), kTime);
  CHECK(single.num_events() == 1);
  CHECK(single.alphabet() == std::vector<VenueIdx>{VenueIdx{4}});

  // A B A B A with one venue of context.
  ContextTree t(1);
  const auto h = sequence({0, 1, 0, 1, 0}, 0);
  t.train(h, kTime);
  const auto tctx = temporal_path(temporal_context(kMonday9, kTime));
  std::vector<Label> a{Label::venue(VenueIdx{0})};
  std::vector<Label> b{Label::venue(VenueIdx{1})};
  CHECK(t.count(a, VenueIdx{1}) == 2);
  CHECK(t.count(b, VenueIdx{0}) == 2);
  CHECK(t.count(a, VenueIdx{0}) == 0);
  a.insert(a.end(), tctx.begin(), tctx.end());
  CHECK(t.count(a, VenueIdx{1}) == 2);
}

TEST_CASE("depth-one mass equals event count") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_corpus(rng);
    ContextTree t(c.kappa);
    t.train(c.history, kTime);
    const auto j = t.to_json();
    std::uint64_t depth1 = 0;
    for (const auto& node : j["nodes"]) {
      if (node["parent"] == 0 && &node != &j["nodes"][0]) {
        for (const auto& e : node["counts"]) depth1 += e[1].get<std::uint64_t>();
      }
    }
    CHECK(depth1 == c.history.size());
  }
}

TEST_CASE("estimators") {
  ContextTree t(1);
  CHECK_THROWS_AS(t.prob(VenueIdx{0}, ContextKey{}), ModelEmpty);
  CHECK_THROWS_AS(t.predict(ContextKey{}), ModelEmpty);

  // Three events B after A, all in the same hour.
  for (int k = 0; k < 3; ++k) t.add({{VenueIdx{0}}, temporal_context(kMonday9, kTime)}, VenueIdx{1});
  ContextKey ctx{{VenueIdx{0}}, temporal_context(kMonday9, kTime)};
  CHECK(t.prob(VenueIdx{1}, ctx) == doctest::Approx(3.0 / 4.0));
  const auto pred = t.predict(ctx);
  // Four nodes on the path, each {B} with three events: escape 1/4 each.
  CHECK(pred.escape_to_root == doctest::Approx(std::pow(0.25, 4)));
  // Never-seen symbol with a closed alphabet of 5: escapes to the uniform share.
  CHECK(t.prob(VenueIdx{7}, ctx, 5) == doctest::Approx(std::pow(0.25, 4) / 5));
  // Unknown context of a known shape: only the root is matched.
  ContextKey other{{VenueIdx{9}}, temporal_context(kMonday9 + 3 * kDay + 5 * kHour, kTime)};
  CHECK(t.prob(VenueIdx{2}, other, 4) == doctest::Approx(0.25));
}

TEST_CASE("ranking") {
  ContextTree t(1);
  t.train(sequence({0, 1, 0, 1, 0, 1, 0, 1}, kDay), kTime);
  ContextKey after_a{{VenueIdx{0}}, temporal_context(kMonday9 + 20 * kDay, kTime)};
  CHECK(t.predict(after_a).ranked.front().first == VenueIdx{1});

  ContextTree u(1);
  u.add({{}, temporal_context(kMonday9, kTime)}, VenueIdx{3});
  u.add({{}, temporal_context(kMonday9, kTime)}, VenueIdx{1});
  u.add({{}, temporal_context(kMonday9, kTime)}, VenueIdx{2});
  const auto r = u.predict({{}, temporal_context(kMonday9, kTime)});
  REQUIRE(r.ranked.size() == 3);
  CHECK(r.ranked[0].first == VenueIdx{1});
  CHECK(r.ranked[1].first == VenueIdx{2});
  CHECK(r.ranked[2].first == VenueIdx{3});
}

TEST_CASE("oracle equivalence, normalization and positivity") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(rng);
    ContextTree t(c.kappa);
    std::vector<oracle::Event> events;
    std::vector<ContextKey> contexts;
    for (std::size_t k = 0; k < c.history.size(); ++k) {
      const auto ctx = make_context(std::span(c.history).first(k), c.history[k].timestamp, kTime, c.kappa);
      t.add(ctx, c.history[k].venue);
      events.push_back({tokens(ctx, c.kappa), index(c.history[k].venue)});
      contexts.push_back(ctx);
    }
    std::vector<VenueIdx> closed;
    for (std::uint32_t q = 0; q < c.alphabet + 2; ++q) closed.push_back(VenueIdx{q});
    const double a = static_cast<double>(closed.size());
    for (const auto& ctx : contexts) {
      const auto toks = tokens(ctx, c.kappa);
      for (auto q : closed) {
        const double want = oracle::ppm_prob(events, toks, index(q), a);
        CHECK(std::abs(t.prob(q, ctx, closed.size()) - want) < 1e-12);
      }
      const auto m = t.mass_breakdown(ctx, closed);
      CHECK(std::abs(m.symbols + m.shadowed - 1.0) < 1e-9);
      for (auto q : t.alphabet()) CHECK(t.prob(q, ctx) > 0.0);
      const auto ranked = t.predict(ctx).ranked;
      for (std::size_t k = 1; k < ranked.size(); ++k) {
        const auto& [v0, p0] = ranked[k - 1];
        const auto& [v1, p1] = ranked[k];
        CHECK((p0 > p1 || (p0 == p1 && v0 < v1)));
      }
    }
  }
}

TEST_CASE("training order does not change counters") {
  Rng rng(5);
  const auto c = random_corpus(rng);
  ContextTree fwd(c.kappa), rev(c.kappa);
  std::vector<std::pair<ContextKey, VenueIdx>> ev;
  for (std::size_t k = 0; k < c.history.size(); ++k) {
    ev.emplace_back(make_context(std::span(c.history).first(k), c.history[k].timestamp, kTime, c.kappa),
                    c.history[k].venue);
  }
  for (const auto& [ctx, q] : ev) fwd.add(ctx, q);
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) rev.add(it->first, it->second);
  for (const auto& [ctx, q] : ev) {
    const auto path = context_path(ctx, c.kappa);
    for (std::size_t d = 0; d <= path.size(); ++d) {
      const auto s = std::span(path).first(d);
      CHECK(fwd.count(s, q) == rev.count(s, q));
      CHECK(fwd.total(s) == rev.total(s));
    }
  }
}

TEST_CASE("json round trip") {
  Rng rng(11);
  const auto c = random_corpus(rng);
  ContextTree t(c.kappa);
  t.train(c.history, kTime);
  const auto back = ContextTree::from_json(nlohmann::json::parse(t.to_json().dump()));
  CHECK(back == t);
  CHECK_THROWS_AS(ContextTree::from_json(nlohmann::json{{"format", "x"}}), SchemaError);
}
