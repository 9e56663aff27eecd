// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "graph_oracle.hpp"
#include "homophily_oracle.hpp"
#include "mobsoc/cohesion.hpp"
#include "mobsoc/context_tree.hpp"
#include "mobsoc/correlation.hpp"
#include "mobsoc/eval.hpp"
#include "mobsoc/homophily.hpp"
#include "mobsoc/rng.hpp"
#include "mobsoc/sost.hpp"
#include "mobsoc/synthgen.hpp"
#include "ppm_oracle.hpp"

using namespace mobsoc;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- context tree corpora -------------------------------------------------

const TimeConfig kTime{};
constexpr Seconds kMonday9 = 1609779600 + 8 * kHour;

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
    t += static_cast<Seconds>(uniform_index(rng, 3)) * kHour +
         static_cast<Seconds>(uniform_index(rng, 2)) * 6 * kDay;
    c.history.push_back({UserIdx{0}, VenueIdx{static_cast<std::uint32_t>(uniform_index(rng, c.alphabet))}, t, 0, 0});
  }
  return c;
}

// Runs `check` on every context of 100 random corpora.
void for_each_context(std::uint64_t seed,
                      const std::function<void(const ContextTree&, const ContextKey&, const Corpus&,
                                               const std::vector<oracle::Event>&)>& check) {
  Rng rng(seed);
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
    for (const auto& ctx : contexts) check(t, ctx, c, events);
  }
}

Verdict c1_ppm_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t n = 0;
  for_each_context(99, [&](const ContextTree& t, const ContextKey& ctx, const Corpus& c,
                           const std::vector<oracle::Event>& events) {
    const std::size_t a = c.alphabet + 2;
    const auto toks = tokens(ctx, c.kappa);
    for (std::uint32_t q = 0; q < a; ++q) {
      const double want = oracle::ppm_prob(events, toks, q, static_cast<double>(a));
      worst = std::max(worst, std::abs(t.prob(VenueIdx{q}, ctx, a) - want));
      ++n;
    }
  });
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          fmt("%zu probabilities on 100 corpora, max |diff| %.2e, %.2f s", n, worst, secs)};
}

Verdict c2_normalization() {
  double worst = 0.0;
  std::size_t n = 0;
  for_each_context(7, [&](const ContextTree& t, const ContextKey& ctx, const Corpus& c,
                          const std::vector<oracle::Event>&) {
    std::vector<VenueIdx> closed;
    for (std::uint32_t q = 0; q < c.alphabet + 2; ++q) closed.push_back(VenueIdx{q});
    const auto m = t.mass_breakdown(ctx, closed);
    worst = std::max(worst, std::abs(m.symbols + m.shadowed - 1.0));
    // Summing the per-symbol probabilities is the same statement seen from
    // the outside.
    double direct = 0.0;
    for (auto q : closed) direct += t.prob(q, ctx, closed.size());
    worst = std::max(worst, std::abs(direct + m.shadowed - 1.0));
    ++n;
  });
  return {worst <= 1e-9, fmt("%zu contexts, max |mass - 1| %.2e", n, worst)};
}

// ---- bounds ----------------------------------------------------------------

double fano_bisection(double h, double n) {
  const auto f = [&](double p) {
    const double hb = -p * std::log(p) - (1 - p) * std::log(1 - p);
    return hb + (1 - p) * std::log(n - 1) - h;
  };
  double lo = 1.0 / n, hi = 1.0 - 1e-15;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Verdict c3_bounds() {
  const auto b = predictability_bounds(3.48, 62, 0.38, 2.04);
  const bool lower = std::abs(b.lower - 0.0308) <= 0.0001;
  const bool upper = std::abs(b.upper - 0.390) <= 0.001;
  const double fano_diff = std::abs(b.fano - fano_bisection(3.48, 62));
  const bool fano = fano_diff <= 1e-6 && b.fano < 0.31;
  return {lower && upper && fano,
          fmt("lower %.5f (want 0.0308), upper %.5f (want 0.390 +- 0.001), fano %.5f (bisection diff %.1e)",
              b.lower, b.upper, b.fano, fano_diff)};
}

// ---- reduction ---------------------------------------------------------------

SostConfig plain_config() {
  SostConfig c;
  c.classes = ClassSet::none();
  c.use_trend = false;
  return c;
}

std::size_t reduction_mismatches(const Dataset& d, std::size_t& events) {
  const std::vector<SostConfig> cfgs{plain_config()};
  std::size_t bad = 0;
  for (auto u : d.active_users()) {
    for (const auto& o : evaluate_user(d, u, cfgs)) {
      ++events;
      bad += o.models[0] != o.st;
    }
  }
  return bad;
}

Verdict c4_reduction() {
  std::size_t events = 0, bad = 0;
  GenConfig g;
  g.n_users = 60;
  g.days = 30;
  const auto syn = generate(g);
  bad += reduction_mismatches(Dataset(syn.rows, syn.edges), events);

  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CheckInRow> rows;
    const auto users = 2 + uniform_index(rng, 4);
    const auto venues = 2 + uniform_index(rng, 8);
    for (std::size_t k = 0; k < 60; ++k) {
      rows.push_back({"u" + std::to_string(uniform_index(rng, users)), "v" + std::to_string(uniform_index(rng, venues)),
                      kMonday9 + static_cast<Seconds>(uniform_index(rng, 10 * kDay)), 0.0, 0.0});
    }
    std::vector<EdgeRow> edges;
    for (std::size_t a = 0; a < users; ++a) {
      for (std::size_t b = a + 1; b < users; ++b) {
        if (bernoulli(rng, 0.6)) edges.push_back({"u" + std::to_string(a), "u" + std::to_string(b)});
      }
    }
    bad += reduction_mismatches(Dataset(rows, edges), events);
  }
  return {bad == 0, fmt("%zu predictions, %zu differ from the plain spatio-temporal model", events, bad)};
}

// ---- synthetic improvement ----------------------------------------------------

Verdict c5_synthetic() {
  const auto t0 = Clock::now();
  GenConfig g;
  g.n_users = 200;
  g.days = 60;
  g.p_follow = 0.5;
  g.seed = 1;
  const auto syn = generate(g);
  const Dataset d(syn.rows, syn.edges);
  const auto r = evaluate(d, EvalConfig{});
  const double secs = seconds_since(t0);
  const auto acc = [&](const std::string& name) {
    for (const auto& v : r.variants) {
      if (v.name == name) return v.accuracy;
    }
    return std::nan("");
  };
  const double gain = acc("sost") - r.accuracy_st;
  const double no_drift = acc("no_drift") - r.accuracy_st;
  const double g1 = acc("class_I") - r.accuracy_st;
  const double g2 = acc("class_I+II") - r.accuracy_st;
  const double g3 = acc("class_I+II+III") - r.accuracy_st;
  const bool ok = gain >= 0.05 && gain >= no_drift - 0.01 && g1 <= g2 && g2 <= g3 && secs < 120.0;
  return {ok, fmt("st %.4f, gain %.4f, no-drift gain %.4f, class gains %.4f/%.4f/%.4f, %.1f s",
                  r.accuracy_st, gain, no_drift, g1, g2, g3, secs)};
}

// ---- cohesive subgroups ----------------------------------------------------------

std::set<std::vector<std::uint32_t>> as_set(const Enumeration& e) {
  std::set<std::vector<std::uint32_t>> out;
  for (const auto& g : e.groups) out.insert(g.members);
  return out;
}

Verdict c6_subgroups() {
  std::size_t bad = 0, groups = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    const std::size_t n = 2 + k % 11;
    const double p = 0.2 + 0.6 * static_cast<double>(k % 7) / 6.0;
    const auto g = oracle::random_graph(1000 + k, n, p);
    const auto cliques = as_set(enumerate_cliques(g));
    const auto plexes = as_set(enumerate_two_plexes(g));
    bad += cliques != oracle::maximal_sets(g, 0, 3);
    bad += plexes != oracle::maximal_sets(g, 1, 3);
    groups += cliques.size() + plexes.size();
  }
  return {bad == 0, fmt("200 graphs, %zu subgroups, %zu enumerations differ from brute force", groups, bad)};
}

Verdict c7_clustering() {
  const std::size_t n = 2000;
  const double d = 37.58;
  const auto g = poisson_random_graph(n, d, 17);
  const double c = clustering_coefficient(g);
  const double want = d / static_cast<double>(n - 1);
  const double rel = std::abs(c - want) / want;
  return {rel <= 0.25, fmt("clustering %.5f vs %.5f, off by %.1f%%", c, want, 100 * rel)};
}

// ---- drift -----------------------------------------------------------------------

Verdict c8_drift() {
  const double at = drift_factor(DriftKind::Exponential, 0.05, 20 * kHour, 1.0);
  const double diff = std::abs(at - std::exp(-1.0));
  Rng rng(8);
  std::size_t violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const double beta = uniform(rng, 0.001, 0.999);
    const double unit = uniform(rng, 0.1, 24.0);
    auto a = static_cast<Seconds>(uniform_index(rng, 60 * kDay));
    auto b = static_cast<Seconds>(uniform_index(rng, 60 * kDay));
    if (a > b) std::swap(a, b);
    for (auto kind : {DriftKind::Geometric, DriftKind::Exponential}) {
      const double fa = drift_factor(kind, beta, a, unit);
      const double fb = drift_factor(kind, beta, b, unit);
      violations += fb > fa || fa > 1.0 || fb < 0.0;
    }
  }
  return {diff <= 1e-12 && violations == 0,
          fmt("psi(20 h) - 1/e = %.1e, %zu monotonicity violations in 10000 samples", diff, violations)};
}

// ---- homophily -----------------------------------------------------------------------

std::vector<CheckIn> random_history(Rng& rng, std::uint32_t user, int n, int venues, Seconds span) {
  std::vector<CheckIn> h;
  for (int k = 0; k < n; ++k) {
    h.push_back({UserIdx{user}, VenueIdx{static_cast<std::uint32_t>(uniform_index(rng, static_cast<std::uint64_t>(venues)))},
                 kMonday9 + static_cast<Seconds>(uniform_index(rng, static_cast<std::uint64_t>(span))), 0, 0});
  }
  std::sort(h.begin(), h.end(), ByTime{});
  return h;
}

Verdict c9_homophily() {
  Rng rng(9);
  double worst = 0.0;
  const auto note = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  };
  for (int k = 0; k < 500; ++k) {
    const auto venues = 2 + static_cast<int>(uniform_index(rng, 10));
    const Seconds span = (1 + static_cast<Seconds>(uniform_index(rng, 30))) * kDay;
    const auto hi = random_history(rng, 0, 1 + static_cast<int>(uniform_index(rng, 40)), venues, span);
    const auto hj = random_history(rng, 1, 1 + static_cast<int>(uniform_index(rng, 40)), venues, span);
    note(colocation_count(hi, hj, kWeek), oracle::col(hi, hj, kWeek));
    note(spatial_cosine(hi, hj), oracle::cosine(hi, hj));
    note(social_situation_rate(hi, hj, kHour), oracle::situation_rate(hi, hj, kHour));
  }

  GenConfig g;
  g.p_follow = 0.0;
  g.p_cositu = 0.0;
  g.p_trend = 0.0;
  const auto syn = generate(g);
  const Dataset d(syn.rows, syn.edges);
  std::vector<UserIdx> all;
  for (std::uint32_t u = 0; u < d.num_users(); ++u) all.push_back(UserIdx{u});
  const auto measures = standard_measures();
  const auto table = correlation_matrix(d, sample_pairs(all, 10000, 5), measures, 0);
  double worst_r = 0.0;
  for (const auto& row : table.cells) {
    for (const auto& cell : row) {
      if (!cell.degenerate) worst_r = std::max(worst_r, std::abs(cell.r));
    }
  }
  return {worst <= 1e-10 && worst_r < 0.05,
          fmt("500 pairs, max diff %.1e; null corpus max |r| %.4f over 10000 pairs", worst, worst_r)};
}

// ---- causality -------------------------------------------------------------------------

std::vector<CheckInRow> causal_rows(Rng& rng) {
  std::vector<CheckInRow> rows;
  for (std::size_t k = 0; k < 80; ++k) {
    const Seconds t = kMonday9 + static_cast<Seconds>(k) * 3 * kHour;
    const auto here = "v" + std::to_string(uniform_index(rng, 6));
    rows.push_back({"u0", here, t, 0.0, 0.0});
    for (std::size_t f = 1; f <= 4; ++f) {
      if (bernoulli(rng, 0.7)) {
        // Friends often get there first.
        const auto v = bernoulli(rng, 0.5) ? here : "v" + std::to_string(uniform_index(rng, 8));
        rows.push_back({"u" + std::to_string(f), v, t - static_cast<Seconds>(uniform_index(rng, 2 * kHour)), 0.0, 0.0});
      }
    }
  }
  return rows;
}

std::string venue_name(const Dataset& d, std::optional<VenueIdx> v) {
  return v ? d.venue(*v).id : std::string("-");
}

Verdict c10_causality() {
  Rng rng(10);
  const auto rows = causal_rows(rng);
  const std::vector<EdgeRow> edges{{"u0", "u1"}, {"u0", "u2"}, {"u0", "u3"}, {"u1", "u2"}};
  const Dataset base_data(rows, edges);
  SostConfig full;
  full.classes = parse_classes("I+II+III");
  SostConfig one;
  one.classes = parse_classes("I");
  one.estimator = EstimatorKind::A;
  const std::vector<SostConfig> cfgs{full, one};
  const auto base = evaluate_user(base_data, *base_data.find_user("u0"), cfgs);
  std::size_t social = 0;
  for (const auto& o : base) social += o.models[0] != o.st;

  std::size_t changed_outcomes = 0, compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cut = base[uniform_index(rng, base.size())].timestamp;
    auto later = rows;
    std::vector<std::size_t> after;
    for (std::size_t k = 0; k < later.size(); ++k) {
      if (later[k].timestamp > cut) after.push_back(k);
    }
    if (after.empty()) continue;
    const auto pick = after[uniform_index(rng, after.size())];
    switch (uniform_index(rng, 4)) {
      case 0: later[pick].venue_id = "v" + std::to_string(uniform_index(rng, 12)); break;
      case 1: later[pick].timestamp += static_cast<Seconds>(uniform_index(rng, kDay)); break;
      case 2: later.erase(later.begin() + static_cast<std::ptrdiff_t>(pick)); break;
      default:
        later.push_back({"u" + std::to_string(uniform_index(rng, 5)), "v" + std::to_string(uniform_index(rng, 12)),
                         cut + 1 + static_cast<Seconds>(uniform_index(rng, kDay)), 0.0, 0.0});
    }
    const Dataset other(later, edges);
    const auto out = evaluate_user(other, *other.find_user("u0"), cfgs);
    for (std::size_t k = 0; k < base.size() && base[k].timestamp <= cut; ++k) {
      ++compared;
      bool same = k < out.size() && out[k].timestamp == base[k].timestamp &&
                  venue_name(base_data, base[k].st) == venue_name(other, out[k].st) &&
                  out[k].branch == base[k].branch;
      for (std::size_t m = 0; same && m < cfgs.size(); ++m) {
        same = venue_name(base_data, base[k].models[m]) == venue_name(other, out[k].models[m]);
      }
      changed_outcomes += !same;
    }
  }
  return {changed_outcomes == 0 && social > 0,
          fmt("1000 perturbations after t, %zu outcomes at or before t compared, %zu changed "
              "(social model departs from the plain one on %zu of %zu events)",
              compared, changed_outcomes, social, base.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
      {"context tree matches the recursive estimate", c1_ppm_oracle},
      {"predictive mass is normalized", c2_normalization},
      {"predictability bounds on reference inputs", c3_bounds},
      {"no social classes reduces to the spatio-temporal model", c4_reduction},
      {"social model improves accuracy on planted influence", c5_synthetic},
      {"clique and 2-plex enumeration match brute force", c6_subgroups},
      {"random graph clustering", c7_clustering},
      {"drift value and monotonicity", c8_drift},
      {"homophily measures match oracles, null corpus uncorrelated", c9_homophily},
      {"outcomes at t ignore later events", c10_causality},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
