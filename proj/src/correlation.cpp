#include "mobsoc/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mobsoc/cohesion.hpp"
#include "mobsoc/core.hpp"
#include "mobsoc/error.hpp"
#include "mobsoc/parallel.hpp"
#include "mobsoc/rng.hpp"

namespace mobsoc {

namespace {

void check_series(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DegenerateInput("series lengths differ");
  if (xs.size() < 3) throw DegenerateInput("need at least three points");
}

double two_sided_t_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double variance(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check_series(xs, ys);
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t m = k;
    while (m + 1 < order.size() && xs[order[m + 1]] == xs[order[k]]) ++m;
    const double r = 0.5 * static_cast<double>(k + m) + 1.0;
    for (std::size_t q = k; q <= m; ++q) ranks[order[q]] = r;
    k = m + 1;
  }
  return ranks;
}

RankCorrelation spearman(std::span<const double> xs, std::span<const double> ys) {
  check_series(xs, ys);
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  RankCorrelation out;
  out.rho = pearson(rx, ry);
  const double dof = static_cast<double>(xs.size()) - 2.0;
  const double denom = 1.0 - out.rho * out.rho;
  out.p_value = denom <= 0.0 ? 0.0 : two_sided_t_p(out.rho * std::sqrt(dof / denom), dof);
  return out;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DegenerateInput("welch_t_test: need two values per side");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double va = variance(a, ma) / static_cast<double>(a.size());
  const double vb = variance(b, mb) / static_cast<double>(b.size());
  TTest out;
  if (va + vb == 0.0) {
    if (ma == mb) return out;
    throw DegenerateInput("welch_t_test: zero variance with different means");
  }
  out.t = (ma - mb) / std::sqrt(va + vb);
  out.dof = (va + vb) * (va + vb) /
            (va * va / static_cast<double>(a.size() - 1) +
             vb * vb / static_cast<double>(b.size() - 1));
  out.p_value = two_sided_t_p(out.t, out.dof);
  return out;
}

double chi_square_uniform_p(std::span<const std::size_t> counts) {
  if (counts.size() < 2) throw DegenerateInput("chi-square needs two or more cells");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (total == 0.0) throw NoData("chi-square of empty counts");
  const double expect = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

PairSource parse_pair_source(const std::string& name) {
  if (name == "global") return PairSource::Global;
  if (name == "home_city" || name == "home-city") return PairSource::HomeCity;
  if (name == "two_plex" || name == "two-plex") return PairSource::TwoPlex;
  throw ConfigError("unknown pair source '" + name + "'");
}

std::string to_string(PairSource s) {
  switch (s) {
    case PairSource::Global: return "global";
    case PairSource::HomeCity: return "home_city";
    case PairSource::TwoPlex: return "two_plex";
  }
  return "global";
}

PairSample sample_pairs(std::span<const UserIdx> population, std::size_t n,
                        std::uint64_t seed, PairSource source) {
  if (population.size() < 2) throw NoData("sample_pairs: population below two users");
  PairSample out;
  out.source = source;
  out.seed = seed;
  out.pairs.reserve(n);
  Rng rng(seed);
  const auto size = population.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto a = uniform_index(rng, size);
    auto b = uniform_index(rng, size - 1);
    if (b >= a) ++b;
    out.pairs.emplace_back(population[a], population[b]);
  }
  return out;
}

PairSample sample_group_pairs(std::span<const UserSet> groups, std::size_t n,
                              std::uint64_t seed) {
  std::vector<std::size_t> usable;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() >= 2) usable.push_back(g);
  }
  if (usable.empty()) throw NoData("sample_group_pairs: no group with two members");
  PairSample out;
  out.source = PairSource::TwoPlex;
  out.seed = seed;
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const auto g = usable[uniform_index(rng, usable.size())];
    const auto& members = groups[g];
    const auto a = uniform_index(rng, members.size());
    auto b = uniform_index(rng, members.size() - 1);
    if (b >= a) ++b;
    out.pairs.emplace_back(members[a], members[b]);
    out.group.push_back(g);
  }
  return out;
}

std::vector<UserIdx> home_city_users(const Dataset& data, LatLon center, double radius_km) {
  std::vector<UserIdx> out;
  for (std::uint32_t u = 0; u < data.num_users(); ++u) {
    const auto h = data.history(UserIdx{u});
    if (h.empty()) continue;
    if (haversine_km(home_location(h), center) <= radius_km) out.push_back(UserIdx{u});
  }
  return out;
}

std::string strength_bucket(double r) {
  const double a = std::abs(r);
  if (a >= 0.7) return "very strong";
  if (a >= 0.4) return "strong";
  if (a >= 0.1) return "moderate";
  return "weak";
}

std::string to_string(CohesionMeasure m) {
  switch (m) {
    case CohesionMeasure::CN: return "CN";
    case CohesionMeasure::AA: return "AA";
    case CohesionMeasure::DoC: return "DoC";
    case CohesionMeasure::Jacc: return "Jacc";
  }
  return "CN";
}

CorrelationTable correlation_matrix(const Dataset& data, const PairSample& sample,
                                    std::span<const Measure> measures, std::size_t threads,
                                    const HomophilyParams& params) {
  const auto& g = data.graph();
  const auto n = sample.pairs.size();
  CorrelationTable table;
  const auto ncols = table.cols.size();

  std::vector<std::vector<double>> cohesion(ncols, std::vector<double>(n));
  parallel_for(n, threads, [&](std::size_t k) {
    const auto i = index(sample.pairs[k].first);
    const auto j = index(sample.pairs[k].second);
    cohesion[0][k] = static_cast<double>(common_neighbors(g, i, j));
    cohesion[1][k] = adamic_adar(g, i, j);
    cohesion[2][k] = degree_of_cliquishness(g, i, j);
    cohesion[3][k] = jaccard_users(g, i, j);
  });

  const HomophilyEvaluator eval(data, params);
  std::vector<std::vector<double>> homophily(measures.size(), std::vector<double>(n));
  parallel_for(n, threads, [&](std::size_t k) {
    for (std::size_t m = 0; m < measures.size(); ++m) {
      homophily[m][k] = eval(measures[m], sample.pairs[k].first, sample.pairs[k].second);
    }
  });

  for (const auto& m : measures) table.rows.push_back(m.label());
  table.cells.assign(measures.size(), std::vector<CorrelationCell>(ncols));
  parallel_for(measures.size() * ncols, threads, [&](std::size_t k) {
    const auto m = k / ncols;
    const auto c = k % ncols;
    auto& cell = table.cells[m][c];
    try {
      cell.r = pearson(homophily[m], cohesion[c]);
      const auto s = spearman(homophily[m], cohesion[c]);
      cell.rho = s.rho;
      cell.p_value = s.p_value;
    } catch (const DegenerateInput&) {
      cell = {std::nan(""), std::nan(""), std::nan(""), true};
    }
  });
  return table;
}

void write_csv(std::ostream& out, const CorrelationTable& table, bool with_rank) {
  out << "measure";
  for (auto c : table.cols) out << ',' << to_string(c);
  if (with_rank) {
    for (auto c : table.cols) out << ',' << to_string(c) << "_rho," << to_string(c) << "_p";
  }
  out << '\n';
  auto num = [&](double x) -> std::ostream& {
    if (std::isnan(x)) return out << "nan";
    return out << x;
  };
  for (std::size_t m = 0; m < table.rows.size(); ++m) {
    out << table.rows[m];
    for (const auto& cell : table.cells[m]) {
      out << ',';
      num(cell.r);
    }
    if (with_rank) {
      for (const auto& cell : table.cells[m]) {
        out << ',';
        num(cell.rho) << ',';
        num(cell.p_value);
      }
    }
    out << '\n';
  }
}

}  // namespace mobsoc
