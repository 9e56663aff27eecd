#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mobsoc/dataset.hpp"
#include "mobsoc/homophily.hpp"
#include "mobsoc/types.hpp"

namespace mobsoc {

/// Product-moment correlation. Throws DegenerateInput for fewer than three
/// points, mismatched lengths or a constant series.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct RankCorrelation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, t approximation with n - 2 dof
};

/// Spearman's rho with average ranks for ties.
RankCorrelation spearman(std::span<const double> xs, std::span<const double> ys);

/// Average ranks (1-based), ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> xs);

struct TTest {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Unpaired two-sided Welch test. Needs two or more values per side.
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

/// Upper-tail probability of the chi-square statistic of `counts` against
/// the uniform distribution.
double chi_square_uniform_p(std::span<const std::size_t> counts);

enum class PairSource { Global, HomeCity, TwoPlex };

PairSource parse_pair_source(const std::string& name);
std::string to_string(PairSource s);

struct PairSample {
  std::vector<std::pair<UserIdx, UserIdx>> pairs;
  std::vector<std::size_t> group;  // chosen subgroup per pair (two_plex only)
  PairSource source = PairSource::Global;
  std::uint64_t seed = 0;
};

/// `n` pairs of distinct users drawn uniformly with replacement.
/// Throws NoData when the population has fewer than two users.
PairSample sample_pairs(std::span<const UserIdx> population, std::size_t n,
                        std::uint64_t seed, PairSource source = PairSource::Global);

/// `n` pairs, each from one uniformly chosen group. Groups with fewer than
/// two members are never chosen; throws NoData when none is left.
PairSample sample_group_pairs(std::span<const UserSet> groups, std::size_t n,
                              std::uint64_t seed);

/// Users with check-ins whose home location lies within `radius_km` of
/// `center`.
std::vector<UserIdx> home_city_users(const Dataset& data, LatLon center, double radius_km);

/// "very strong" (>= 0.7), "strong" [0.4, 0.7), "moderate" [0.1, 0.4),
/// otherwise "weak", all on |r|.
std::string strength_bucket(double r);

enum class CohesionMeasure { CN, AA, DoC, Jacc };
std::string to_string(CohesionMeasure m);

struct CorrelationCell {
  double r = 0.0;
  double rho = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // one of the series was constant
};

struct CorrelationTable {
  std::vector<std::string> rows;
  std::vector<CohesionMeasure> cols{CohesionMeasure::CN, CohesionMeasure::AA,
                                    CohesionMeasure::DoC, CohesionMeasure::Jacc};
  std::vector<std::vector<CorrelationCell>> cells;  // [row][col]
};

/// Homophily measures (rows) against neighbourhood cohesion (columns) over
/// the sampled pairs. `threads` caps the worker count; the result does not
/// depend on it.
CorrelationTable correlation_matrix(const Dataset& data, const PairSample& sample,
                                    std::span<const Measure> measures,
                                    std::size_t threads = 1,
                                    const HomophilyParams& params = {});

/// CSV with one row per measure: `measure,CN,AA,DoC,Jacc` holding r, and
/// when `with_rank` the extra columns `<col>_rho,<col>_p`.
void write_csv(std::ostream& out, const CorrelationTable& table, bool with_rank = false);

}  // namespace mobsoc
