#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobsoc/dataset.hpp"
#include "mobsoc/types.hpp"

namespace mobsoc {

// Mobile homophily between two users. Histories are time-sorted check-in
// sequences of one user each; an empty history makes every measure 0.

enum class WeightKind { None, Density, DistanceFromHome, Population, Entropy, ExtraRole };

struct WeightScheme {
  WeightKind kind = WeightKind::None;
  double min_distance_km = 0.5;  // floor for the home-distance weight
};

/// Accepts none, density|dens, distance|dist, population|pop, entropy|entr,
/// user (alias of population) and extra_role. Throws ConfigError otherwise.
WeightScheme parse_weight_scheme(const std::string& name);
std::string to_string(WeightKind kind);

/// Venue weights and per-pair factors for one scheme over one dataset.
///   density    ln(1 + density)
///   distance   ln(1 + max(km between homes, min_distance_km)), per user pair
///   population 1 / ln(2 + population)
///   entropy    1 / (1 + H(l))
/// The extra-role scheme has no definition and throws Unsupported.
class Weighting {
 public:
  Weighting() = default;
  Weighting(const Dataset& data, const WeightScheme& scheme);

  double venue(VenueIdx v) const { return venue_.empty() ? 1.0 : venue_[index(v)]; }
  double pair(UserIdx a, UserIdx b) const;
  WeightKind kind() const { return scheme_.kind; }

 private:
  WeightScheme scheme_;
  std::vector<double> venue_;
  std::vector<LatLon> home_;
  std::vector<char> has_home_;
};

/// Weighted number of same-venue visit pairs whose times differ by at most
/// `window`.
double colocation_count(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                        Seconds window = kWeek, const Weighting& w = {});

struct ObservationPeriod {
  Seconds start = 0;
  Seconds end = 0;
};

/// Sum over venues of p_i(l) * p_j(l), where p_u(l) is the share of u's
/// weekly visit indicators that fall on l. Weeks are counted from the start
/// of `period` (default: the span of both histories).
/// Throws InsufficientSpan when the period is shorter than one week.
double scol_rate(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                 std::optional<ObservationPeriod> period = std::nullopt);

/// Cosine similarity of the weighted per-venue visit-count vectors.
double spatial_cosine(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                      const Weighting& w = {});

/// Same-venue visit pairs within `window` over all visit pairs within
/// `window`. Weighted: a same-venue pair counts w(l), any pair
/// sqrt(w(l_a) w(l_b)). Returns 0 when no pair is within the window.
double social_situation_rate(std::span<const CheckIn> hi, std::span<const CheckIn> hj,
                             Seconds window = kHour, const Weighting& w = {});

/// Groups of friends at one venue within a sliding window. For every visit
/// starting a window [t, t + window], the visitors in that window are split
/// into friendship-connected components and the component of the starting
/// visitor is kept when it has two or more members. Groups contained in a
/// larger or earlier group at the same venue with an overlapping window are
/// dropped. Ordered by (window_start, venue).
std::vector<SocialSituation> detect_social_situations(const Dataset& data,
                                                      Seconds window = kHour);

enum class MeasureKind { Col, SCol, SCos, Situation };

struct Measure {
  MeasureKind kind = MeasureKind::SCos;
  WeightScheme scheme;

  /// Table label such as "SCos-Dens" or "s-Entr".
  std::string label() const;
};

/// Parses labels like "scos", "scos-dens", "col", "scol", "s-entr",
/// "situation-user". Throws ConfigError.
Measure parse_measure(const std::string& name);

/// Rows of the homophily/cohesion correlation tables, in table order.
std::vector<Measure> standard_measures();

struct HomophilyParams {
  Seconds col_window = kWeek;
  Seconds situation_window = kHour;
};

/// Evaluates measures for user pairs of `data`. SCol uses the dataset's
/// whole observation period. Weightings are built up front, so concurrent
/// calls are safe.
class HomophilyEvaluator {
 public:
  explicit HomophilyEvaluator(const Dataset& data, HomophilyParams params = {});

  double operator()(const Measure& m, UserIdx i, UserIdx j) const;

 private:
  const Dataset& data_;
  HomophilyParams params_;
  ObservationPeriod period_;
  std::map<WeightKind, Weighting> weightings_;
};

}  // namespace mobsoc
