#pragma once

#include <span>

#include "mobsoc/types.hpp"

namespace mobsoc {

inline constexpr double kEarthRadiusKm = 6371.0088;

/// Great-circle distance in kilometres.
double haversine_km(LatLon a, LatLon b);

/// Centroid of the check-ins that fall into the densest cell of a square
/// grid (cell edge `cell_m` metres). Ties go to the lexicographically
/// smallest (row, col). Result does not depend on input order.
/// Throws NoData on an empty history.
LatLon home_location(std::span<const CheckIn> history, double cell_m = 500.0);

/// Shannon entropy (nats) of the empirical distribution given by `counts`.
/// Zero counts are skipped. Throws NoData if the total is zero.
double entropy(std::span<const double> counts);

/// Entropy of a user's distribution over visited venues.
double user_entropy(std::span<const CheckIn> history);

/// Entropy of a venue's distribution over visiting users.
double location_entropy(std::span<const CheckIn> visits);

/// Mean and population standard deviation; zeros for an empty input.
MeanStd mean_std(std::span<const double> xs);

}  // namespace mobsoc
