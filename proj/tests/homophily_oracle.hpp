#pragma once

// Quadratic reference versions of the pairwise homophily measures.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <span>

#include "mobsoc/types.hpp"

namespace oracle {

using VenueWeight = std::function<double(mobsoc::VenueIdx)>;

inline double unit(mobsoc::VenueIdx) { return 1.0; }

inline bool within(mobsoc::Seconds a, mobsoc::Seconds b, mobsoc::Seconds window) {
  return std::llabs(a - b) <= window;
}

inline double col(std::span<const mobsoc::CheckIn> a, std::span<const mobsoc::CheckIn> b,
                  mobsoc::Seconds window, const VenueWeight& w = unit) {
  double s = 0;
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x.venue == y.venue && within(x.timestamp, y.timestamp, window)) s += w(x.venue);
    }
  }
  return s;
}

inline double situation_rate(std::span<const mobsoc::CheckIn> a,
                             std::span<const mobsoc::CheckIn> b, mobsoc::Seconds window,
                             const VenueWeight& w = unit) {
  double num = 0, den = 0;
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (!within(x.timestamp, y.timestamp, window)) continue;
      den += std::sqrt(w(x.venue) * w(y.venue));
      if (x.venue == y.venue) num += w(x.venue);
    }
  }
  return den > 0 ? num / den : 0.0;
}

inline double cosine(std::span<const mobsoc::CheckIn> a, std::span<const mobsoc::CheckIn> b,
                     const VenueWeight& w = unit) {
  std::map<std::uint32_t, double> va, vb;
  for (const auto& x : a) va[mobsoc::index(x.venue)] += w(x.venue);
  for (const auto& x : b) vb[mobsoc::index(x.venue)] += w(x.venue);
  double dot = 0, na = 0, nb = 0;
  for (auto& [k, x] : va) {
    na += x * x;
    dot += x * vb[k];
  }
  for (auto& [k, x] : vb) nb += x * x;
  return dot / std::sqrt(na * nb);
}

}  // namespace oracle
