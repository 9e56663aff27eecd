#include "mobsoc/cohesion.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <queue>
#include <string>

#include "mobsoc/error.hpp"
#include "mobsoc/rng.hpp"

namespace mobsoc {

namespace {

void require_node(const SocialGraph& g, std::uint32_t v) {
  if (!g.has_node(v)) throw UnknownNode("unknown node " + std::to_string(v));
}

std::vector<std::uint32_t> intersection(std::span<const std::uint32_t> a,
                                        std::span<const std::uint32_t> b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::size_t intersection_size(std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

std::size_t common_neighbors(const SocialGraph& g, std::uint32_t i, std::uint32_t j) {
  require_node(g, i);
  require_node(g, j);
  return intersection_size(g.neighbors(i), g.neighbors(j));
}

double adamic_adar(const SocialGraph& g, std::uint32_t i, std::uint32_t j) {
  require_node(g, i);
  require_node(g, j);
  double score = 0.0;
  for (std::uint32_t k : intersection(g.neighbors(i), g.neighbors(j))) {
    const auto d = g.degree(k);
    if (d >= 2) score += 1.0 / std::log(static_cast<double>(d));
  }
  return score;
}

double jaccard_users(const SocialGraph& g, std::uint32_t i, std::uint32_t j) {
  require_node(g, i);
  require_node(g, j);
  const auto common = intersection_size(g.neighbors(i), g.neighbors(j));
  const auto uni = g.degree(i) + g.degree(j) - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

double degree_of_cliquishness(const SocialGraph& g, std::uint32_t i, std::uint32_t j) {
  require_node(g, i);
  require_node(g, j);
  std::vector<std::uint32_t> pool;
  std::set_union(g.neighbors(i).begin(), g.neighbors(i).end(),
                 g.neighbors(j).begin(), g.neighbors(j).end(),
                 std::back_inserter(pool));
  std::erase_if(pool, [&](std::uint32_t v) { return v == i || v == j; });
  const auto m = pool.size();
  if (m < 2) return 0.0;
  std::size_t twice_edges = 0;
  for (std::uint32_t a : pool) twice_edges += intersection_size(g.neighbors(a), pool);
  const double possible = static_cast<double>(m) * static_cast<double>(m - 1);
  return static_cast<double>(twice_edges) / possible;
}

double clustering_coefficient(const SocialGraph& g) {
  const auto n = g.num_nodes();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto d = g.degree(v);
    if (d < 2) continue;
    std::size_t twice_links = 0;
    for (std::uint32_t u : g.neighbors(v)) {
      twice_links += intersection_size(g.neighbors(u), g.neighbors(v));
    }
    sum += static_cast<double>(twice_links) /
           (static_cast<double>(d) * static_cast<double>(d - 1));
  }
  return sum / static_cast<double>(n);
}

MeanStd avg_path_length(const SocialGraph& g, std::size_t sample_size,
                        std::uint64_t seed) {
  const auto n = g.num_nodes();
  if (g.num_edges() == 0) throw NoData("avg_path_length: graph has no edges");

  std::vector<std::uint32_t> order(n);
  for (std::uint32_t v = 0; v < n; ++v) order[v] = v;
  const auto k = std::min(sample_size, n);
  Rng rng(seed);
  for (std::size_t a = 0; a < k; ++a) {
    const auto b = a + uniform_index(rng, n - a);
    std::swap(order[a], order[b]);
  }

  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  std::size_t count = 0;
  std::vector<int> dist(n);
  std::queue<std::uint32_t> frontier;
  for (std::size_t s = 0; s < k; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[order[s]] = 0;
    frontier.push(order[s]);
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (std::uint32_t u : g.neighbors(v)) {
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          sum += dist[u];
          sum_sq += static_cast<long double>(dist[u]) * dist[u];
          ++count;
          frontier.push(u);
        }
      }
    }
  }
  if (count == 0) return {};
  const long double mean = sum / count;
  const long double var = std::max(0.0L, sum_sq / count - mean * mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
}

SocialGraph poisson_random_graph(std::size_t n, double avg_degree, std::uint64_t seed) {
  if (n < 2) throw ConfigError("poisson_random_graph: n must be >= 2");
  if (!(avg_degree >= 0.0) || avg_degree > static_cast<double>(n - 1)) {
    throw ConfigError("poisson_random_graph: avg_degree must lie in [0, n-1]");
  }
  const double p = avg_degree / static_cast<double>(n - 1);
  std::vector<SocialGraph::Edge> edges;
  if (p >= 1.0) {
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    }
  } else if (p > 0.0) {
    // Geometric skipping over the lower triangle (Batagelj & Brandes).
    Rng rng(seed);
    const double log_q = std::log1p(-p);
    long long v = 1;
    long long w = -1;
    const auto nn = static_cast<long long>(n);
    while (v < nn) {
      const double r = uniform01(rng);
      w += 1 + static_cast<long long>(std::floor(std::log1p(-r) / log_q));
      while (w >= v && v < nn) {
        w -= v;
        ++v;
      }
      if (v < nn) {
        edges.emplace_back(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(v));
      }
    }
  }
  return SocialGraph(n, edges);
}

SocialGraph induced_subgraph(const SocialGraph& g, std::span<const std::uint32_t> nodes) {
  constexpr auto absent = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(g.num_nodes(), absent);
  for (std::uint32_t k = 0; k < nodes.size(); ++k) {
    require_node(g, nodes[k]);
    remap[nodes[k]] = k;
  }
  std::vector<SocialGraph::Edge> edges;
  for (std::uint32_t k = 0; k < nodes.size(); ++k) {
    for (std::uint32_t u : g.neighbors(nodes[k])) {
      const auto m = remap[u];
      if (m != absent && k < m) edges.emplace_back(k, m);
    }
  }
  return SocialGraph(nodes.size(), edges);
}

bool is_clique(const SocialGraph& g, std::span<const std::uint32_t> members) {
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      if (!g.has_edge(members[a], members[b])) return false;
    }
  }
  return true;
}

bool is_two_plex(const SocialGraph& g, std::span<const std::uint32_t> members) {
  const auto size = members.size();
  for (std::uint32_t v : members) {
    std::size_t deg = 0;
    for (std::uint32_t u : members) {
      if (u != v && g.has_edge(u, v)) ++deg;
    }
    if (deg + 2 < size) return false;
  }
  return true;
}

namespace {

// Maximal-subgroup enumeration for a hereditary "at most `slack` missing
// links per member" property: slack 0 gives cliques, slack 1 gives 2-plexes.
// Binary inclusion/exclusion search; candidates that would break the property
// are dropped at every level, and excluded vertices certify non-maximality.
class SubgroupSearch {
 public:
  SubgroupSearch(const SocialGraph& g, int slack, const EnumerationOptions& opts,
                 SubgroupKind kind)
      : g_(g), slack_(slack), opts_(opts), kind_(kind) {
    opts_.min_size = std::max<std::size_t>(opts_.min_size, 3);
  }

  Enumeration run() {
    const auto n = static_cast<std::uint32_t>(g_.num_nodes());
    std::vector<char> mark(n, 0);
    for (std::uint32_t v = 0; v < n && !out_.truncated; ++v) {
      // Every member of a subgroup of size >= 3 that contains v lies within
      // two hops of v (one hop for cliques).
      std::vector<std::uint32_t> reach;
      collect_reach(v, mark, reach);
      members_ = {v};
      missing_ = {0};
      std::vector<std::uint32_t> cand, excl;
      for (std::uint32_t w : reach) {
        if (!can_add(w)) continue;
        (w > v ? cand : excl).push_back(w);
      }
      if (opts_.min_size <= 1 + cand.size()) {
        expand(cand, excl);
      }
    }
    std::sort(out_.groups.begin(), out_.groups.end(),
              [](const Subgroup& a, const Subgroup& b) { return a.members < b.members; });
    return std::move(out_);
  }

 private:
  void collect_reach(std::uint32_t v, std::vector<char>& mark,
                     std::vector<std::uint32_t>& reach) {
    mark[v] = 1;
    for (std::uint32_t u : g_.neighbors(v)) {
      if (!mark[u]) {
        mark[u] = 1;
        reach.push_back(u);
      }
      if (slack_ == 0) continue;
      for (std::uint32_t w : g_.neighbors(u)) {
        if (!mark[w]) {
          mark[w] = 1;
          reach.push_back(w);
        }
      }
    }
    mark[v] = 0;
    for (std::uint32_t u : reach) mark[u] = 0;
    std::sort(reach.begin(), reach.end());
  }

  // Whether members_ + {w} still satisfies the property.
  bool can_add(std::uint32_t w) const {
    int missing_w = 0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (!g_.has_edge(members_[k], w)) {
        if (missing_[k] + 1 > slack_) return false;
        if (++missing_w > slack_) return false;
      }
    }
    return true;
  }

  void push(std::uint32_t w) {
    int missing_w = 0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (!g_.has_edge(members_[k], w)) {
        ++missing_[k];
        ++missing_w;
      }
    }
    members_.push_back(w);
    missing_.push_back(missing_w);
  }

  void pop() {
    const auto w = members_.back();
    members_.pop_back();
    missing_.pop_back();
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (!g_.has_edge(members_[k], w)) --missing_[k];
    }
  }

  void report() {
    if (opts_.max_count != 0 && out_.groups.size() >= opts_.max_count) {
      out_.truncated = true;
      return;
    }
    Subgroup s;
    s.members = members_;
    std::sort(s.members.begin(), s.members.end());
    s.kind = kind_;
    s.cohesion = group_cohesion(g_, s.members);
    out_.groups.push_back(std::move(s));
  }

  void expand(const std::vector<std::uint32_t>& cand,
              const std::vector<std::uint32_t>& excl) {
    if (cand.empty()) {
      if (excl.empty() && members_.size() >= opts_.min_size) report();
      return;
    }
    if (members_.size() + cand.size() < opts_.min_size) return;

    std::vector<std::uint32_t> next_cand, next_excl;
    for (std::size_t idx = 0; idx < cand.size() && !out_.truncated; ++idx) {
      push(cand[idx]);
      next_cand.clear();
      next_excl.clear();
      for (std::size_t k = idx + 1; k < cand.size(); ++k) {
        if (can_add(cand[k])) next_cand.push_back(cand[k]);
      }
      for (std::uint32_t x : excl) {
        if (can_add(x)) next_excl.push_back(x);
      }
      for (std::size_t k = 0; k < idx; ++k) {
        if (can_add(cand[k])) next_excl.push_back(cand[k]);
      }
      expand(std::vector<std::uint32_t>(next_cand), std::vector<std::uint32_t>(next_excl));
      pop();
    }
  }

  const SocialGraph& g_;
  int slack_;
  EnumerationOptions opts_;
  SubgroupKind kind_;
  std::vector<std::uint32_t> members_;
  std::vector<int> missing_;
  Enumeration out_;
};

}  // namespace

Enumeration enumerate_cliques(const SocialGraph& g, const EnumerationOptions& opts) {
  return SubgroupSearch(g, 0, opts, SubgroupKind::Clique).run();
}

Enumeration enumerate_two_plexes(const SocialGraph& g, const EnumerationOptions& opts) {
  return SubgroupSearch(g, 1, opts, SubgroupKind::TwoPlex).run();
}

double group_cohesion(const SocialGraph& g, std::span<const std::uint32_t> members) {
  const auto n = g.num_nodes();
  std::vector<char> in(n, 0);
  for (std::uint32_t v : members) {
    require_node(g, v);
    if (in[v]) throw DegenerateInput("group_cohesion: duplicate member");
    in[v] = 1;
  }
  const auto size = members.size();
  if (size < 2) throw DegenerateInput("group_cohesion: need at least two members");

  std::size_t internal = 0;  // ordered pairs, i.e. each edge twice
  std::size_t boundary = 0;
  for (std::uint32_t v : members) {
    for (std::uint32_t u : g.neighbors(v)) (in[u] ? internal : boundary) += 1;
  }
  if (boundary == 0) return kUnboundedCohesion;

  const auto outside = n - size;
  const double inside_density =
      static_cast<double>(internal) / (static_cast<double>(size) * (size - 1));
  // |V-U| - 1 vanishes when a single node is left outside; use 1 there.
  const double outside_pairs =
      static_cast<double>(size) * static_cast<double>(std::max<std::size_t>(outside - 1, 1));
  return inside_density / (static_cast<double>(boundary) / outside_pairs);
}

}  // namespace mobsoc
