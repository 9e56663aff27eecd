#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mobsoc/types.hpp"

namespace mobsoc {

// Neighbourhood-based social cohesion between two users. All throw
// UnknownNode when either index is outside the graph.

std::size_t common_neighbors(const SocialGraph& g, std::uint32_t i, std::uint32_t j);

/// Sum of 1/ln(deg k) over common neighbours k; degree-1 neighbours skipped.
double adamic_adar(const SocialGraph& g, std::uint32_t i, std::uint32_t j);

/// |N(i) ∩ N(j)| / |N(i) ∪ N(j)|, 0 when both neighbourhoods are empty.
double jaccard_users(const SocialGraph& g, std::uint32_t i, std::uint32_t j);

/// Edge density among N(i) ∪ N(j) \ {i, j}; 0 when fewer than two such nodes.
double degree_of_cliquishness(const SocialGraph& g, std::uint32_t i, std::uint32_t j);

/// Average local clustering coefficient; nodes of degree < 2 count as 0.
double clustering_coefficient(const SocialGraph& g);

/// Shortest-path length statistics over reachable pairs, estimated by BFS
/// from `sample_size` sources drawn without replacement (all nodes when
/// sample_size >= n).
MeanStd avg_path_length(const SocialGraph& g, std::size_t sample_size,
                        std::uint64_t seed);

/// Erdős-Rényi G(n, p) with p = avg_degree / (n - 1).
SocialGraph poisson_random_graph(std::size_t n, double avg_degree,
                                 std::uint64_t seed);

/// Subgraph induced by `nodes`; node k of the result is nodes[k].
SocialGraph induced_subgraph(const SocialGraph& g, std::span<const std::uint32_t> nodes);

enum class SubgroupKind { Clique, TwoPlex };

struct Subgroup {
  std::vector<std::uint32_t> members;  // sorted
  SubgroupKind kind = SubgroupKind::Clique;
  double cohesion = 0.0;
};

struct EnumerationOptions {
  std::size_t min_size = 3;  // values below 3 are raised to 3
  std::size_t max_count = 0;  // 0 = unlimited
};

struct Enumeration {
  std::vector<Subgroup> groups;  // members sorted, groups in canonical order
  bool truncated = false;
};

/// Maximal cliques with at least min_size members.
Enumeration enumerate_cliques(const SocialGraph& g, const EnumerationOptions& opts = {});

/// Maximal 2-plexes (every member adjacent to >= |S| - 2 others in S) with
/// at least min_size members.
Enumeration enumerate_two_plexes(const SocialGraph& g,
                                 const EnumerationOptions& opts = {});

bool is_clique(const SocialGraph& g, std::span<const std::uint32_t> members);
bool is_two_plex(const SocialGraph& g, std::span<const std::uint32_t> members);

inline constexpr double kUnboundedCohesion = std::numeric_limits<double>::infinity();

/// Ratio of internal edge density to boundary edge density:
///   (sum_{i,j in U} A_ij / (|U|(|U|-1))) / (sum_{i in U, j notin U} A_ij / (|U|(|V-U|-1)))
/// Returns kUnboundedCohesion when the group has no boundary edges.
double group_cohesion(const SocialGraph& g, std::span<const std::uint32_t> members);

}  // namespace mobsoc
