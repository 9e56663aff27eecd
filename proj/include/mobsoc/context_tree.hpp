#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobsoc/types.hpp"

namespace mobsoc {

/// Node label: a venue or one temporal feature.
struct Label {
  enum class Kind : std::uint8_t { Venue = 0, Week = 1, Day = 2, Slot = 3 };

  Kind kind = Kind::Venue;
  std::uint32_t value = 0;

  static Label venue(VenueIdx v) { return {Kind::Venue, index(v)}; }

  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(kind) << 32) | value;
  }
  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label& a, const Label& b) { return a.key() <=> b.key(); }
};

/// Rooted tree keyed by label paths, carrying a payload per node. Node 0 is
/// the root. Children are kept sorted by label.
template <class Payload>
class LabelTree {
 public:
  using NodeId = std::uint32_t;

  struct Node {
    Label label;
    NodeId parent = 0;
    std::uint32_t depth = 0;
    std::vector<std::pair<Label, NodeId>> children;
    Payload data{};
  };

  LabelTree() : nodes_(1) {}

  static constexpr NodeId root() { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId n) const { return nodes_[n]; }
  Node& node(NodeId n) { return nodes_[n]; }

  std::optional<NodeId> child(NodeId n, Label l) const {
    const auto& ch = nodes_[n].children;
    const auto it = std::lower_bound(ch.begin(), ch.end(), l,
                                     [](const auto& e, Label x) { return e.first < x; });
    if (it == ch.end() || it->first != l) return std::nullopt;
    return it->second;
  }

  NodeId child_or_insert(NodeId n, Label l) {
    auto& ch = nodes_[n].children;
    const auto it = std::lower_bound(ch.begin(), ch.end(), l,
                                     [](const auto& e, Label x) { return e.first < x; });
    if (it != ch.end() && it->first == l) return it->second;
    const auto id = static_cast<NodeId>(nodes_.size());
    const auto pos = it - ch.begin();
    const auto depth = nodes_[n].depth + 1;
    nodes_.push_back(Node{l, n, depth, {}, {}});
    auto& ch2 = nodes_[n].children;  // push_back may have moved the vector
    ch2.insert(ch2.begin() + pos, {l, id});
    return id;
  }

  /// Nodes along `path` that exist, starting with the root.
  std::vector<NodeId> chain(std::span<const Label> path) const {
    std::vector<NodeId> out{root()};
    for (const auto& l : path) {
      const auto next = child(out.back(), l);
      if (!next) break;
      out.push_back(*next);
    }
    return out;
  }

  /// Creates missing nodes; returns the chain including the root.
  std::vector<NodeId> insert_path(std::span<const Label> path) {
    std::vector<NodeId> out{root()};
    for (const auto& l : path) out.push_back(child_or_insert(out.back(), l));
    return out;
  }

 private:
  std::vector<Node> nodes_;
};

/// Spatial and temporal context of a prediction: previous venues (oldest
/// first, most recent last) plus the temporal features of the target time.
struct ContextKey {
  std::vector<VenueIdx> spatial;
  TemporalContext temporal;

  friend bool operator==(const ContextKey&, const ContextKey&) = default;
};

/// Context for predicting a visit at time `t` after the check-ins `prior`
/// (time-sorted, all strictly before t).
ContextKey make_context(std::span<const CheckIn> prior, Seconds t, const TimeConfig& time,
                        std::size_t kappa);

/// Label path of a context: up to kappa venues, most recent first, then
/// week class, day of week and slot. The longest proper suffix of a context
/// is its path minus the last label.
std::vector<Label> context_path(const ContextKey& ctx, std::size_t kappa);

/// Temporal labels only: week class, day of week, slot.
std::vector<Label> temporal_path(const TemporalContext& t);

struct SymbolCounts {
  std::vector<std::pair<VenueIdx, std::uint64_t>> counts;  // sorted by venue
  std::uint64_t total = 0;

  std::uint64_t count(VenueIdx q) const;
  void add(VenueIdx q, std::uint64_t n);
};

struct Prediction {
  std::vector<std::pair<VenueIdx, double>> ranked;  // prob desc, venue asc
  double escape_to_root = 1.0;  // product of escapes from the deepest node
  std::size_t matched_depth = 0;
};

struct MassBreakdown {
  double symbols = 0.0;   // sum of P(q|s) over the alphabet
  double shadowed = 0.0;  // escape mass that lands on symbols already
                          // predicted at a longer context
};

/// Prediction-by-partial-matching tree over spatial-temporal contexts.
///   P(q|s) = C(sq) / (|S_s| + N_s)              if q was seen after s
///          = |S_s| / (|S_s| + N_s) * P(q|suf s)  otherwise
///   P(q|empty) = 1 / |alphabet|
/// Contexts never seen in training escape with probability 1.
class ContextTree {
 public:
  explicit ContextTree(std::size_t kappa = 3) : kappa_(kappa) {}

  std::size_t kappa() const { return kappa_; }

  /// Counts one event: symbol q after context ctx, at the root and at
  /// every node along the context path.
  void add(const ContextKey& ctx, VenueIdx q);

  /// Trains on a time-sorted history, each event with the context built
  /// from the events before it.
  void train(std::span<const CheckIn> history, const TimeConfig& time);

  bool empty() const { return tree_.node(0).data.total == 0; }
  std::uint64_t num_events() const { return tree_.node(0).data.total; }
  std::size_t num_nodes() const { return tree_.size(); }

  /// Symbols seen in training, ascending.
  std::vector<VenueIdx> alphabet() const;

  /// C(sq) for a label path s; 0 when the path does not exist.
  std::uint64_t count(std::span<const Label> path, VenueIdx q) const;
  /// Total events through the node of a path; 0 when absent.
  std::uint64_t total(std::span<const Label> path) const;

  /// P(q|s). alphabet_size 0 means the number of trained symbols.
  /// Throws ModelEmpty on an untrained tree.
  double prob(VenueIdx q, const ContextKey& ctx, std::size_t alphabet_size = 0) const;

  /// Ranks the trained symbols, or `closed_alphabet` when given (which
  /// should contain every trained symbol). Throws ModelEmpty.
  Prediction predict(const ContextKey& ctx,
                     std::span<const VenueIdx> closed_alphabet = {}) const;

  /// P(q|s) for several symbols at once, in the order given.
  std::vector<double> probs(std::span<const VenueIdx> symbols, const ContextKey& ctx,
                            std::size_t alphabet_size = 0) const;

  /// Escape probability from the deepest matching node down to the empty
  /// context.
  double escape_to_root(const ContextKey& ctx) const;

  MassBreakdown mass_breakdown(const ContextKey& ctx,
                               std::span<const VenueIdx> alphabet) const;

  nlohmann::json to_json() const;
  static ContextTree from_json(const nlohmann::json& j);

  friend bool operator==(const ContextTree& a, const ContextTree& b);

 private:
  using Tree = LabelTree<SymbolCounts>;

  // Chain of existing nodes for the context, root first.
  std::vector<Tree::NodeId> matched_chain(const ContextKey& ctx) const;

  std::size_t kappa_;
  Tree tree_;
};

}  // namespace mobsoc
