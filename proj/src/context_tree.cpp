#include "mobsoc/context_tree.hpp"

#include <algorithm>

#include "mobsoc/error.hpp"

namespace mobsoc {

ContextKey make_context(std::span<const CheckIn> prior, Seconds t, const TimeConfig& time,
                        std::size_t kappa) {
  ContextKey ctx;
  const auto take = std::min(kappa, prior.size());
  for (const auto& c : prior.last(take)) ctx.spatial.push_back(c.venue);
  ctx.temporal = temporal_context(t, time);
  return ctx;
}

std::vector<Label> temporal_path(const TemporalContext& t) {
  return {Label{Label::Kind::Week, static_cast<std::uint32_t>(t.day_class)},
          Label{Label::Kind::Day, t.day_of_week},
          Label{Label::Kind::Slot, t.slot}};
}

std::vector<Label> context_path(const ContextKey& ctx, std::size_t kappa) {
  std::vector<Label> path;
  const auto take = std::min(kappa, ctx.spatial.size());
  for (std::size_t k = 0; k < take; ++k) {
    path.push_back(Label::venue(ctx.spatial[ctx.spatial.size() - 1 - k]));
  }
  for (const auto& l : temporal_path(ctx.temporal)) path.push_back(l);
  return path;
}

std::uint64_t SymbolCounts::count(VenueIdx q) const {
  const auto it = std::lower_bound(counts.begin(), counts.end(), q,
                                   [](const auto& e, VenueIdx x) { return e.first < x; });
  return it != counts.end() && it->first == q ? it->second : 0;
}

void SymbolCounts::add(VenueIdx q, std::uint64_t n) {
  auto it = std::lower_bound(counts.begin(), counts.end(), q,
                             [](const auto& e, VenueIdx x) { return e.first < x; });
  if (it != counts.end() && it->first == q) {
    it->second += n;
  } else {
    counts.insert(it, {q, n});
  }
  total += n;
}

namespace {

double escape_of(const SymbolCounts& s) {
  const double sigma = static_cast<double>(s.counts.size());
  return sigma / (sigma + static_cast<double>(s.total));
}

}  // namespace

void ContextTree::add(const ContextKey& ctx, VenueIdx q) {
  const auto path = context_path(ctx, kappa_);
  for (auto n : tree_.insert_path(path)) tree_.node(n).data.add(q, 1);
}

void ContextTree::train(std::span<const CheckIn> history, const TimeConfig& time) {
  for (std::size_t k = 0; k < history.size(); ++k) {
    add(make_context(history.first(k), history[k].timestamp, time, kappa_), history[k].venue);
  }
}

std::vector<VenueIdx> ContextTree::alphabet() const {
  std::vector<VenueIdx> out;
  for (const auto& [v, c] : tree_.node(0).data.counts) out.push_back(v);
  return out;
}

std::uint64_t ContextTree::count(std::span<const Label> path, VenueIdx q) const {
  const auto chain = tree_.chain(path);
  if (chain.size() != path.size() + 1) return 0;
  return tree_.node(chain.back()).data.count(q);
}

std::uint64_t ContextTree::total(std::span<const Label> path) const {
  const auto chain = tree_.chain(path);
  if (chain.size() != path.size() + 1) return 0;
  return tree_.node(chain.back()).data.total;
}

std::vector<ContextTree::Tree::NodeId> ContextTree::matched_chain(const ContextKey& ctx) const {
  if (empty()) throw ModelEmpty("context tree has no training events");
  return tree_.chain(context_path(ctx, kappa_));
}

namespace {

// P(q|s) where s is the node chain[depth]; chain[0] is the empty context.
template <class TreeT>
double chain_prob(const TreeT& tree, std::span<const std::uint32_t> chain, std::size_t depth,
                  VenueIdx q, double alphabet_size) {
  double factor = 1.0;
  for (std::size_t k = depth; k >= 1; --k) {
    const auto& s = tree.node(chain[k]).data;
    const auto c = s.count(q);
    const double denom = static_cast<double>(s.counts.size() + s.total);
    if (c > 0) return factor * static_cast<double>(c) / denom;
    factor *= static_cast<double>(s.counts.size()) / denom;
  }
  return factor / alphabet_size;
}

}  // namespace

double ContextTree::prob(VenueIdx q, const ContextKey& ctx, std::size_t alphabet_size) const {
  const auto chain = matched_chain(ctx);
  const double a = static_cast<double>(alphabet_size ? alphabet_size : tree_.node(0).data.counts.size());
  return chain_prob(tree_, chain, chain.size() - 1, q, a);
}

std::vector<double> ContextTree::probs(std::span<const VenueIdx> symbols, const ContextKey& ctx,
                                       std::size_t alphabet_size) const {
  const auto chain = matched_chain(ctx);
  const double a = static_cast<double>(alphabet_size ? alphabet_size : tree_.node(0).data.counts.size());
  std::vector<double> out;
  out.reserve(symbols.size());
  for (auto q : symbols) out.push_back(chain_prob(tree_, chain, chain.size() - 1, q, a));
  return out;
}

Prediction ContextTree::predict(const ContextKey& ctx,
                                std::span<const VenueIdx> closed_alphabet) const {
  const auto chain = matched_chain(ctx);
  const auto symbols = closed_alphabet.empty() ? alphabet()
                                               : std::vector<VenueIdx>(closed_alphabet.begin(),
                                                                       closed_alphabet.end());
  const double a = static_cast<double>(symbols.size());
  Prediction out;
  out.matched_depth = chain.size() - 1;
  for (auto q : symbols) out.ranked.emplace_back(q, chain_prob(tree_, chain, chain.size() - 1, q, a));
  std::sort(out.ranked.begin(), out.ranked.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  for (std::size_t k = 1; k < chain.size(); ++k) out.escape_to_root *= escape_of(tree_.node(chain[k]).data);
  return out;
}

double ContextTree::escape_to_root(const ContextKey& ctx) const {
  const auto chain = matched_chain(ctx);
  double e = 1.0;
  for (std::size_t k = 1; k < chain.size(); ++k) e *= escape_of(tree_.node(chain[k]).data);
  return e;
}

MassBreakdown ContextTree::mass_breakdown(const ContextKey& ctx,
                                          std::span<const VenueIdx> alphabet) const {
  const auto chain = matched_chain(ctx);
  const double a = static_cast<double>(alphabet.size());
  MassBreakdown out;
  const auto depth = chain.size() - 1;
  for (auto q : alphabet) out.symbols += chain_prob(tree_, chain, depth, q, a);
  // Escaping from s hands mass to the suffix distribution; the share of it
  // that falls on symbols already seen after s is never assigned.
  double shadow = 0.0;
  for (std::size_t k = 1; k <= depth; ++k) {
    const auto& s = tree_.node(chain[k]).data;
    double seen = 0.0;
    for (const auto& [q, c] : s.counts) seen += chain_prob(tree_, chain, k - 1, q, a);
    shadow = escape_of(s) * (seen + shadow);
  }
  out.shadowed = shadow;
  return out;
}

nlohmann::json ContextTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t n = 0; n < tree_.size(); ++n) {
    const auto& node = tree_.node(static_cast<Tree::NodeId>(n));
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [v, c] : node.data.counts) counts.push_back({index(v), c});
    nodes.push_back({{"kind", static_cast<int>(node.label.kind)},
                     {"value", node.label.value},
                     {"parent", node.parent},
                     {"counts", counts}});
  }
  return {{"format", "mobsoc-context-tree"}, {"version", 1}, {"kappa", kappa_}, {"nodes", nodes}};
}

ContextTree ContextTree::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "mobsoc-context-tree" || j.at("version") != 1) {
      throw SchemaError("not a context tree document");
    }
    ContextTree t(j.at("kappa").get<std::size_t>());
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty()) throw SchemaError("context tree without root");
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const auto& e = nodes[n];
      Tree::NodeId id = 0;
      if (n > 0) {
        const auto parent = e.at("parent").get<Tree::NodeId>();
        const auto kind = e.at("kind").get<int>();
        if (parent >= n || kind < 0 || kind > 3) throw SchemaError("bad node " + std::to_string(n));
        id = t.tree_.child_or_insert(
            parent, Label{static_cast<Label::Kind>(kind), e.at("value").get<std::uint32_t>()});
        if (id != n) throw SchemaError("duplicate node " + std::to_string(n));
      }
      for (const auto& c : e.at("counts")) {
        t.tree_.node(id).data.add(VenueIdx{c.at(0).get<std::uint32_t>()}, c.at(1).get<std::uint64_t>());
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("context tree: ") + e.what());
  }
}

bool operator==(const ContextTree& a, const ContextTree& b) {
  return a.to_json() == b.to_json();
}

}  // namespace mobsoc
