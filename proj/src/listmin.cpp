#include "ved/listmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ved/error.hpp"

namespace ved::listmin {

namespace {

constexpr double kTieTol = 1e-12;

std::vector<Alternative> sorted_witness(const Universe& u,
                                        const std::vector<int>& items) {
  std::vector<Alternative> out;
  out.reserve(items.size());
  for (int i : items) out.push_back(u.items[i]);
  std::sort(out.begin(), out.end());
  return out;
}

double subset_ved(const Universe& u, const std::vector<int>& items,
                  geometry::Strategy strategy) {
  std::vector<geometry::DiffVector> vecs;
  vecs.reserve(items.size());
  for (int i : items) vecs.push_back(u.vectors[i]);
  return geometry::ved(geometry::gram_of(std::move(vecs)), strategy).ved;
}

struct Node {
  double ved;
  std::vector<int> items;  // ascending universe indices
};

struct NodeAfter {
  bool operator()(const Node& a, const Node& b) const {
    if (a.ved != b.ved) return a.ved > b.ved;
    return a.items > b.items;
  }
};

}  // namespace

geometry::VedProblem assemble(std::span<const codes::ErrorEvent> events,
                              std::span<const Alternative> picks,
                              const codes::SignalMapping& mapping) {
  std::vector<geometry::DiffVector> vecs;
  vecs.reserve(picks.size());
  for (const Alternative& a : picks) {
    if (a.event_id < 0 || static_cast<std::size_t>(a.event_id) >= events.size()) {
      throw Error(ErrorKind::kInvalidConfig,
                  "event id " + std::to_string(a.event_id) + " not in pool");
    }
    geometry::DiffVector v =
        codes::event_to_diff(events[a.event_id], mapping, a.offset);
    if (std::find(vecs.begin(), vecs.end(), v) != vecs.end()) {
      throw Error(ErrorKind::kDuplicateAlternative,
                  "alternative " + std::to_string(a.event_id) + "@" +
                      std::to_string(a.offset) + " repeats a signal vector");
    }
    vecs.push_back(std::move(v));
  }
  return geometry::gram_of(std::move(vecs));
}

Universe build_universe(const codes::EventPool& pool,
                        const SearchOptions& options) {
  if (options.window < 0) {
    throw Error(ErrorKind::kInvalidConfig, "offset window must be >= 0");
  }
  Universe u;
  for (std::int64_t off = 0; off <= options.window; ++off) {
    for (std::size_t e = 0; e < pool.events.size(); ++e) {
      geometry::DiffVector v =
          codes::event_to_diff(pool.events[e], options.mapping, off);
      if (std::find(u.vectors.begin(), u.vectors.end(), v) != u.vectors.end()) {
        continue;
      }
      u.items.push_back({static_cast<int>(e), off});
      u.vectors.push_back(std::move(v));
    }
  }
  return u;
}

bool better_witness(double ved_a, const std::vector<Alternative>& a,
                    double ved_b, const std::vector<Alternative>& b) {
  if (std::abs(ved_a - ved_b) <= kTieTol * std::max(ved_a, ved_b)) {
    return a < b;
  }
  return ved_a < ved_b;
}

ListSpec min_ved(const codes::EventPool& pool, int list_size,
                 const SearchOptions& options) {
  if (list_size < 1) {
    throw Error(ErrorKind::kInvalidConfig, "list size must be >= 1");
  }
  const Universe u = build_universe(pool, options);
  const int n = static_cast<int>(u.items.size());
  if (list_size > n) {
    throw Error(ErrorKind::kInvalidConfig,
                "list size " + std::to_string(list_size) + " exceeds the " +
                    std::to_string(n) + " distinct alternatives");
  }

  ListSpec best;
  best.list_size = list_size;
  best.min_ved = std::numeric_limits<double>::infinity();
  bool have = false;
  bool truncated = false;
  std::size_t explored = 0;

  auto prunable = [&](double v) {
    return have && v > best.min_ved * (1.0 + kTieTol);
  };
  auto offer_leaf = [&](double v, const std::vector<int>& items) {
    std::vector<Alternative> w = sorted_witness(u, items);
    if (!have || better_witness(v, w, best.min_ved, best.witness)) {
      best.min_ved = v;
      best.witness = std::move(w);
      have = true;
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeAfter> open;
  // Roots: alternatives at offset 0, which come first in universe order.
  for (int i = 0; i < n && u.items[i].offset == 0; ++i) {
    ++explored;
    std::vector<int> items{i};
    const double v = subset_ved(u, items, options.strategy);
    if (list_size == 1) {
      offer_leaf(v, items);
    } else {
      open.push({v, std::move(items)});
    }
  }

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (prunable(node.ved)) break;  // best-first: nothing left can win
    for (int j = node.items.back() + 1; j < n; ++j) {
      if (explored >= options.node_cap) {
        truncated = true;
        break;
      }
      ++explored;
      std::vector<int> items = node.items;
      items.push_back(j);
      const double v = subset_ved(u, items, options.strategy);
      if (prunable(v)) continue;
      if (static_cast<int>(items.size()) == list_size) {
        offer_leaf(v, items);
      } else {
        open.push({v, std::move(items)});
      }
    }
    if (truncated) break;
  }

  if (!have) {
    throw Error(ErrorKind::kExplosion,
                "node cap reached before any complete subset");
  }
  best.explored = explored;
  const int excluded_weight = pool.bounds.include_unmerged
                                  ? pool.bounds.max_weight + 1
                                  : pool.excluded_weight_bound();
  const double excluded_bound =
      std::sqrt(options.mapping.symbol_energy * excluded_weight);
  best.exact = !truncated && excluded_bound >= best.min_ved;
  return best;
}

ListSpec min_ved(const codes::ConvCode& code, int list_size,
                 const codes::EnumerationBounds& bounds,
                 const SearchOptions& options) {
  return min_ved(codes::enumerate_pool(code, bounds), list_size, options);
}

ListSizeResult minimal_list_size(const codes::EventPool& pool, double target,
                                 int max_list, const SearchOptions& options) {
  ListSizeResult out;
  out.target = target;
  const int universe = static_cast<int>(build_universe(pool, options).items.size());
  const int limit = std::min(max_list, universe);
  for (int b = 1; b <= limit; ++b) {
    out.table.push_back(min_ved(pool, b, options));
    if (out.table.back().min_ved >= target - 1e-9) {
      out.list_size = b;
      return out;
    }
  }
  throw Error(ErrorKind::kNotReached,
              "min VED stays below target " + std::to_string(target) +
                  " up to list size " + std::to_string(limit));
}

ListSizeResult minimal_list_size(const codes::ConvCode& code,
                                 const codes::EnumerationBounds& bounds,
                                 std::optional<double> target, int max_list,
                                 const SearchOptions& options) {
  if (!bounds.include_unmerged) {
    throw Error(ErrorKind::kInvalidConfig,
                "minimal list size needs unmerged events in the pool");
  }
  const double t = target.value_or(std::sqrt(
      options.mapping.symbol_energy * codes::free_distance(code)));
  return minimal_list_size(codes::enumerate_pool(code, bounds), t, max_list,
                           options);
}

std::string witness_to_string(const std::vector<Alternative>& witness) {
  std::string out;
  for (std::size_t i = 0; i < witness.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(witness[i].event_id) + "@" +
           std::to_string(witness[i].offset);
  }
  return out;
}

}  // namespace ved::listmin
