#pragma once

// Minimum VED over all L-subsets of time-shifted error events.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ved/codes.hpp"
#include "ved/geometry.hpp"

namespace ved::listmin {

// An error event from a pool, diverging `offset` trellis steps after the
// reference divergence point.
struct Alternative {
  int event_id = 0;
  std::int64_t offset = 0;

  friend auto operator<=>(const Alternative&, const Alternative&) = default;
};

struct ListSpec {
  int list_size = 0;
  double min_ved = 0.0;
  std::vector<Alternative> witness;  // sorted by (event_id, offset)
  std::size_t explored = 0;
  bool exact = false;
};

struct SearchOptions {
  std::int64_t window = 8;  // offsets range over [0, window]
  std::size_t node_cap = 10'000'000;
  codes::SignalMapping mapping;
  geometry::Strategy strategy = geometry::Strategy::kIterative;
};

// Throws kDuplicateAlternative when two picks map to the same signal vector.
geometry::VedProblem assemble(std::span<const codes::ErrorEvent> events,
                              std::span<const Alternative> picks,
                              const codes::SignalMapping& mapping);

// The (event, offset) universe searched by min_ved: offsets 0..window,
// ordered by (offset, event id), with duplicate signal vectors removed.
struct Universe {
  std::vector<Alternative> items;
  std::vector<geometry::DiffVector> vectors;
};

Universe build_universe(const codes::EventPool& pool,
                        const SearchOptions& options);

// Best-first branch and bound. Only subsets whose earliest alternative sits
// at offset 0 are visited, which removes the global time-shift symmetry.
// Hitting node_cap returns the incumbent with exact = false (throws
// kExplosion if there is none yet).
ListSpec min_ved(const codes::EventPool& pool, int list_size,
                 const SearchOptions& options = {});

ListSpec min_ved(const codes::ConvCode& code, int list_size,
                 const codes::EnumerationBounds& bounds,
                 const SearchOptions& options = {});

// True when `a` beats `b`: smaller VED, or equal VED within 1e-12 relative
// and a lexicographically smaller witness.
bool better_witness(double ved_a, const std::vector<Alternative>& a,
                    double ved_b, const std::vector<Alternative>& b);

struct ListSizeResult {
  int list_size = 0;
  double target = 0.0;
  std::vector<ListSpec> table;  // entry k is the optimum for list size k + 1
};

// Smallest B whose min_ved reaches target - 1e-9. Throws kNotReached when
// no B up to max_list (or the universe size) reaches it.
ListSizeResult minimal_list_size(const codes::EventPool& pool, double target,
                                 int max_list,
                                 const SearchOptions& options = {});

// Default target sqrt(E_s d_free). The pool must include unmerged events.
ListSizeResult minimal_list_size(const codes::ConvCode& code,
                                 const codes::EnumerationBounds& bounds,
                                 std::optional<double> target, int max_list,
                                 const SearchOptions& options = {});

std::string witness_to_string(const std::vector<Alternative>& witness);

}  // namespace ved::listmin
