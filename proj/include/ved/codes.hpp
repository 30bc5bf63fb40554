#pragma once

// Binary feedforward rate-1/n convolutional codes, their trellises and error
// events, and the BPSK signal-space view of those events.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "ved/geometry.hpp"

namespace ved::codes {

using Bits = std::vector<std::uint8_t>;

// Generators are given in octal with the most significant tap applied to the
// current input bit, as in the usual code tables: (5,7) is g0 = 101,
// g1 = 111. Output bit j of every branch comes from generator j.
class ConvCode {
 public:
  static constexpr int kMaxMemory = 31;

  // `generators` holds tap masks (already converted from octal). A memory of
  // -1 infers it from the widest generator.
  explicit ConvCode(std::vector<std::uint32_t> generators, int memory = -1);

  // "rate=1/2 gens=5,7 mem=2"; rate and mem are optional but checked when
  // present.
  static ConvCode parse(std::string_view spec);

  const std::vector<std::uint32_t>& generators() const { return generators_; }
  int k0() const { return 1; }
  int n0() const { return static_cast<int>(generators_.size()); }
  int memory() const { return memory_; }
  double rate() const { return 1.0 / n0(); }
  std::string to_string() const;

  // Branch label for leaving `state` with input `bit`: bit j is the output
  // of generator j. `state` holds past inputs, newest in the lowest bit.
  std::uint32_t branch_output(std::uint32_t state, int bit) const;
  std::uint32_t next_state(std::uint32_t state, int bit) const {
    return ((state << 1) | static_cast<std::uint32_t>(bit)) & state_mask_;
  }

 private:
  std::vector<std::uint32_t> generators_;
  // Generators with taps reversed so that bit k multiplies the input from k
  // steps ago.
  std::vector<std::uint32_t> taps_;
  int memory_ = 0;
  std::uint32_t state_mask_ = 0;
};

std::uint32_t parse_octal(std::string_view digits);
std::string to_octal(std::uint32_t value);

Bits encode(const ConvCode& code, const Bits& bits, bool terminate);

class Trellis {
 public:
  static constexpr int kMaxMemory = 20;

  int memory() const { return memory_; }
  int n0() const { return n0_; }
  std::uint32_t num_states() const { return num_states_; }
  std::size_t num_branches() const { return 2 * static_cast<std::size_t>(num_states_); }

  std::uint32_t next(std::uint32_t state, int bit) const {
    return next_[2 * state + bit];
  }
  std::uint32_t output(std::uint32_t state, int bit) const {
    return output_[2 * state + bit];
  }
  // The two states leading into `state`; both use input bit `state & 1`.
  std::uint32_t predecessor(std::uint32_t state, int which) const {
    return (state >> 1) |
           (static_cast<std::uint32_t>(which) << (memory_ - 1));
  }

 private:
  friend Trellis build_trellis(const ConvCode& code);

  int memory_ = 0;
  int n0_ = 0;
  std::uint32_t num_states_ = 0;
  std::vector<std::uint32_t> next_;
  std::vector<std::uint32_t> output_;
};

// Throws kMemoryTooLarge above Trellis::kMaxMemory.
Trellis build_trellis(const ConvCode& code);

struct ErrorEvent {
  Bits input_bits;   // starts with 1; merged events include the flush zeros
  Bits output_bits;  // steps * n0 coded bits
  int weight = 0;
  bool merged = true;
  int steps = 0;
};

struct EnumerationBounds {
  int max_weight = 0;
  int max_steps = 32;
  bool include_unmerged = false;
  std::size_t cap = 1'000'000;
};

inline constexpr int kMaxEventSteps = 64;

struct EventPool {
  std::vector<ErrorEvent> events;
  EnumerationBounds bounds;
  // Open paths of max_steps steps with weight <= max_weight that were dropped
  // because unmerged events were not requested. Merged events longer than
  // max_steps weigh at least min_truncated_weight.
  std::size_t truncated_paths = 0;
  int min_truncated_weight = std::numeric_limits<int>::max();

  // Lower bound on the weight of any merged event missing from the pool.
  int excluded_weight_bound() const {
    return std::min(bounds.max_weight + 1, min_truncated_weight);
  }
};

// Sorted by (weight, steps, input bits). Throws kExplosion past bounds.cap.
EventPool enumerate_pool(const ConvCode& code, const EnumerationBounds& bounds);

inline std::vector<ErrorEvent> enumerate_events(const ConvCode& code,
                                                int max_weight, int max_steps,
                                                bool include_unmerged) {
  return enumerate_pool(code, {max_weight, max_steps, include_unmerged}).events;
}

int free_distance(const ConvCode& code);

struct SignalMapping {
  double symbol_energy = 1.0;
};

// Alternative minus transmitted signal for an all-zero reference: each
// flipped coded bit contributes -2 sqrt(E_s) at coordinate offset*n0 + j.
geometry::DiffVector event_to_diff(const ErrorEvent& event,
                                   const SignalMapping& mapping,
                                   std::int64_t offset);

std::string bits_to_string(const Bits& bits, int group = 0);

}  // namespace ved::codes
