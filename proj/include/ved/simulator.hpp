#pragma once

// Monte Carlo estimation of codeword-error probabilities on the AWGN channel
// and the decoders used for it.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ved/codes.hpp"
#include "ved/geometry.hpp"

namespace ved::sim {

// Counter-based generator: the stream for (seed, stream id) is a pure
// function of both, so trials can be evaluated in any order on any worker.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Standard normal via Box-Muller; the second variate is cached.
  double gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// P(N(0,1) > x).
double q_function(double x);

inline constexpr double kZ95 = 1.959963984540054;

double wilson_half_width(std::size_t hits, std::size_t trials,
                         double z = kZ95);

struct RegionEstimate {
  std::size_t trials = 0;
  std::size_t hits = 0;
  double estimate = 0.0;
  double ci95 = 0.0;
};

// Fraction of N(0, sigma^2 I) draws over the union support of the problem
// that land in the codeword-error region.
RegionEstimate mc_region_probability(const geometry::VedProblem& problem,
                                     double sigma, std::size_t trials,
                                     std::uint64_t seed);

// Decoders take soft BPSK samples (bit 0 -> +sqrt(E_s)) and rank paths by
// correlation. Exact metric ties go to the lexicographically smaller input
// sequence. With `terminated` the path must end in state 0.

codes::Bits decode_viterbi(const codes::Trellis& trellis,
                           std::span<const double> received,
                           bool terminated = true);

struct RankedPath {
  codes::Bits input_bits;
  double metric = 0.0;
};

// Parallel list Viterbi: the `list_size` best distinct paths, best first.
std::vector<RankedPath> decode_list_viterbi(const codes::Trellis& trellis,
                                            std::span<const double> received,
                                            int list_size,
                                            bool terminated = true);

inline constexpr int kMaxListSize = 1024;

struct BreadthFirstResult {
  codes::Bits decoded;
  double metric = 0.0;
  bool correct_path_deleted = false;
  int deletion_step = -1;  // trellis step after which the reference vanished
  // States of the survivors after each step, best first (only when traced).
  std::vector<std::vector<std::uint32_t>> survivors;
};

// Breadth-first detection keeping the `survivors` best paths per step.
// Paths meeting in a state are merged as in Viterbi, so a budget of
// 2^memory survivors reproduces the Viterbi decision.
BreadthFirstResult decode_breadth_first(const codes::Trellis& trellis,
                                        std::span<const double> received,
                                        int survivors,
                                        const codes::Bits* reference = nullptr,
                                        bool terminated = true,
                                        bool record_trace = false);

enum class DecoderKind { kViterbi, kListViterbi, kBreadthFirst };

std::string_view to_string(DecoderKind kind);
DecoderKind parse_decoder(std::string_view name);

struct ChannelSpec {
  double ebno_db = 0.0;
  double rate = 0.5;
  double symbol_energy = 1.0;

  // N_0 / 2 with E_s = rate * E_b.
  double sigma_sq() const {
    return symbol_energy / (2.0 * rate * std::pow(10.0, ebno_db / 10.0));
  }
  double sigma() const { return std::sqrt(sigma_sq()); }
};

struct SimConfig {
  codes::ConvCode code{{05, 07}};
  DecoderKind decoder = DecoderKind::kViterbi;
  int list_size = 1;  // L for list Viterbi, B for breadth-first
  double ebno_db = 5.0;
  int info_len = 100;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  // VED used for the asymptote; defaults to default_min_ved().
  std::optional<double> min_ved;

  ChannelSpec channel() const { return {ebno_db, code.rate(), 1.0}; }
};

struct SimResult {
  double ebno_db = 0.0;
  DecoderKind decoder = DecoderKind::kViterbi;
  int list_size = 1;
  std::size_t trials = 0;
  std::size_t ce_count = 0;
  double p_ce = 0.0;
  double ci95 = 0.0;
  double asymptote = 0.0;  // Q(min_ved / sigma)
  double min_ved = 0.0;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

// sqrt(E_s d_free) for a single-path decoder; for larger lists the minimum
// over pairs/triples/... of merged events with weight <= d_free + 3 and
// offsets within 2 (memory + 1) steps, searched with a budget of 20000
// nodes. Lists the budget cannot resolve fall back to sqrt(E_s d_free).
double default_min_ved(const codes::ConvCode& code, int list_size);

// Throws kInvalidConfig on bad parameters.
void validate(const SimConfig& config);

struct Trial {
  codes::Bits input_bits;  // information bits followed by the flush zeros
  std::vector<double> received;
};

// Transmitted bits and noisy BPSK samples of trial `index`. The noise depends
// only on (seed, index), not on the decoder.
Trial make_trial(const SimConfig& config, std::uint64_t index);

// Whether trial `index` of `config` ends in a codeword error.
bool run_trial(const SimConfig& config, const codes::Trellis& trellis,
               std::uint64_t index);

SimResult simulate_ce(const SimConfig& config);

}  // namespace ved::sim
