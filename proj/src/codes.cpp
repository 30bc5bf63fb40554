#include "ved/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>

#include "ved/error.hpp"

namespace ved::codes {

namespace {

int bit_length(std::uint32_t v) { return 32 - std::countl_zero(v); }

std::uint32_t reverse_bits(std::uint32_t v, int width) {
  std::uint32_t out = 0;
  for (int k = 0; k < width; ++k) {
    if ((v >> k) & 1u) out |= 1u << (width - 1 - k);
  }
  return out;
}

int parse_int(std::string_view s, const char* what) {
  int v = 0;
  std::size_t used = 0;
  try {
    v = std::stoi(std::string(s), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Error(ErrorKind::kParse,
                std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::uint32_t parse_octal(std::string_view digits) {
  if (digits.empty() || digits.size() > 10) {
    throw Error(ErrorKind::kParse, "bad octal generator '" +
                                       std::string(digits) + "'");
  }
  std::uint32_t v = 0;
  for (char c : digits) {
    if (c < '0' || c > '7') {
      throw Error(ErrorKind::kParse, "bad octal generator '" +
                                         std::string(digits) + "'");
    }
    v = v * 8 + static_cast<std::uint32_t>(c - '0');
  }
  return v;
}

std::string to_octal(std::uint32_t value) {
  std::ostringstream os;
  os << std::oct << value;
  return os.str();
}

ConvCode::ConvCode(std::vector<std::uint32_t> generators, int memory)
    : generators_(std::move(generators)) {
  if (generators_.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "code needs at least one generator");
  }
  int widest = 0;
  for (std::uint32_t g : generators_) {
    if (g == 0) throw Error(ErrorKind::kInvalidConfig, "zero generator");
    widest = std::max(widest, bit_length(g));
  }
  memory_ = memory < 0 ? widest - 1 : memory;
  if (memory_ < 1 || memory_ > kMaxMemory) {
    throw Error(ErrorKind::kInvalidConfig,
                "memory must be in [1, " + std::to_string(kMaxMemory) + "]");
  }
  if (widest > memory_ + 1) {
    throw Error(ErrorKind::kInvalidConfig,
                "generator wider than memory + 1 taps");
  }
  const std::uint32_t top = 1u << memory_;
  const bool canonical = std::any_of(
      generators_.begin(), generators_.end(),
      [top](std::uint32_t g) { return (g & top) && (g & 1u); });
  if (!canonical) {
    throw Error(ErrorKind::kInvalidConfig,
                "no generator has both its first and last tap set");
  }
  state_mask_ = top - 1;
  for (std::uint32_t g : generators_) taps_.push_back(reverse_bits(g, memory_ + 1));
}

ConvCode ConvCode::parse(std::string_view spec) {
  std::istringstream in{std::string(spec)};
  std::string tok;
  std::vector<std::uint32_t> gens;
  int memory = -1;
  int rate_den = -1;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kParse, "expected key=value, got '" + tok + "'");
    }
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "gens") {
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) gens.push_back(parse_octal(item));
    } else if (key == "mem") {
      memory = parse_int(value, "memory");
    } else if (key == "rate") {
      if (value.rfind("1/", 0) != 0) {
        throw Error(ErrorKind::kParse, "only rate 1/n codes are supported");
      }
      rate_den = parse_int(std::string_view(value).substr(2), "rate");
    } else {
      throw Error(ErrorKind::kParse, "unknown code key '" + key + "'");
    }
  }
  if (gens.empty()) throw Error(ErrorKind::kParse, "code spec lacks gens=");
  if (rate_den >= 0 && rate_den != static_cast<int>(gens.size())) {
    throw Error(ErrorKind::kInvalidConfig,
                "rate does not match the number of generators");
  }
  if (memory == 0 || memory < -1) {
    throw Error(ErrorKind::kInvalidConfig, "memory must be >= 1");
  }
  return ConvCode(std::move(gens), memory);
}

std::string ConvCode::to_string() const {
  std::string out = "rate=1/" + std::to_string(n0()) + " gens=";
  for (std::size_t j = 0; j < generators_.size(); ++j) {
    if (j) out += ',';
    out += to_octal(generators_[j]);
  }
  return out + " mem=" + std::to_string(memory_);
}

std::uint32_t ConvCode::branch_output(std::uint32_t state, int bit) const {
  const std::uint32_t reg =
      ((state << 1) | static_cast<std::uint32_t>(bit)) & ((state_mask_ << 1) | 1u);
  std::uint32_t label = 0;
  for (std::size_t j = 0; j < taps_.size(); ++j) {
    label |= static_cast<std::uint32_t>(std::popcount(reg & taps_[j]) & 1) << j;
  }
  return label;
}

Bits encode(const ConvCode& code, const Bits& bits, bool terminate) {
  Bits out;
  const int n0 = code.n0();
  out.reserve((bits.size() + code.memory()) * n0);
  std::uint32_t state = 0;
  auto step = [&](int b) {
    const std::uint32_t label = code.branch_output(state, b);
    for (int j = 0; j < n0; ++j) out.push_back((label >> j) & 1u);
    state = code.next_state(state, b);
  };
  for (std::uint8_t b : bits) step(b & 1);
  if (terminate) {
    for (int k = 0; k < code.memory(); ++k) step(0);
  }
  return out;
}

Trellis build_trellis(const ConvCode& code) {
  if (code.memory() > Trellis::kMaxMemory) {
    throw Error(ErrorKind::kMemoryTooLarge,
                "trellis memory " + std::to_string(code.memory()) + " > " +
                    std::to_string(Trellis::kMaxMemory));
  }
  Trellis t;
  t.memory_ = code.memory();
  t.n0_ = code.n0();
  t.num_states_ = 1u << code.memory();
  t.next_.resize(2 * t.num_states_);
  t.output_.resize(2 * t.num_states_);
  for (std::uint32_t s = 0; s < t.num_states_; ++s) {
    for (int b = 0; b < 2; ++b) {
      t.next_[2 * s + b] = code.next_state(s, b);
      t.output_[2 * s + b] = code.branch_output(s, b);
    }
  }
  return t;
}

EventPool enumerate_pool(const ConvCode& code, const EnumerationBounds& bounds) {
  if (bounds.max_steps < 1 || bounds.max_steps > kMaxEventSteps) {
    throw Error(ErrorKind::kInvalidConfig,
                "max_steps must be in [1, " + std::to_string(kMaxEventSteps) + "]");
  }
  const Trellis trellis = build_trellis(code);
  const int n0 = code.n0();
  EventPool pool;
  pool.bounds = bounds;
  if (bounds.max_weight <= 0) return pool;

  Bits input, output;
  // Depth-first over paths that leave state 0 with input 1 and have not yet
  // returned to it.
  std::function<void(std::uint32_t, int)> extend = [&](std::uint32_t state,
                                                       int weight) {
    const int steps = static_cast<int>(input.size());
    if (state == 0 || steps == bounds.max_steps) {
      if (state != 0 && !bounds.include_unmerged) {
        ++pool.truncated_paths;
        pool.min_truncated_weight = std::min(pool.min_truncated_weight, weight);
        return;
      }
      if (pool.events.size() >= bounds.cap) {
        throw Error(ErrorKind::kExplosion,
                    "more than " + std::to_string(bounds.cap) + " error events");
      }
      pool.events.push_back({input, output, weight, state == 0, steps});
      return;
    }
    for (int b = 0; b < 2; ++b) {
      const std::uint32_t label = trellis.output(state, b);
      const int w = weight + std::popcount(label);
      if (w > bounds.max_weight) continue;
      input.push_back(static_cast<std::uint8_t>(b));
      for (int j = 0; j < n0; ++j) output.push_back((label >> j) & 1u);
      extend(trellis.next(state, b), w);
      input.pop_back();
      output.resize(output.size() - n0);
    }
  };

  const std::uint32_t first = trellis.output(0, 1);
  const int w0 = std::popcount(first);
  if (w0 <= bounds.max_weight) {
    input.push_back(1);
    for (int j = 0; j < n0; ++j) output.push_back((first >> j) & 1u);
    extend(trellis.next(0, 1), w0);
  }

  std::sort(pool.events.begin(), pool.events.end(),
            [](const ErrorEvent& a, const ErrorEvent& b) {
              return std::tie(a.weight, a.steps, a.input_bits) <
                     std::tie(b.weight, b.steps, b.input_bits);
            });
  return pool;
}

int free_distance(const ConvCode& code) {
  // Best-first (Dijkstra) over trellis states: the first time state 0 is
  // settled, no open path of smaller weight remains, so its distance is the
  // minimum merged-event weight.
  const Trellis trellis = build_trellis(code);
  const std::uint32_t n = trellis.num_states();
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(n, kInf);
  std::vector<char> done(n, 0);
  using Item = std::pair<int, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;

  const std::uint32_t s1 = trellis.next(0, 1);
  const int w1 = std::popcount(trellis.output(0, 1));
  // State 0 is the target; it is entered only through a re-merge.
  dist[s1] = w1;
  queue.emplace(w1, s1);
  while (!queue.empty()) {
    const auto [d, s] = queue.top();
    queue.pop();
    if (done[s] || d != dist[s]) continue;
    if (s == 0) return d;
    done[s] = 1;
    for (int b = 0; b < 2; ++b) {
      const std::uint32_t t = trellis.next(s, b);
      const int nd = d + std::popcount(trellis.output(s, b));
      if (nd < dist[t]) {
        dist[t] = nd;
        queue.emplace(nd, t);
      }
    }
  }
  throw Error(ErrorKind::kNumericalFailure, "no merged event reachable");
}

geometry::DiffVector event_to_diff(const ErrorEvent& event,
                                   const SignalMapping& mapping,
                                   std::int64_t offset) {
  const std::int64_t n0 =
      event.steps > 0 ? static_cast<std::int64_t>(event.output_bits.size()) /
                            event.steps
                      : 1;
  const double amp = -2.0 * std::sqrt(mapping.symbol_energy);
  std::map<geometry::Coordinate, double> coords;
  for (std::size_t j = 0; j < event.output_bits.size(); ++j) {
    if (event.output_bits[j]) {
      coords[offset * n0 + static_cast<std::int64_t>(j)] = amp;
    }
  }
  return geometry::DiffVector(coords);
}

std::string bits_to_string(const Bits& bits, int group) {
  std::string out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (group > 0 && i > 0 && i % group == 0) out += ' ';
    out += bits[i] ? '1' : '0';
  }
  return out;
}

}  // namespace ved::codes
