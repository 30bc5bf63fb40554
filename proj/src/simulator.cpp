#include "ved/simulator.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <thread>

#include "ved/error.hpp"
#include "ved/listmin.hpp"

namespace ved::sim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::size_t checked_steps(const codes::Trellis& trellis,
                          std::span<const double> received) {
  const auto n0 = static_cast<std::size_t>(trellis.n0());
  if (received.size() % n0 != 0) {
    throw Error(ErrorKind::kLengthMismatch,
                "received length " + std::to_string(received.size()) +
                    " is not a multiple of " + std::to_string(n0));
  }
  return received.size() / n0;
}

// Correlation of one step of samples with every possible branch label.
void branch_correlations(std::span<const double> samples,
                         std::vector<double>& corr) {
  const std::size_t labels = std::size_t{1} << samples.size();
  corr.assign(labels, 0.0);
  for (std::size_t label = 0; label < labels; ++label) {
    double c = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      c += ((label >> j) & 1u) ? -samples[j] : samples[j];
    }
    corr[label] = c;
  }
}

// Lexicographic comparison of two paths that end at time `t`, given a way to
// step from a node to its parent. Walking backwards, the last difference
// seen is the earliest one in the sequence.
template <typename Node, typename Parent>
int compare_paths(Node a, Node b, std::size_t t, Parent parent) {
  int result = 0;
  for (std::size_t k = t; k > 0 && !(a == b); --k) {
    const auto [pa, bit_a] = parent(k, a);
    const auto [pb, bit_b] = parent(k, b);
    if (bit_a != bit_b) result = bit_a < bit_b ? -1 : 1;
    a = pa;
    b = pb;
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// RNG and statistics

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream ^ 0xD1B54A32D192ED03ull))) {}

std::uint64_t CounterRng::next() {
  return splitmix64(key_ + 0x9E3779B97F4A7C15ull * counter_++);
}

double CounterRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double wilson_half_width(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

RegionEstimate mc_region_probability(const geometry::VedProblem& problem,
                                     double sigma, std::size_t trials,
                                     std::uint64_t seed) {
  std::map<geometry::Coordinate, int> index;
  for (const auto& v : problem.vectors()) {
    for (const auto& e : v.entries()) index.emplace(e.first, 0);
  }
  int dim = 0;
  for (auto& [c, i] : index) i = dim++;
  const std::size_t l = problem.size();
  std::vector<double> dense(l * dim, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    for (const auto& [c, v] : problem.vectors()[i].entries()) {
      dense[i * dim + index[c]] = v;
    }
  }

  RegionEstimate out;
  out.trials = trials;
  std::vector<double> noise(dim);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, t);
    for (double& x : noise) x = sigma * rng.gaussian();
    bool inside = true;
    for (std::size_t i = 0; i < l && inside; ++i) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += noise[k] * dense[i * dim + k];
      inside = s >= problem.rhs()(static_cast<Eigen::Index>(i));
    }
    out.hits += inside ? 1 : 0;
  }
  out.estimate = trials ? static_cast<double>(out.hits) / trials : 0.0;
  out.ci95 = wilson_half_width(out.hits, trials);
  return out;
}

// ---------------------------------------------------------------------------
// Viterbi

codes::Bits decode_viterbi(const codes::Trellis& trellis,
                           std::span<const double> received, bool terminated) {
  const std::size_t steps = checked_steps(trellis, received);
  const std::uint32_t ns = trellis.num_states();
  const auto n0 = static_cast<std::size_t>(trellis.n0());
  std::vector<double> metric(ns, kNegInf), next(ns);
  metric[0] = 0.0;
  std::vector<std::uint8_t> decision(steps * ns, 0);
  std::vector<double> corr;

  auto parent = [&](std::size_t k, std::uint32_t s) {
    const std::uint32_t p = trellis.predecessor(s, decision[(k - 1) * ns + s]);
    return std::pair<std::uint32_t, int>{p, static_cast<int>(s & 1u)};
  };

  for (std::size_t t = 0; t < steps; ++t) {
    branch_correlations(received.subspan(t * n0, n0), corr);
    for (std::uint32_t s = 0; s < ns; ++s) {
      const int bit = static_cast<int>(s & 1u);
      const std::uint32_t p0 = trellis.predecessor(s, 0);
      const std::uint32_t p1 = trellis.predecessor(s, 1);
      const double m0 = metric[p0] + corr[trellis.output(p0, bit)];
      const double m1 = metric[p1] + corr[trellis.output(p1, bit)];
      std::uint8_t pick = m1 > m0 ? 1 : 0;
      if (m0 == m1 && m0 != kNegInf) {
        pick = compare_paths(p1, p0, t, parent) < 0 ? 1 : 0;
      }
      decision[t * ns + s] = pick;
      next[s] = pick ? m1 : m0;
    }
    metric.swap(next);
  }

  std::uint32_t state = 0;
  if (!terminated) {
    for (std::uint32_t s = 1; s < ns; ++s) {
      if (metric[s] > metric[state] ||
          (metric[s] == metric[state] &&
           compare_paths(s, state, steps, parent) < 0)) {
        state = s;
      }
    }
  }
  codes::Bits path(steps);
  for (std::size_t k = steps; k > 0; --k) {
    path[k - 1] = static_cast<std::uint8_t>(state & 1u);
    state = parent(k, state).first;
  }
  return path;
}

// ---------------------------------------------------------------------------
// List Viterbi

std::vector<RankedPath> decode_list_viterbi(const codes::Trellis& trellis,
                                            std::span<const double> received,
                                            int list_size, bool terminated) {
  if (list_size < 1 || list_size > kMaxListSize) {
    throw Error(ErrorKind::kInvalidConfig,
                "list size must be in [1, " + std::to_string(kMaxListSize) + "]");
  }
  const std::size_t steps = checked_steps(trellis, received);
  const std::uint32_t ns = trellis.num_states();
  const auto n0 = static_cast<std::size_t>(trellis.n0());
  const auto cap = static_cast<std::size_t>(list_size);

  struct Entry {
    double metric;
    std::uint32_t pred_state;
    std::uint32_t pred_rank;
  };
  // lists[t][s]: ranked survivors ending in state s at time t.
  std::vector<std::vector<std::vector<Entry>>> lists(
      steps + 1, std::vector<std::vector<Entry>>(ns));
  lists[0][0].push_back({0.0, 0, 0});

  using Node = std::pair<std::uint32_t, std::uint32_t>;  // (state, rank)
  auto parent = [&](std::size_t k, Node n) {
    const Entry& e = lists[k][n.first][n.second];
    return std::pair<Node, int>{{e.pred_state, e.pred_rank},
                                static_cast<int>(n.first & 1u)};
  };

  std::vector<double> corr;
  for (std::size_t t = 0; t < steps; ++t) {
    branch_correlations(received.subspan(t * n0, n0), corr);
    for (std::uint32_t s = 0; s < ns; ++s) {
      const int bit = static_cast<int>(s & 1u);
      std::vector<Entry> cand;
      for (int which = 0; which < 2; ++which) {
        const std::uint32_t p = trellis.predecessor(s, which);
        const double bm = corr[trellis.output(p, bit)];
        const auto& src = lists[t][p];
        for (std::uint32_t r = 0; r < src.size(); ++r) {
          cand.push_back({src[r].metric + bm, p, r});
        }
      }
      auto before = [&](const Entry& a, const Entry& b) {
        if (a.metric != b.metric) return a.metric > b.metric;
        return compare_paths(Node{a.pred_state, a.pred_rank},
                             Node{b.pred_state, b.pred_rank}, t, parent) < 0;
      };
      const std::size_t keep = std::min(cap, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), before);
      cand.resize(keep);
      lists[t + 1][s] = std::move(cand);
    }
  }

  std::vector<Node> finals;
  for (std::uint32_t s = 0; s < (terminated ? 1u : ns); ++s) {
    for (std::uint32_t r = 0; r < lists[steps][s].size(); ++r) {
      finals.push_back({s, r});
    }
  }
  auto metric_of = [&](const Node& n) {
    return lists[steps][n.first][n.second].metric;
  };
  std::sort(finals.begin(), finals.end(), [&](const Node& a, const Node& b) {
    if (metric_of(a) != metric_of(b)) return metric_of(a) > metric_of(b);
    return compare_paths(a, b, steps, parent) < 0;
  });
  if (finals.size() > cap) finals.resize(cap);

  std::vector<RankedPath> out;
  for (Node n : finals) {
    RankedPath rp;
    rp.metric = metric_of(n);
    rp.input_bits.resize(steps);
    for (std::size_t k = steps; k > 0; --k) {
      const auto [p, bit] = parent(k, n);
      rp.input_bits[k - 1] = static_cast<std::uint8_t>(bit);
      n = p;
    }
    out.push_back(std::move(rp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Breadth-first

BreadthFirstResult decode_breadth_first(const codes::Trellis& trellis,
                                        std::span<const double> received,
                                        int survivors,
                                        const codes::Bits* reference,
                                        bool terminated, bool record_trace) {
  if (survivors < 1) {
    throw Error(ErrorKind::kInvalidConfig, "survivor budget must be >= 1");
  }
  const std::size_t steps = checked_steps(trellis, received);
  if (reference && reference->size() != steps) {
    throw Error(ErrorKind::kLengthMismatch,
                "reference path has " + std::to_string(reference->size()) +
                    " steps, received has " + std::to_string(steps));
  }
  const std::uint32_t ns = trellis.num_states();
  const auto n0 = static_cast<std::size_t>(trellis.n0());
  const std::size_t tail =
      terminated ? std::min<std::size_t>(steps, trellis.memory()) : 0;

  struct Node {
    std::uint32_t state;
    double metric;
    int parent;
    std::uint8_t bit;
  };
  std::vector<std::vector<Node>> layers(steps + 1);
  layers[0].push_back({0, 0.0, -1, 0});

  auto parent = [&](std::size_t k, int idx) {
    const Node& n = layers[k][idx];
    return std::pair<int, int>{n.parent, n.bit};
  };
  // Orders extensions (parent index at layer t, bit).
  auto path_less = [&](std::size_t t, int pa, int ba, int pb, int bb) {
    const int c = compare_paths(pa, pb, t, parent);
    return c != 0 ? c < 0 : ba < bb;
  };

  BreadthFirstResult result;
  int ref_index = 0;
  std::vector<double> corr;
  std::vector<int> best_at(ns);

  for (std::size_t t = 0; t < steps; ++t) {
    branch_correlations(received.subspan(t * n0, n0), corr);
    const bool in_tail = t >= steps - tail;
    std::vector<Node> cand;
    std::fill(best_at.begin(), best_at.end(), -1);
    const auto& layer = layers[t];
    for (int i = 0; i < static_cast<int>(layer.size()); ++i) {
      for (int b = 0; b < (in_tail ? 1 : 2); ++b) {
        const Node ext{trellis.next(layer[i].state, b),
                       layer[i].metric + corr[trellis.output(layer[i].state, b)],
                       i, static_cast<std::uint8_t>(b)};
        int& slot = best_at[ext.state];
        if (slot < 0) {
          slot = static_cast<int>(cand.size());
          cand.push_back(ext);
          continue;
        }
        Node& cur = cand[slot];
        if (ext.metric > cur.metric ||
            (ext.metric == cur.metric &&
             path_less(t, ext.parent, ext.bit, cur.parent, cur.bit))) {
          cur = ext;
        }
      }
    }
    auto before = [&](const Node& a, const Node& b) {
      if (a.metric != b.metric) return a.metric > b.metric;
      return path_less(t, a.parent, a.bit, b.parent, b.bit);
    };
    const std::size_t keep =
        std::min(cand.size(), static_cast<std::size_t>(survivors));
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), before);
    cand.resize(keep);
    layers[t + 1] = std::move(cand);

    if (reference && !result.correct_path_deleted) {
      const auto& next = layers[t + 1];
      const auto it = std::find_if(next.begin(), next.end(), [&](const Node& n) {
        return n.parent == ref_index && n.bit == (*reference)[t];
      });
      if (it == next.end()) {
        result.correct_path_deleted = true;
        result.deletion_step = static_cast<int>(t);
      } else {
        ref_index = static_cast<int>(it - next.begin());
      }
    }
    if (record_trace) {
      std::vector<std::uint32_t> states;
      for (const Node& n : layers[t + 1]) states.push_back(n.state);
      result.survivors.push_back(std::move(states));
    }
  }

  int idx = 0;
  if (terminated) {
    const auto& last = layers[steps];
    const auto it = std::find_if(last.begin(), last.end(),
                                 [](const Node& n) { return n.state == 0; });
    idx = static_cast<int>(it - last.begin());
  }
  result.metric = layers[steps][idx].metric;
  result.decoded.resize(steps);
  for (std::size_t k = steps; k > 0; --k) {
    result.decoded[k - 1] = layers[k][idx].bit;
    idx = layers[k][idx].parent;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Simulation

std::string_view to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kViterbi: return "viterbi";
    case DecoderKind::kListViterbi: return "list_viterbi";
    case DecoderKind::kBreadthFirst: return "breadth_first";
  }
  return "?";
}

DecoderKind parse_decoder(std::string_view name) {
  if (name == "viterbi") return DecoderKind::kViterbi;
  if (name == "list_viterbi") return DecoderKind::kListViterbi;
  if (name == "breadth_first") return DecoderKind::kBreadthFirst;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown decoder '" + std::string(name) + "'");
}

double default_min_ved(const codes::ConvCode& code, int list_size) {
  const int dfree = codes::free_distance(code);
  const double floor = std::sqrt(static_cast<double>(dfree));
  if (list_size <= 1) return floor;
  listmin::SearchOptions opt;
  opt.window = 2 * (code.memory() + 1);
  opt.node_cap = 20'000;
  try {
    return listmin::min_ved(code, list_size, {dfree + 3, 32, false}, opt).min_ved;
  } catch (const Error&) {
    // List too long for the pool or for the node budget. Every list size
    // meets the single-path value, so it still bounds P_CE from above.
    return floor;
  }
}

void validate(const SimConfig& c) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidConfig, what);
  };
  if (c.trials < 1000) fail("trials must be >= 1000");
  if (c.info_len < 1) fail("info_len must be >= 1");
  if (c.workers < 1) fail("workers must be >= 1");
  if (!std::isfinite(c.ebno_db)) fail("ebno_db must be finite");
  if (c.list_size < 1) fail("list size must be >= 1");
  if (c.decoder == DecoderKind::kListViterbi && c.list_size > kMaxListSize) {
    fail("list size must be <= " + std::to_string(kMaxListSize));
  }
  if (c.code.memory() > codes::Trellis::kMaxMemory) {
    fail("code memory too large for simulation");
  }
}

Trial make_trial(const SimConfig& config, std::uint64_t index) {
  CounterRng rng(config.seed, index);
  Trial trial;
  codes::Bits& input = trial.input_bits;
  input.resize(static_cast<std::size_t>(config.info_len));
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (i % 64 == 0) word = rng.next();
    input[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  const codes::Bits coded = codes::encode(config.code, input, true);
  const double sigma = config.channel().sigma();
  trial.received.resize(coded.size());
  for (std::size_t i = 0; i < coded.size(); ++i) {
    trial.received[i] = (coded[i] ? -1.0 : 1.0) + sigma * rng.gaussian();
  }
  input.resize(input.size() + config.code.memory(), 0);
  return trial;
}

bool run_trial(const SimConfig& config, const codes::Trellis& trellis,
               std::uint64_t index) {
  const Trial trial = make_trial(config, index);
  const codes::Bits& input = trial.input_bits;
  const std::vector<double>& received = trial.received;

  switch (config.decoder) {
    case DecoderKind::kViterbi:
      return decode_viterbi(trellis, received) != input;
    case DecoderKind::kListViterbi: {
      const auto list = decode_list_viterbi(trellis, received, config.list_size);
      return std::none_of(list.begin(), list.end(), [&](const RankedPath& p) {
        return p.input_bits == input;
      });
    }
    case DecoderKind::kBreadthFirst:
      return decode_breadth_first(trellis, received, config.list_size, &input)
          .correct_path_deleted;
  }
  return false;
}

SimResult simulate_ce(const SimConfig& config) {
  validate(config);
  const codes::Trellis trellis = codes::build_trellis(config.code);

  const auto workers = static_cast<std::size_t>(config.workers);
  std::vector<std::size_t> counts(workers, 0);
  auto work = [&](std::size_t w) {
    const std::size_t lo = config.trials * w / workers;
    const std::size_t hi = config.trials * (w + 1) / workers;
    std::size_t local = 0;
    for (std::size_t t = lo; t < hi; ++t) local += run_trial(config, trellis, t);
    counts[w] = local;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  SimResult r;
  r.ebno_db = config.ebno_db;
  r.decoder = config.decoder;
  r.list_size = config.list_size;
  r.trials = config.trials;
  r.ce_count = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  r.p_ce = static_cast<double>(r.ce_count) / static_cast<double>(r.trials);
  r.ci95 = wilson_half_width(r.ce_count, r.trials);
  r.min_ved = config.min_ved.value_or(
      default_min_ved(config.code, config.decoder == DecoderKind::kViterbi
                                       ? 1
                                       : config.list_size));
  r.asymptote = q_function(r.min_ved / config.channel().sigma());
  return r;
}

}  // namespace ved::sim
