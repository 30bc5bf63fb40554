#pragma once

// Reference implementations used only by the tests. Each one takes a
// deliberately different route from the library code it checks: plain
// shift-register encoding instead of trellis tables, dense vectors instead of
// sparse ones, full subset scans instead of branch and bound, and so on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ved/codes.hpp"
#include "ved/listmin.hpp"

namespace oracle {

using Bits = std::vector<std::uint8_t>;

// Direct convolution, generators in octal with the MSB on the current input.
inline Bits convolve(const std::vector<unsigned>& gens_octal, int memory,
                     const Bits& input) {
  std::vector<unsigned> g;
  for (unsigned o : gens_octal) {
    unsigned v = 0, place = 1;
    for (unsigned x = o; x; x /= 10) {
      v += (x % 10) * place;
      place *= 8;
    }
    g.push_back(v);
  }
  Bits out;
  for (std::size_t t = 0; t < input.size(); ++t) {
    for (unsigned gen : g) {
      int acc = 0;
      for (int k = 0; k <= memory; ++k) {
        if (t < static_cast<std::size_t>(k)) break;
        if ((gen >> (memory - k)) & 1u) acc ^= input[t - k];
      }
      out.push_back(static_cast<std::uint8_t>(acc));
    }
  }
  return out;
}

// Minimum output weight over all terminated inputs of 1..max_len bits that
// start with a 1. For a non-catastrophic code this is d_free once max_len
// covers the shortest minimum-weight event.
inline int dfree_scan(const std::vector<unsigned>& gens_octal, int memory,
                      int max_len) {
  int best = std::numeric_limits<int>::max();
  for (int len = 1; len <= max_len; ++len) {
    for (std::uint64_t tail = 0; tail < (1ull << (len - 1)); ++tail) {
      Bits in(len + memory, 0);
      in[0] = 1;
      for (int i = 1; i < len; ++i) in[i] = (tail >> (i - 1)) & 1u;
      const Bits out = convolve(gens_octal, memory, in);
      best = std::min(best, static_cast<int>(std::count(out.begin(), out.end(), 1)));
    }
  }
  return best;
}

using Dense = std::vector<double>;

inline double ddot(const Dense& a, const Dense& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += a[i] * b[i];
  return s;
}

// Solves the square system by Gaussian elimination with partial pivoting.
// Returns false when the matrix is numerically singular.
inline bool solve(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) <= 1e-9 * scale) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return true;
}

// Minimum-norm point of {n : <n, d_i> >= |d_i|^2 / 2} by trying every
// support with a nonsingular Gram block. Some optimal multiplier vector is
// supported on linearly independent vectors, so skipping singular blocks
// loses nothing. Returns the smallest certified norm.
inline double ved_by_supports(const std::vector<Dense>& d) {
  const std::size_t l = d.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << l); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < l; ++i) {
      if (mask >> i & 1u) s.push_back(i);
    }
    std::vector<std::vector<double>> g(s.size(), std::vector<double>(s.size()));
    std::vector<double> b(s.size()), lam;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) g[i][j] = ddot(d[s[i]], d[s[j]]);
      b[i] = 0.5 * g[i][i];
    }
    if (!solve(g, b, lam)) continue;
    if (*std::min_element(lam.begin(), lam.end()) < -1e-12) continue;
    Dense n(d[0].size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t k = 0; k < n.size(); ++k) n[k] += lam[i] * d[s[i]][k];
    }
    bool feasible = true;
    for (const Dense& v : d) {
      if (ddot(n, v) < 0.5 * ddot(v, v) * (1.0 - 1e-9)) feasible = false;
    }
    if (feasible) best = std::min(best, std::sqrt(ddot(n, n)));
  }
  return best;
}

// Dense BPSK difference vector of an event placed at `offset`, in a signal
// space of `dim` coordinates.
inline Dense event_dense(const ved::codes::ErrorEvent& e, int n0,
                         std::int64_t offset, std::size_t dim, double es) {
  Dense v(dim, 0.0);
  for (std::size_t j = 0; j < e.output_bits.size(); ++j) {
    if (e.output_bits[j]) v[offset * n0 + j] = -2.0 * std::sqrt(es);
  }
  return v;
}

struct ScanResult {
  double min_ved = std::numeric_limits<double>::infinity();
  std::size_t subsets = 0;
};

// Minimum VED over every L-subset of distinct (event, offset) vectors with
// offsets in [0, window], with no symmetry reduction and no pruning.
inline ScanResult min_ved_scan(const std::vector<ved::codes::ErrorEvent>& events,
                               int n0, int list_size, std::int64_t window,
                               double es = 1.0) {
  std::size_t longest = 0;
  for (const auto& e : events) longest = std::max(longest, e.output_bits.size());
  const std::size_t dim = window * n0 + longest;
  std::vector<Dense> universe;
  for (std::int64_t off = 0; off <= window; ++off) {
    for (const auto& e : events) {
      Dense v = event_dense(e, n0, off, dim, es);
      if (std::find(universe.begin(), universe.end(), v) == universe.end()) {
        universe.push_back(std::move(v));
      }
    }
  }
  ScanResult r;
  const int n = static_cast<int>(universe.size());
  if (list_size > n) return r;
  std::vector<int> idx(list_size);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    std::vector<Dense> pick;
    for (int i : idx) pick.push_back(universe[i]);
    r.min_ved = std::min(r.min_ved, ved_by_supports(pick));
    ++r.subsets;
    int k = list_size - 1;
    while (k >= 0 && idx[k] == n - list_size + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < list_size; ++j) idx[j] = idx[j - 1] + 1;
  }
  return r;
}

// Upper tail of the standard normal by composite Simpson integration.
inline double q_by_simpson(double x, double upper = 40.0, int panels = 200000) {
  const double h = (upper - x) / panels;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = phi(x) + phi(upper);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(x + i * h);
  return s * h / 3.0;
}

struct ScoredPath {
  Bits input;
  double metric;
};

// All 2^info_len terminated paths ranked by correlation with `received`,
// best first, exact ties by input bits ascending.
inline std::vector<ScoredPath> rank_all_paths(const std::vector<unsigned>& gens_octal,
                                              int memory, int info_len,
                                              const std::vector<double>& received) {
  std::vector<ScoredPath> all;
  for (std::uint64_t w = 0; w < (1ull << info_len); ++w) {
    Bits in(info_len + memory, 0);
    for (int i = 0; i < info_len; ++i) in[i] = (w >> (info_len - 1 - i)) & 1u;
    const Bits out = convolve(gens_octal, memory, in);
    double m = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) m += (out[k] ? -1.0 : 1.0) * received[k];
    all.push_back({in, m});
  }
  std::sort(all.begin(), all.end(), [](const ScoredPath& a, const ScoredPath& b) {
    if (a.metric != b.metric) return a.metric > b.metric;
    return a.input < b.input;
  });
  return all;
}

}  // namespace oracle
