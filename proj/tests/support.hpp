#pragma once

// Shared helpers for the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ved/error.hpp"
#include "ved/geometry.hpp"

namespace testing {

// Random dense difference vectors with amplitudes in [-3, 3]. Only sets
// that lie strictly inside a common half-space have a nonempty error region,
// so a random direction u is drawn first and every vector is oriented to
// make an angle of less than ~87 degrees with it. Vectors shorter than 0.1
// are redrawn.
inline std::vector<ved::geometry::DiffVector> random_vectors(std::mt19937_64& rng,
                                                             int count, int dim) {
  std::uniform_real_distribution<double> amp(-3.0, 3.0);
  std::normal_distribution<double> normal;
  std::vector<double> u(dim);
  double u_norm = 0.0;
  while (u_norm < 1e-3) {
    u_norm = 0.0;
    for (double& x : u) {
      x = normal(rng);
      u_norm += x * x;
    }
    u_norm = std::sqrt(u_norm);
  }
  std::vector<ved::geometry::DiffVector> out;
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> v(dim);
    double sq = 0.0, along = 0.0;
    for (int k = 0; k < dim; ++k) {
      v[k] = amp(rng);
      sq += v[k] * v[k];
      along += v[k] * u[k];
    }
    if (sq < 0.01 || std::abs(along) < 0.05 * std::sqrt(sq) * u_norm) continue;
    if (along < 0.0) {
      for (double& x : v) x = -x;
    }
    out.push_back(ved::geometry::DiffVector::dense(v));
  }
  return out;
}

inline std::vector<std::vector<double>> to_dense(
    const std::vector<ved::geometry::DiffVector>& vs) {
  ved::geometry::Coordinate dim = 0;
  for (const auto& v : vs) {
    for (const auto& [c, x] : v.entries()) dim = std::max(dim, c + 1);
  }
  std::vector<std::vector<double>> out;
  for (const auto& v : vs) {
    std::vector<double> d(dim, 0.0);
    for (const auto& [c, x] : v.entries()) d[c] = x;
    out.push_back(std::move(d));
  }
  return out;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

template <class F>
ved::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const ved::Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected a ved::Error");
}

}  // namespace testing
