#pragma once

// Vector Euclidean distance (VED) of a list-decoding error configuration.
//
// Given L difference vectors d_i (alternative minus transmitted signal
// point), the codeword-error region is the set of noise vectors n with
//
//   <n, d_i> >= |d_i|^2 / 2   for every i,
//
// i.e. the far side of every midpoint hyperplane. The VED is the distance
// from the origin to that region:
//
//   minimize |n|^2   subject to   D^T n >= b,   b_i = |d_i|^2 / 2.
//
// Every optimum has the form n* = D lambda with lambda >= 0 supported on the
// active set, so the solvers below work entirely on the Gram matrix G = D^T D
// and only materialize n* at the end.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ved::geometry {

using Coordinate = std::int64_t;

// Sparse signal-space vector. Entries are kept sorted by coordinate with no
// stored zeros; the squared norm is cached.
class DiffVector {
 public:
  using Entry = std::pair<Coordinate, double>;

  DiffVector() = default;
  explicit DiffVector(const std::map<Coordinate, double>& coords);
  // Dense amplitudes, coordinate i = position i.
  static DiffVector dense(std::span<const double> amplitudes);

  const std::vector<Entry>& entries() const { return entries_; }
  double sq_norm() const { return sq_norm_; }
  double norm() const;
  bool empty() const { return entries_.empty(); }

  double at(Coordinate c) const;
  DiffVector scaled(double factor) const;
  DiffVector shifted(Coordinate delta) const;

  friend bool operator==(const DiffVector&, const DiffVector&) = default;

 private:
  std::vector<Entry> entries_;
  double sq_norm_ = 0.0;
};

double dot(const DiffVector& a, const DiffVector& b);

class VedProblem {
 public:
  const std::vector<DiffVector>& vectors() const { return vectors_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  friend VedProblem gram_of(std::vector<DiffVector> vectors);

  std::vector<DiffVector> vectors_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd rhs_;
};

struct VedSolution {
  double ved = 0.0;
  double ved_sq = 0.0;
  DiffVector nearest_point;
  std::vector<int> active_set;     // ascending constraint indices
  std::vector<double> multipliers;  // aligned with active_set
  int rank = 0;
};

enum class Strategy { kExhaustive, kIterative };

struct SolverOptions {
  Strategy strategy = Strategy::kIterative;
  // Relative eigenvalue cutoff for pseudo-inverses of Gram submatrices.
  double pinv_cutoff = 1e-10;
  // Candidates must satisfy <n, d_i> >= (1 - feasibility_tol) rhs_i.
  double feasibility_tol = 1e-9;
};

inline constexpr std::size_t kMaxExhaustiveSize = 20;

// Throws kEmptyList / kZeroVector.
VedProblem gram_of(std::vector<DiffVector> vectors);

int rank_of(const VedProblem& problem, double tol = 1e-10);

// Throws kNumericalFailure when no KKT point is certified, kInvalidConfig
// when the exhaustive strategy is asked for more than kMaxExhaustiveSize
// constraints.
VedSolution ved(const VedProblem& problem, const SolverOptions& options = {});

inline VedSolution ved(const VedProblem& problem, Strategy strategy) {
  SolverOptions options;
  options.strategy = strategy;
  return ved(problem, options);
}

// Distance from a vertex of the regular simplex with edge `delta` to its
// centroid: the VED of L equidistant alternatives with pairwise inner
// products delta^2 / 2.
double simplex_ved(int list_size, double delta);

// Difference vectors of a regular L-simplex with edge `delta`, embedded in
// L + 1 dense coordinates.
std::vector<DiffVector> simplex_vectors(int list_size, double delta);

// Independent estimate by cyclic Dykstra projections onto the half-spaces,
// with a seeded constraint order. The returned point is rescaled onto the
// feasible region, so the estimate never undershoots the true VED.
double ved_bruteforce(const VedProblem& problem, int iterations,
                      std::uint64_t seed);

// Relative KKT residuals of a solution, measured against the vectors of the
// problem (not the Gram matrix the solvers use).
struct KktResiduals {
  double stationarity = 0.0;     // |n* - sum lambda_i d_i| / |n*|
  double primal = 0.0;           // max_i (rhs_i - <n*, d_i>)_+ / rhs_i
  double complementarity = 0.0;  // max_{i active} |<n*, d_i> - rhs_i| / rhs_i
  double dual = 0.0;             // max_i (-lambda_i)_+ / max_i lambda_i
  double objective = 0.0;        // |ved_sq - sum lambda_i rhs_i| / ved_sq
  double max() const;
};

KktResiduals check_kkt(const VedProblem& problem, const VedSolution& solution);

// One vector per line, whitespace-separated dense amplitudes, `#` comments.
std::vector<DiffVector> read_vectors(std::istream& in);

}  // namespace ved::geometry
