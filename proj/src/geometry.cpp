#include "ved/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ved/error.hpp"

namespace ved::geometry {

// ---------------------------------------------------------------------------
// DiffVector

DiffVector::DiffVector(const std::map<Coordinate, double>& coords) {
  entries_.reserve(coords.size());
  for (const auto& [c, v] : coords) {
    if (v != 0.0) {
      entries_.emplace_back(c, v);
      sq_norm_ += v * v;
    }
  }
}

DiffVector DiffVector::dense(std::span<const double> amplitudes) {
  std::map<Coordinate, double> coords;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    coords[static_cast<Coordinate>(i)] = amplitudes[i];
  }
  return DiffVector(coords);
}

double DiffVector::norm() const { return std::sqrt(sq_norm_); }

double DiffVector::at(Coordinate c) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), c,
      [](const Entry& e, Coordinate key) { return e.first < key; });
  return (it != entries_.end() && it->first == c) ? it->second : 0.0;
}

DiffVector DiffVector::scaled(double factor) const {
  std::map<Coordinate, double> coords;
  for (const auto& [c, v] : entries_) coords[c] = v * factor;
  return DiffVector(coords);
}

DiffVector DiffVector::shifted(Coordinate delta) const {
  DiffVector out = *this;
  for (auto& e : out.entries_) e.first += delta;
  return out;
}

double dot(const DiffVector& a, const DiffVector& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      sum += x[i].second * y[j].second;
      ++i;
      ++j;
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Problem construction

VedProblem gram_of(std::vector<DiffVector> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorKind::kEmptyList, "at least one difference vector needed");
  }
  const auto n = static_cast<Eigen::Index>(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!(vectors[i].sq_norm() > 0.0)) {
      throw Error(ErrorKind::kZeroVector,
                  "difference vector " + std::to_string(i) + " is zero");
    }
  }
  VedProblem p;
  p.gram_.resize(n, n);
  p.rhs_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.gram_(i, i) = vectors[i].sq_norm();
    p.rhs_(i) = vectors[i].sq_norm() / 2.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double g = dot(vectors[i], vectors[j]);
      p.gram_(i, j) = g;
      p.gram_(j, i) = g;
    }
  }
  p.vectors_ = std::move(vectors);
  return p;
}

int rank_of(const VedProblem& problem, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.gram(),
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  return static_cast<int>((ev.array() > tol * top).count());
}

namespace {

// Solution of G z = b restricted to the range of G, together with the part of
// b that lies in the (numerical) null space. A nonzero `null_part` means the
// system is inconsistent.
struct PinvSolve {
  Eigen::VectorXd z;
  Eigen::VectorXd null_part;
  bool consistent = true;
};

PinvSolve pinv_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& b,
                     double cutoff) {
  PinvSolve out;
  if (g.rows() == 1) {
    out.z = b / g(0, 0);
    out.null_part = Eigen::VectorXd::Zero(1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::MatrixXd& v = es.eigenvectors();
  const double thresh = cutoff * ev.cwiseAbs().maxCoeff();
  out.z = Eigen::VectorXd::Zero(b.size());
  out.null_part = Eigen::VectorXd::Zero(b.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double coef = v.col(k).dot(b);
    if (ev(k) > thresh) {
      out.z += (coef / ev(k)) * v.col(k);
    } else {
      out.null_part += coef * v.col(k);
    }
  }
  out.consistent = out.null_part.norm() <= 1e-9 * b.norm();
  return out;
}

Eigen::MatrixXd sub_gram(const Eigen::MatrixXd& g, const std::vector<int>& set) {
  const auto k = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index c = 0; c < k; ++c) out(a, c) = g(set[a], set[c]);
  }
  return out;
}

Eigen::VectorXd sub_vec(const Eigen::VectorXd& v, const std::vector<int>& set) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(set.size()));
  for (std::size_t a = 0; a < set.size(); ++a) out(a) = v(set[a]);
  return out;
}

// <n, d_i> for n = sum_a lambda_a d_{set[a]}, for every constraint i.
Eigen::VectorXd inner_products(const Eigen::MatrixXd& g,
                               const std::vector<int>& set,
                               const Eigen::VectorXd& lambda) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(g.rows());
  for (std::size_t a = 0; a < set.size(); ++a) s += lambda(a) * g.col(set[a]);
  return s;
}

bool all_feasible(const Eigen::VectorXd& s, const Eigen::VectorXd& rhs,
                  double tol) {
  for (Eigen::Index i = 0; i < rhs.size(); ++i) {
    if (s(i) < rhs(i) * (1.0 - tol)) return false;
  }
  return true;
}

struct ActiveSolution {
  std::vector<int> set;
  Eigen::VectorXd lambda;
};

// Candidate active sets in order of increasing cardinality, lexicographic
// within a cardinality. Every KKT point of this convex program is its global
// minimizer, so the first certified candidate is the answer and is also the
// lexicographically smallest among the optimal active sets.
ActiveSolution solve_exhaustive(const VedProblem& problem,
                                const SolverOptions& opt) {
  const int n = static_cast<int>(problem.size());
  if (problem.size() > kMaxExhaustiveSize) {
    throw Error(ErrorKind::kInvalidConfig,
                "exhaustive strategy supports at most " +
                    std::to_string(kMaxExhaustiveSize) + " constraints");
  }
  const auto& g = problem.gram();
  const auto& rhs = problem.rhs();
  for (int k = 1; k <= n; ++k) {
    std::vector<int> set(k);
    std::iota(set.begin(), set.end(), 0);
    while (true) {
      const PinvSolve sol =
          pinv_solve(sub_gram(g, set), sub_vec(rhs, set), opt.pinv_cutoff);
      const double scale = sol.z.cwiseAbs().maxCoeff();
      if (sol.consistent && sol.z.minCoeff() >= -1e-10 * scale) {
        Eigen::VectorXd lambda = sol.z.cwiseMax(0.0);
        if (all_feasible(inner_products(g, set, lambda), rhs,
                         opt.feasibility_tol)) {
          return {set, lambda};
        }
      }
      // Next k-combination of {0..n-1}.
      int pos = k - 1;
      while (pos >= 0 && set[pos] == n - k + pos) --pos;
      if (pos < 0) break;
      ++set[pos];
      for (int q = pos + 1; q < k; ++q) set[q] = set[q - 1] + 1;
    }
  }
  throw Error(ErrorKind::kNumericalFailure,
              "no candidate active set passed the KKT checks");
}

// Dual active-set method (Lawson-Hanson style) on
//   maximize b^T lambda - 1/2 lambda^T G lambda,  lambda >= 0,
// whose gradient b - G lambda is exactly the vector of constraint violations.
// Constraints enter by largest rhs-normalized violation; multipliers leave
// through a ratio test. Ties go to the lowest index.
ActiveSolution solve_iterative(const VedProblem& problem,
                               const SolverOptions& opt) {
  const int n = static_cast<int>(problem.size());
  const auto& g = problem.gram();
  const auto& rhs = problem.rhs();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  std::vector<int> work;
  const int cap = 50 * n;
  int steps = 0;
  // Entering constraints that were expelled again without any progress.
  std::vector<char> blocked(n, 0);

  auto remove_index = [&](int idx) {
    lambda(idx) = 0.0;
    work.erase(std::find(work.begin(), work.end(), idx));
  };

  while (true) {
    const Eigen::VectorXd viol = rhs - g * lambda;
    int enter = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      if (blocked[i] ||
          std::find(work.begin(), work.end(), i) != work.end()) {
        continue;
      }
      if (viol(i) <= opt.feasibility_tol * rhs(i)) continue;
      const double score = viol(i) / rhs(i);
      if (enter < 0 || score > best) {
        enter = i;
        best = score;
      }
    }
    if (enter < 0) break;
    work.insert(std::upper_bound(work.begin(), work.end(), enter), enter);

    while (true) {
      if (++steps > cap) {
        throw Error(ErrorKind::kNumericalFailure,
                    "active-set iteration cap reached");
      }
      const PinvSolve sol =
          pinv_solve(sub_gram(g, work), sub_vec(rhs, work), opt.pinv_cutoff);
      const Eigen::VectorXd current = sub_vec(lambda, work);
      if (!sol.consistent) {
        // The dual objective grows linearly along the null-space component of
        // the right-hand side; move until a multiplier reaches zero.
        const Eigen::VectorXd& u = sol.null_part;
        int leave = -1;
        double t = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < work.size(); ++a) {
          if (u(a) < 0.0) {
            const double ta = current(a) / -u(a);
            if (ta < t) {
              t = ta;
              leave = static_cast<int>(a);
            }
          }
        }
        if (leave < 0) {
          throw Error(ErrorKind::kNumericalFailure,
                      "constraints are inconsistent (unbounded dual direction)");
        }
        for (std::size_t a = 0; a < work.size(); ++a) {
          lambda(work[a]) = std::max(0.0, current(a) + t * u(a));
        }
        remove_index(work[leave]);
        continue;
      }
      if (sol.z.minCoeff() > 0.0) {
        for (std::size_t a = 0; a < work.size(); ++a) lambda(work[a]) = sol.z(a);
        std::fill(blocked.begin(), blocked.end(), 0);
        break;
      }
      int leave = -1;
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < work.size(); ++a) {
        if (sol.z(a) <= 0.0) {
          const double denom = current(a) - sol.z(a);
          const double aa = denom > 0.0 ? current(a) / denom : 0.0;
          if (aa < alpha) {
            alpha = aa;
            leave = static_cast<int>(a);
          }
        }
      }
      for (std::size_t a = 0; a < work.size(); ++a) {
        lambda(work[a]) = current(a) + alpha * (sol.z(a) - current(a));
      }
      const int leaving = work[leave];
      if (leaving == enter && alpha == 0.0) blocked[enter] = 1;
      remove_index(leaving);
      // Anything else driven to zero by the same step leaves too.
      for (std::size_t a = 0; a < work.size();) {
        if (lambda(work[a]) <= 0.0) {
          remove_index(work[a]);
        } else {
          ++a;
        }
      }
      if (work.empty()) break;
    }
  }

  if (work.empty()) {
    throw Error(ErrorKind::kNumericalFailure, "active-set method ended empty");
  }
  ActiveSolution out{work, sub_vec(lambda, work)};
  if (!all_feasible(inner_products(g, out.set, out.lambda), rhs,
                    opt.feasibility_tol)) {
    throw Error(ErrorKind::kNumericalFailure,
                "active-set result violates a constraint");
  }
  return out;
}

}  // namespace

VedSolution ved(const VedProblem& problem, const SolverOptions& options) {
  const ActiveSolution act = options.strategy == Strategy::kExhaustive
                                 ? solve_exhaustive(problem, options)
                                 : solve_iterative(problem, options);
  VedSolution out;
  out.active_set = act.set;
  out.multipliers.assign(act.lambda.data(),
                         act.lambda.data() + act.lambda.size());
  const Eigen::MatrixXd ga = sub_gram(problem.gram(), act.set);
  out.ved_sq = act.lambda.dot(ga * act.lambda);
  out.ved = std::sqrt(out.ved_sq);

  std::map<Coordinate, double> point;
  for (std::size_t a = 0; a < act.set.size(); ++a) {
    for (const auto& [c, v] : problem.vectors()[act.set[a]].entries()) {
      point[c] += act.lambda(static_cast<Eigen::Index>(a)) * v;
    }
  }
  out.nearest_point = DiffVector(point);
  out.rank = rank_of(problem);
  return out;
}

double simplex_ved(int list_size, double delta) {
  const double l = list_size;
  return delta * std::sqrt(l / (2.0 * (l + 1.0)));
}

std::vector<DiffVector> simplex_vectors(int list_size, double delta) {
  const double a = delta / std::sqrt(2.0);
  std::vector<DiffVector> out;
  for (int i = 1; i <= list_size; ++i) {
    out.emplace_back(std::map<Coordinate, double>{{0, -a}, {i, a}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

double ved_bruteforce(const VedProblem& problem, int iterations,
                      std::uint64_t seed) {
  std::map<Coordinate, int> index;
  for (const auto& v : problem.vectors()) {
    for (const auto& e : v.entries()) index.emplace(e.first, 0);
  }
  int dim = 0;
  for (auto& [c, i] : index) i = dim++;

  const int n = static_cast<int>(problem.size());
  std::vector<Eigen::VectorXd> a(n, Eigen::VectorXd::Zero(dim));
  std::vector<double> b(n), a_sq(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& [c, v] : problem.vectors()[i].entries()) a[i](index[c]) = v;
    a_sq[i] = a[i].squaredNorm();
    b[i] = a_sq[i] / 2.0;
  }

  constexpr int kStarts = 3;
  const int sweeps = std::max(1, iterations / kStarts);
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  double fallback = 0.0;

  for (int start = 0; start < kStarts; ++start) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    std::vector<Eigen::VectorXd> corr(n, Eigen::VectorXd::Zero(dim));
    for (int s = 0; s < sweeps; ++s) {
      // x alone can sit still for a sweep while the correction terms are
      // still moving, so both must settle before stopping.
      double moved = 0.0;
      for (int i : order) {
        Eigen::VectorXd y = x + corr[i];
        const double gap = b[i] - a[i].dot(y);
        Eigen::VectorXd proj = gap > 0.0 ? Eigen::VectorXd(y + (gap / a_sq[i]) * a[i]) : y;
        Eigen::VectorXd c = y - proj;
        moved = std::max({moved, (proj - x).norm(), (c - corr[i]).norm()});
        corr[i] = std::move(c);
        x = std::move(proj);
      }
      if (moved <= 1e-15 * (1.0 + x.norm())) break;
    }

    double scale = 1.0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const double s = a[i].dot(x);
      if (s <= 0.0) {
        ok = false;
        break;
      }
      scale = std::max(scale, b[i] / s);
    }
    fallback = x.norm();
    if (ok) best = std::min(best, scale * x.norm());
  }
  return std::isfinite(best) ? best : fallback;
}

// ---------------------------------------------------------------------------
// KKT certificate

double KktResiduals::max() const {
  return std::max({stationarity, primal, complementarity, dual, objective});
}

KktResiduals check_kkt(const VedProblem& problem, const VedSolution& solution) {
  KktResiduals r;
  const auto& vectors = problem.vectors();
  const auto& rhs = problem.rhs();
  const DiffVector& point = solution.nearest_point;

  std::map<Coordinate, double> combo;
  for (std::size_t a = 0; a < solution.active_set.size(); ++a) {
    for (const auto& [c, v] : vectors[solution.active_set[a]].entries()) {
      combo[c] += solution.multipliers[a] * v;
    }
  }
  double diff_sq = 0.0;
  for (const auto& [c, v] : combo) {
    const double d = v - point.at(c);
    diff_sq += d * d;
  }
  for (const auto& [c, v] : point.entries()) {
    if (!combo.contains(c)) diff_sq += v * v;
  }
  r.stationarity = std::sqrt(diff_sq) / point.norm();

  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double s = dot(point, vectors[i]);
    r.primal = std::max(r.primal, (rhs(i) - s) / rhs(i));
  }
  double lam_max = 0.0, weighted = 0.0;
  for (std::size_t a = 0; a < solution.active_set.size(); ++a) {
    const int i = solution.active_set[a];
    const double s = dot(point, vectors[i]);
    r.complementarity =
        std::max(r.complementarity, std::abs(s - rhs(i)) / rhs(i));
    lam_max = std::max(lam_max, solution.multipliers[a]);
    weighted += solution.multipliers[a] * rhs(i);
  }
  for (double lam : solution.multipliers) {
    if (lam < 0.0) r.dual = std::max(r.dual, -lam / lam_max);
  }
  r.objective = std::abs(solution.ved_sq - weighted) / solution.ved_sq;
  return r;
}

// ---------------------------------------------------------------------------
// Text input

std::vector<DiffVector> read_vectors(std::istream& in) {
  std::vector<DiffVector> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<double> amps;
    std::string tok;
    while (fields >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                           ": bad amplitude '" + tok + "'");
      }
      amps.push_back(v);
    }
    if (!amps.empty()) out.push_back(DiffVector::dense(amps));
  }
  return out;
}

}  // namespace ved::geometry
