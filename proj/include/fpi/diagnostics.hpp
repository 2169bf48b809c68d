#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fpi/hilbert.hpp"
#include "fpi/iterate.hpp"

namespace fpi {

struct FejerReport {
  bool holds = true;
  double worst_violation = 0.0;  // max over anchors and n of d_{n+1} - d_n
  std::optional<std::size_t> violating_index;
  std::optional<std::size_t> violating_anchor;
  std::vector<Vec> anchors;
  std::vector<std::vector<double>> distance_sequences;  // [anchor][n] = ||x_n - y||
};

/// Per-step comparison of a left- and right-hand side, lhs <= rhs + tol.
struct BoundReport {
  bool holds = true;
  double max_excess = 0.0;  // max over steps of lhs - rhs
  std::vector<double> per_step_lhs;
  std::vector<double> per_step_rhs;
  /// Exponential estimate: smallest admissible start index m.
  /// Other checks: first step whose excess exceeds tol.
  std::optional<std::size_t> index;
};

/// ||x_{n+1} - y|| <= ||x_n - y|| + tol for every anchor y and every n.
FejerReport check_fejer(const IterationTrace& trace, std::span<const Vec> anchors, double tol);

/// Bound M = ||y|| + ||x_0 - y|| from the first anchor; throws BoundViolated if
/// some ||x_n|| exceeds M + tol. Returns M.
double check_fejer_bounded(const FejerReport& report, const IterationTrace& trace,
                           double tol = kDefaultTolerance);

/// ||x_{n+1} - y||^2 <= ||x_n - y||^2 - alpha_n (1 - alpha_n) ||T x_n - x_n||^2.
BoundReport check_km_key_inequality(const IterationTrace& trace, const Vec& anchor, double tol);

/// Tail residuals below tol and residuals nonincreasing (within 1e-10) throughout.
bool check_residual_to_zero(const IterationTrace& trace, std::size_t tail, double tol);

/// ||x_{n+1} - y_{n+1}|| <= ||x_0 - y_0|| exp(-sum_{k<=n} alpha_k) for two
/// Halpern runs sharing T, u and schedule.
BoundReport check_halpern_coupling(const IterationTrace& trace_x, const IterationTrace& trace_y,
                                   const Schedule& schedule, double tol);

/// Searches the smallest m such that for all n >= m in the trace
///   ||x_{n+1} - p||^2 <= 3 eps + ||x_m - p||^2 exp(-sum_{k=m}^n alpha_k) + tol.
/// Candidates are m <= steps / 2. The trace must start at its anchor (x_0 = u).
BoundReport check_halpern_exp_bound(const IterationTrace& trace, const Vec& p_star,
                                    const Schedule& schedule, double eps, double tol);

bool identify_limit(const IterationTrace& trace, const Vec& candidate, std::size_t tail,
                    double tol);

/// Every iterate within tol of the domain.
bool check_domain_invariance(const IterationTrace& trace, const ConvexSet& domain, double tol);

/// Tail oscillation of a nonincreasing sequence: max - min over the last
/// quarter and over the first quarter.
std::pair<double, double> quarter_oscillations(std::span<const double> seq);

}  // namespace fpi
