#include "fpi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

namespace {

void require_nonempty(const IterationTrace& trace) {
  if (trace.iterates.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no iterates");
}

void finish(BoundReport& r, double tol) {
  r.max_excess = r.per_step_lhs.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < r.per_step_lhs.size(); ++n) {
    const double excess = r.per_step_lhs[n] - r.per_step_rhs[n];
    r.max_excess = std::max(r.max_excess, excess);
    if (excess > tol && !r.index) r.index = n;
  }
  r.holds = !r.index;
}

}  // namespace

FejerReport check_fejer(const IterationTrace& trace, std::span<const Vec> anchors, double tol) {
  require_nonempty(trace);
  if (anchors.empty()) throw Error(ErrorCode::NoAnchors, "no anchors supplied");
  FejerReport report;
  report.anchors.assign(anchors.begin(), anchors.end());
  report.worst_violation = trace.iterates.size() > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    std::vector<double> d;
    d.reserve(trace.iterates.size());
    for (const Vec& x : trace.iterates) d.push_back(distance(x, anchors[a]));
    for (std::size_t n = 0; n + 1 < d.size(); ++n) {
      const double v = d[n + 1] - d[n];
      if (v > report.worst_violation) report.worst_violation = v;
      if (v > tol && (!report.violating_index || n < *report.violating_index)) {
        report.violating_index = n;
        report.violating_anchor = a;
      }
    }
    report.distance_sequences.push_back(std::move(d));
  }
  report.holds = report.worst_violation <= tol;
  return report;
}

double check_fejer_bounded(const FejerReport& report, const IterationTrace& trace, double tol) {
  if (!report.holds) throw Error(ErrorCode::NotFejer, "report does not certify Fejer monotonicity");
  require_nonempty(trace);
  if (report.anchors.empty()) throw Error(ErrorCode::NoAnchors, "report carries no anchors");
  const Vec& y = report.anchors.front();
  const double bound = norm(y) + distance(trace.iterates.front(), y);
  for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
    if (norm(trace.iterates[n]) > bound + tol) {
      throw Error(ErrorCode::BoundViolated, "||x_" + std::to_string(n) + "|| exceeds Fejer bound");
    }
  }
  return bound;
}

BoundReport check_km_key_inequality(const IterationTrace& trace, const Vec& anchor, double tol) {
  if (trace.method != Method::KM) throw Error(ErrorCode::WrongTraceKind, "expected a KM trace");
  require_nonempty(trace);
  BoundReport r;
  const std::size_t steps = trace.steps();
  r.per_step_lhs.reserve(steps);
  r.per_step_rhs.reserve(steps);
  double prev = norm_squared(trace.iterates[0] - anchor);
  for (std::size_t n = 0; n < steps; ++n) {
    const double next = norm_squared(trace.iterates[n + 1] - anchor);
    const double a = trace.alphas_used[n];
    const double res = trace.residuals[n];
    r.per_step_lhs.push_back(next);
    r.per_step_rhs.push_back(prev - a * (1.0 - a) * res * res);
    prev = next;
  }
  finish(r, tol);
  return r;
}

bool check_residual_to_zero(const IterationTrace& trace, std::size_t tail, double tol) {
  require_nonempty(trace);
  const auto& res = trace.residuals;
  if (tail == 0 || tail > res.size()) {
    throw Error(ErrorCode::BadWindow, "tail " + std::to_string(tail) + " outside trace");
  }
  for (std::size_t n = 0; n + 1 < res.size(); ++n) {
    if (res[n + 1] > res[n] + 1e-10) return false;
  }
  return *std::max_element(res.end() - static_cast<std::ptrdiff_t>(tail), res.end()) <= tol;
}

BoundReport check_halpern_coupling(const IterationTrace& trace_x, const IterationTrace& trace_y,
                                   const Schedule& schedule, double tol) {
  if (trace_x.method != Method::Halpern || trace_y.method != Method::Halpern) {
    throw Error(ErrorCode::WrongTraceKind, "expected two Halpern traces");
  }
  require_nonempty(trace_x);
  require_nonempty(trace_y);
  if (!trace_x.anchor || !trace_y.anchor || !(*trace_x.anchor == *trace_y.anchor)) {
    throw Error(ErrorCode::ConfigMismatch, "runs use different anchors");
  }
  const std::size_t steps = std::min(trace_x.steps(), trace_y.steps());
  for (std::size_t k = 0; k < steps; ++k) {
    const double a = schedule.alpha(k);
    if (trace_x.alphas_used[k] != a || trace_y.alphas_used[k] != a) {
      throw Error(ErrorCode::ConfigMismatch, "weights differ from schedule at k=" + std::to_string(k));
    }
  }
  BoundReport r;
  const double d0 = distance(trace_x.iterates[0], trace_y.iterates[0]);
  double sum = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    sum += trace_x.alphas_used[n];
    r.per_step_lhs.push_back(distance(trace_x.iterates[n + 1], trace_y.iterates[n + 1]));
    r.per_step_rhs.push_back(d0 * std::exp(-sum));
  }
  finish(r, tol);
  return r;
}

BoundReport check_halpern_exp_bound(const IterationTrace& trace, const Vec& p_star,
                                    const Schedule& schedule, double eps, double tol) {
  if (trace.method != Method::Halpern) throw Error(ErrorCode::WrongTraceKind, "expected Halpern");
  require_nonempty(trace);
  if (!trace.anchor || !(*trace.anchor == trace.iterates.front())) {
    throw Error(ErrorCode::ConfigMismatch, "exponential estimate needs x_0 = u");
  }
  const std::size_t steps = trace.steps();
  std::vector<double> err(trace.iterates.size());
  for (std::size_t n = 0; n < err.size(); ++n) err[n] = norm_squared(trace.iterates[n] - p_star);
  // prefix[n] = sum_{k<n} alpha_k
  std::vector<double> prefix(steps + 1, 0.0);
  for (std::size_t k = 0; k < steps; ++k) prefix[k + 1] = prefix[k] + schedule.alpha(k);

  // For fixed m the condition at step n reads
  //   log(err_{n+1} - 3 eps - tol) + prefix[n+1] <= log(err_m) + prefix[m],
  // so a suffix maximum of the left side decides every m at once.
  const double floor = 3.0 * eps + tol;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> suffix_max(steps + 1, neg_inf);
  for (std::size_t n = steps; n-- > 0;) {
    const double excess = err[n + 1] - floor;
    const double g = excess > 0.0 ? std::log(excess) + prefix[n + 1] : neg_inf;
    suffix_max[n] = std::max(suffix_max[n + 1], g);
  }
  // m is searched in the first half of the trace so that every admissible m
  // leaves a window of at least half the horizon.
  BoundReport r;
  for (std::size_t m = 0; m <= steps / 2; ++m) {
    const double budget = err[m] > 0.0 ? std::log(err[m]) + prefix[m] : neg_inf;
    if (suffix_max[m] == neg_inf || suffix_max[m] <= budget) {
      r.index = m;
      break;
    }
  }
  const std::size_t m = r.index.value_or(0);
  for (std::size_t n = m; n < steps; ++n) {
    r.per_step_lhs.push_back(err[n + 1]);
    r.per_step_rhs.push_back(3.0 * eps + err[m] * std::exp(-(prefix[n + 1] - prefix[m])));
  }
  r.max_excess = r.per_step_lhs.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.per_step_lhs.size(); ++i) {
    r.max_excess = std::max(r.max_excess, r.per_step_lhs[i] - r.per_step_rhs[i]);
  }
  r.holds = r.index.has_value();
  return r;
}

bool identify_limit(const IterationTrace& trace, const Vec& candidate, std::size_t tail,
                    double tol) {
  return check_strong_convergence(trace.iterates, candidate, tail, tol).converged;
}

bool check_domain_invariance(const IterationTrace& trace, const ConvexSet& domain, double tol) {
  return std::all_of(trace.iterates.begin(), trace.iterates.end(),
                     [&](const Vec& x) { return contains(domain, x, tol); });
}

std::pair<double, double> quarter_oscillations(std::span<const double> seq) {
  if (seq.size() < 4) throw Error(ErrorCode::BadWindow, "need at least 4 values");
  const std::size_t q = seq.size() / 4;
  auto osc = [](std::span<const double> s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *hi - *lo;
  };
  return {osc(seq.subspan(seq.size() - q)), osc(seq.subspan(0, q))};
}

}  // namespace fpi
