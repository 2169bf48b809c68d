#include "fpi/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

std::string_view to_string(ScheduleFamily family) {
  switch (family) {
    case ScheduleFamily::Constant: return "constant";
    case ScheduleFamily::OneOverNPlusK: return "one_over_n_plus_k";
    case ScheduleFamily::Custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Proven: return "Proven";
    case Condition::FiniteHorizonConsistent: return "FiniteHorizonConsistent";
    case Condition::Violated: return "Violated";
  }
  return "unknown";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Picard: return "picard";
    case Method::KM: return "km";
    case Method::Halpern: return "halpern";
  }
  return "unknown";
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIter: return "MaxIter";
    case StopReason::ResidualBelow: return "ResidualBelow";
    case StopReason::StepBelow: return "StepBelow";
  }
  return "unknown";
}

Schedule Schedule::constant(double alpha, std::size_t declared_horizon) {
  if (!std::isfinite(alpha)) throw Error(ErrorCode::BadSchedule, "alpha is not finite");
  Schedule s;
  s.family_ = ScheduleFamily::Constant;
  s.alpha_ = alpha;
  s.horizon_ = declared_horizon;
  return s;
}

Schedule Schedule::one_over_n_plus_k(unsigned k, std::size_t declared_horizon) {
  if (k == 0) throw Error(ErrorCode::BadSchedule, "offset k must be positive");
  Schedule s;
  s.family_ = ScheduleFamily::OneOverNPlusK;
  s.k_ = k;
  s.horizon_ = declared_horizon;
  return s;
}

Schedule Schedule::custom(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySchedule, "custom schedule has no values");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::BadSchedule, "custom value is not finite");
  }
  Schedule s;
  s.family_ = ScheduleFamily::Custom;
  s.horizon_ = values.size();
  s.values_ = std::move(values);
  return s;
}

double Schedule::alpha(std::size_t n) const {
  switch (family_) {
    case ScheduleFamily::Constant: return alpha_;
    case ScheduleFamily::OneOverNPlusK: return 1.0 / static_cast<double>(n + k_);
    case ScheduleFamily::Custom:
      if (n >= values_.size()) {
        throw Error(ErrorCode::BadSchedule, "custom schedule has no value at n=" + std::to_string(n));
      }
      return values_[n];
  }
  return 0.0;
}

namespace {

Condition proven_if(bool ok) { return ok ? Condition::Proven : Condition::Violated; }
Condition consistent_if(bool ok) {
  return ok ? Condition::FiniteHorizonConsistent : Condition::Violated;
}

ScheduleVerdict validate_custom(const std::vector<double>& all, std::size_t horizon,
                                const ScheduleThresholds& th) {
  const std::size_t h = std::min(horizon, all.size());
  const std::span<const double> a(all.data(), h);
  ScheduleVerdict v;

  for (std::size_t n = 0; n < h; ++n) {
    if (!v.km_range_witness && !(a[n] >= 0.0 && a[n] <= 1.0)) v.km_range_witness = n;
    if (!v.h_range_witness && !(a[n] > 0.0 && a[n] < 1.0)) v.h_range_witness = n;
  }
  v.km_cond1 = proven_if(!v.km_range_witness);
  v.h_cond1 = proven_if(!v.h_range_witness);

  double km_sum = 0.0;
  double sum = 0.0;
  for (double x : a) {
    km_sum += x * (1.0 - x);
    sum += x;
  }
  v.km_cond2 = consistent_if(km_sum >= th.divergence_threshold);
  v.h_cond3 = consistent_if(sum >= th.divergence_threshold);

  const std::size_t head = std::max<std::size_t>(1, h / 10);
  const double head_max = *std::max_element(a.begin(), a.begin() + head);
  const double tail_max = *std::max_element(a.begin() + h / 2, a.end());
  v.h_cond2 = consistent_if(tail_max <= th.decay_ratio * head_max);

  double total = 0.0;
  double last_decade = 0.0;
  const std::size_t decade_start = h - std::max<std::size_t>(1, h / 10);
  for (std::size_t n = 0; n + 1 < h; ++n) {
    const double d = std::abs(a[n + 1] - a[n]);
    total += d;
    if (n + 1 > decade_start) last_decade += d;
  }
  v.h_cond4 = consistent_if(total == 0.0 || last_decade <= th.flatness_ratio * total);
  return v;
}

}  // namespace

ScheduleVerdict validate_schedule(const Schedule& s, std::size_t horizon,
                                  const ScheduleThresholds& thresholds) {
  if (horizon == 0) throw Error(ErrorCode::BadWindow, "horizon must be at least 1");
  ScheduleVerdict v;
  switch (s.family()) {
    case ScheduleFamily::Constant: {
      const double a = s.constant_alpha();
      const bool closed = a >= 0.0 && a <= 1.0;
      const bool open = a > 0.0 && a < 1.0;
      v.km_cond1 = proven_if(closed);
      v.km_cond2 = proven_if(open);
      v.h_cond1 = proven_if(open);
      v.h_cond2 = proven_if(a == 0.0);
      v.h_cond3 = proven_if(a > 0.0);
      v.h_cond4 = Condition::Proven;
      if (!closed) v.km_range_witness = 0;
      if (!open) v.h_range_witness = 0;
      return v;
    }
    case ScheduleFamily::OneOverNPlusK:
      // alpha_0 = 1 when k = 1, which leaves (0,1).
      if (s.offset() == 1) {
        v.h_cond1 = Condition::Violated;
        v.h_range_witness = 0;
      }
      return v;
    case ScheduleFamily::Custom: return validate_custom(s.values(), horizon, thresholds);
  }
  return v;
}

Vec km_step(const Vec& x, const Vec& tx, double alpha) {
  require_same_dim(x, tx);
  std::vector<double> out(x.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + alpha * (tx[i] - x[i]);
  return Vec(std::move(out));
}

Vec halpern_step(const Vec& u, const Vec& tx, double alpha) {
  require_same_dim(u, tx);
  std::vector<double> out(u.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * u[i] + (1.0 - alpha) * tx[i];
  return Vec(std::move(out));
}

namespace {

void require_weights(const Schedule& s, std::size_t max_iter) {
  if (s.family() == ScheduleFamily::Custom && s.values().size() < max_iter) {
    throw Error(ErrorCode::BadSchedule, "custom schedule covers " +
                                            std::to_string(s.values().size()) + " of " +
                                            std::to_string(max_iter) + " steps");
  }
  const std::size_t check = s.family() == ScheduleFamily::Custom ? max_iter : 1;
  for (std::size_t n = 0; n < check; ++n) {
    const double a = s.alpha(n);
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorCode::BadSchedule, "alpha_" + std::to_string(n) + " outside [0,1]");
    }
  }
}

void require_finite_iterate(const Vec& x, std::size_t n) {
  if (!x.all_finite()) {
    throw Error(ErrorCode::NonFinite, "iterate " + std::to_string(n) + " is not finite");
  }
}

// Shared loop: step(n, x, tx) produces x_{n+1}. Residuals are recorded for
// every stored iterate, including the last.
template <class Step, class StopAfter>
IterationTrace iterate_loop(Method method, const Operator& t, const Vec& x0,
                            std::size_t max_iter, double stop_residual, Step&& step,
                            StopAfter&& stop_after) {
  IterationTrace trace;
  trace.method = method;
  trace.iterates.reserve(max_iter + 1);
  trace.residuals.reserve(max_iter + 1);
  trace.alphas_used.reserve(max_iter);

  Vec x = x0;
  Vec tx = apply(t, x);
  trace.iterates.push_back(x);
  trace.residuals.push_back(distance(tx, x));
  for (std::size_t n = 0;; ++n) {
    if (trace.residuals.back() <= stop_residual) {
      trace.stop_reason = StopReason::ResidualBelow;
      return trace;
    }
    if (n == max_iter) {
      trace.stop_reason = StopReason::MaxIter;
      return trace;
    }
    auto [next, alpha] = step(n, x, tx);
    require_finite_iterate(next, n + 1);
    Vec tnext = apply(t, next);
    trace.alphas_used.push_back(alpha);
    trace.residuals.push_back(distance(tnext, next));
    trace.iterates.push_back(next);
    if (stop_after(x, next)) {
      trace.stop_reason = StopReason::StepBelow;
      return trace;
    }
    x = std::move(next);
    tx = std::move(tnext);
  }
}

}  // namespace

IterationTrace run_picard(const Operator& t, const Vec& x0, std::size_t max_iter,
                          double stop_residual) {
  return iterate_loop(
      Method::Picard, t, x0, max_iter, stop_residual,
      [](std::size_t, const Vec&, const Vec& tx) { return std::pair<Vec, double>{tx, 1.0}; },
      [](const Vec&, const Vec&) { return false; });
}

IterationTrace run_km(const KMConfig& cfg) {
  if (!contains(cfg.domain, cfg.x0, 1e-9)) {
    throw Error(ErrorCode::InitOutsideDomain, "x0 is not in the domain");
  }
  require_weights(cfg.schedule, cfg.max_iter);
  const Schedule& s = cfg.schedule;
  return iterate_loop(
      Method::KM, cfg.op, cfg.x0, cfg.max_iter, cfg.stop_residual,
      [&s](std::size_t n, const Vec& x, const Vec& tx) {
        const double a = s.alpha(n);
        if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::BadSchedule, "alpha outside [0,1]");
        return std::pair<Vec, double>{km_step(x, tx, a), a};
      },
      [](const Vec&, const Vec&) { return false; });
}

IterationTrace run_halpern(const HalpernConfig& cfg) {
  if (!contains(cfg.domain, cfg.x0, 1e-9)) {
    throw Error(ErrorCode::InitOutsideDomain, "x0 is not in the domain");
  }
  if (!contains(cfg.domain, cfg.u, 1e-9)) {
    throw Error(ErrorCode::AnchorOutsideDomain, "anchor u is not in the domain");
  }
  require_same_dim(cfg.x0, cfg.u);
  require_weights(cfg.schedule, cfg.max_iter);
  const Schedule& s = cfg.schedule;
  const Vec& u = cfg.u;
  const double stop_step = cfg.stop_step;
  // Halpern stops on the step length, never on the residual.
  IterationTrace trace = iterate_loop(
      Method::Halpern, cfg.op, cfg.x0, cfg.max_iter, -1.0,
      [&s, &u](std::size_t n, const Vec&, const Vec& tx) {
        const double a = s.alpha(n);
        if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::BadSchedule, "alpha outside [0,1]");
        return std::pair<Vec, double>{halpern_step(u, tx, a), a};
      },
      [stop_step](const Vec& x, const Vec& next) { return distance(x, next) <= stop_step; });
  trace.anchor = u;
  return trace;
}

}  // namespace fpi
