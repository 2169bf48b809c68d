#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "fpi/hilbert.hpp"
#include "fpi/operators.hpp"
#include "fpi/sets.hpp"

namespace fpi {

enum class ScheduleFamily { Constant, OneOverNPlusK, Custom };

std::string_view to_string(ScheduleFamily family);

/// Step-weight sequence alpha_n.
class Schedule {
public:
  static Schedule constant(double alpha, std::size_t declared_horizon = 0);
  /// alpha_n = 1 / (n + k), k >= 1.
  static Schedule one_over_n_plus_k(unsigned k, std::size_t declared_horizon = 0);
  /// Values are taken as given; range problems surface in validate_schedule.
  static Schedule custom(std::vector<double> values);

  ScheduleFamily family() const noexcept { return family_; }
  double constant_alpha() const noexcept { return alpha_; }
  unsigned offset() const noexcept { return k_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t declared_horizon() const noexcept { return horizon_; }

  /// alpha_n; Custom schedules throw BadSchedule past their last value.
  double alpha(std::size_t n) const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

private:
  ScheduleFamily family_ = ScheduleFamily::Constant;
  double alpha_ = 0.5;
  unsigned k_ = 2;
  std::vector<double> values_;
  std::size_t horizon_ = 0;
};

enum class Condition { Proven, FiniteHorizonConsistent, Violated };

std::string_view to_string(Condition c);

/// Status of each weight condition. km_* are the KM conditions
/// (alpha_n in [0,1]; sum alpha_n (1 - alpha_n) diverges); h_* the Halpern
/// ones (alpha_n in (0,1); alpha_n -> 0; sum alpha_n diverges;
/// sum |alpha_{n+1} - alpha_n| converges).
struct ScheduleVerdict {
  Condition km_cond1 = Condition::Proven;
  Condition km_cond2 = Condition::Proven;
  Condition h_cond1 = Condition::Proven;
  Condition h_cond2 = Condition::Proven;
  Condition h_cond3 = Condition::Proven;
  Condition h_cond4 = Condition::Proven;
  std::optional<std::size_t> km_range_witness;  // first n with alpha_n outside [0,1]
  std::optional<std::size_t> h_range_witness;   // first n with alpha_n outside (0,1)

  bool km_admissible() const {
    return km_cond1 != Condition::Violated && km_cond2 != Condition::Violated;
  }
  bool halpern_admissible() const {
    return h_cond1 != Condition::Violated && h_cond2 != Condition::Violated &&
           h_cond3 != Condition::Violated && h_cond4 != Condition::Violated;
  }
};

/// Finite-horizon tests applied to Custom schedules.
struct ScheduleThresholds {
  /// Partial sums must reach this value to count as divergent.
  double divergence_threshold = 2.0;
  /// Sum of |alpha_{n+1} - alpha_n| over the last tenth of the horizon must
  /// stay below this fraction of the whole sum.
  double flatness_ratio = 1e-2;
  /// Max of alpha over the second half must be at most this fraction of the
  /// max over the first tenth.
  double decay_ratio = 0.5;
};

ScheduleVerdict validate_schedule(const Schedule& s, std::size_t horizon,
                                  const ScheduleThresholds& thresholds = {});

enum class Method { Picard, KM, Halpern };
enum class StopReason { MaxIter, ResidualBelow, StepBelow };

std::string_view to_string(Method m);
std::string_view to_string(StopReason r);

/// Iterates x_0..x_N with residuals ||T x_n - x_n|| and the weights used.
struct IterationTrace {
  Method method = Method::Picard;
  std::vector<Vec> iterates;
  std::vector<double> residuals;
  std::vector<double> alphas_used;  // Picard records 1 (x_{n+1} = T x_n)
  StopReason stop_reason = StopReason::MaxIter;
  std::optional<Vec> anchor;  // Halpern only

  std::size_t steps() const noexcept { return alphas_used.size(); }
  const Vec& final_iterate() const { return iterates.back(); }
};

struct KMConfig {
  Operator op;
  ConvexSet domain;
  Vec x0;
  Schedule schedule;
  std::size_t max_iter = 10000;
  double stop_residual = 0.0;
};

struct HalpernConfig {
  Operator op;
  ConvexSet domain;
  Vec x0;
  Vec u;
  Schedule schedule = Schedule::one_over_n_plus_k(2);
  std::size_t max_iter = 10000;
  double stop_step = 0.0;
};

/// x + alpha (tx - x), coordinatewise.
Vec km_step(const Vec& x, const Vec& tx, double alpha);
/// alpha u + (1 - alpha) tx, coordinatewise.
Vec halpern_step(const Vec& u, const Vec& tx, double alpha);

IterationTrace run_picard(const Operator& t, const Vec& x0, std::size_t max_iter,
                          double stop_residual);
IterationTrace run_km(const KMConfig& cfg);
IterationTrace run_halpern(const HalpernConfig& cfg);

}  // namespace fpi
