#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpi/hilbert.hpp"
#include "fpi/iterate.hpp"
#include "fpi/operators.hpp"
#include "fpi/sets.hpp"

namespace fpi {

/// Operator record as written in a config file. Sets are referenced by name.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::Identity;
  std::string set;                            // projection, reflection
  double theta = 0.0;                         // rotation
  std::size_t plane_i = 0;                    // rotation
  std::size_t plane_j = 1;                    // rotation
  std::vector<std::vector<double>> matrix;    // affine
  std::vector<double> shift;                  // affine
  double lambda = 0.5;                        // average
  std::vector<OperatorSpec> children;         // average: {inner}; compose: {first, second}

  friend bool operator==(const OperatorSpec&, const OperatorSpec&);
};

/// Names accepted in the [checks] section.
const std::vector<std::string>& known_check_names();

struct ExperimentConfig {
  std::string name;
  std::size_t dim = 0;
  std::map<std::string, ConvexSet> sets;
  OperatorSpec op;
  std::optional<std::string> domain;  // set name; full space when absent
  Method method = Method::Picard;
  std::optional<Schedule> schedule;
  Vec x0;
  std::optional<Vec> u;
  std::optional<Vec> coupling_x0;
  std::vector<Vec> anchors;
  std::size_t max_iter = 10000;
  double stop_residual = kDefaultTolerance;
  double stop_step = kDefaultTolerance;
  std::map<std::string, double> checks;  // check name -> tolerance
  std::optional<std::size_t> tail;
  double exp_eps = 1e-2;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool expect_pass = true;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the experiment format. Throws ParseError (with line number) on
/// malformed text and ValidationError (with field path) on bad content.
ExperimentConfig parse_config(const std::string& text);

/// Inverse of parse_config: parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& cfg);

/// Re-runs the semantic checks of parse_config on an in-memory config.
void validate_config(const ExperimentConfig& cfg);

Operator build_operator(const ExperimentConfig& cfg);
ConvexSet build_domain(const ExperimentConfig& cfg);

/// Fixed-point set of the configured problem (Fix T intersected with the
/// domain) when it is known exactly.
std::optional<ConvexSet> known_solution_set(const ExperimentConfig& cfg);

/// Decimal form with 17 significant digits (printf "%.17g"); round-trips doubles.
std::string format_real(double v);

}  // namespace fpi
