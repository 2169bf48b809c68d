#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fpi/hilbert.hpp"
#include "fpi/sets.hpp"

namespace fpi {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  static Matrix identity(std::size_t n, double scale = 1.0);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  Vec apply(const Vec& x) const;
  Vec apply_transposed(const Vec& y) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Spectral norm estimate by power iteration on A^T A.
double operator_norm(const Matrix& a);

enum class OperatorKind {
  Identity,
  NegIdentity,
  Projection,
  Reflection,
  Rotation2D,
  AffineMap,
  Average,
  Compose,
};

std::string_view to_string(OperatorKind kind);

/// Immutable expression tree of a nonexpansive map on R^n.
///
/// Built only through the named constructors; subtrees are shared, so copies
/// are cheap. Compose(first, second) evaluates second(first(x)).
class Operator {
public:
  static Operator identity();
  static Operator neg_identity();
  static Operator projection(ConvexSet c);
  /// 2 P_C - I
  static Operator reflection(ConvexSet c);
  /// Rotation by theta in the (i, j) coordinate plane; other coordinates fixed.
  static Operator rotation(double theta, std::size_t i, std::size_t j);
  /// x -> A x + shift. Rejected with BadOperator unless ||A|| <= 1 + 1e-10.
  static Operator affine(Matrix a, Vec shift);
  /// (1 - lambda) I + lambda T
  static Operator average(Operator inner, double lambda);
  static Operator compose(Operator first, Operator second);

  OperatorKind kind() const noexcept;
  const ConvexSet& set() const;
  double theta() const;
  std::pair<std::size_t, std::size_t> plane() const;
  const Matrix& matrix() const;
  const Vec& shift() const;
  double lambda() const;
  const Operator& inner() const;
  const Operator& first() const;
  const Operator& second() const;

  /// Dimension fixed by the tree, if any leaf pins one.
  std::optional<std::size_t> fixed_dim() const;
  /// Smallest dimension the tree can act on.
  std::size_t min_dim() const;

  friend bool operator==(const Operator& a, const Operator& b);

  struct Node;

private:
  explicit Operator(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Vec apply(const Operator& t, const Vec& x);

/// ||T x - x||
double residual(const Operator& t, const Vec& x);

struct CertReport {
  std::size_t pairs_tested = 0;
  double worst_ratio = 0.0;
  std::optional<std::pair<Vec, Vec>> witness;  // set iff not certified
  bool certified = true;
};

/// Sampled check of ||Tx - Ty|| <= ||x - y|| over seeded pairs in domain.
CertReport certify_nonexpansive(const Operator& t, const ConvexSet& domain, std::size_t pairs,
                                std::uint64_t seed, double tol);

/// Sampled check of ||Tx - y|| <= ||x - y|| for the given fixed points y.
CertReport certify_quasinonexpansive(const Operator& t, const ConvexSet& domain,
                                     std::span<const Vec> fixed_points, std::size_t samples,
                                     std::uint64_t seed, double tol);

/// <y - Tx, x - Tx> <= 1/2 ||Tx - x||^2 + tol for every probe x.
bool check_fix_halfspace_characterization(const Operator& t, const ConvexSet& domain,
                                          const Vec& y, std::span<const Vec> probes,
                                          double tol);

/// Exact descriptor of Fix T in R^dim when the tree shape admits one.
std::optional<ConvexSet> known_fixed_set(const Operator& t, std::size_t dim);

struct SelfMapReport {
  std::size_t samples_tested = 0;
  std::size_t violations = 0;
  double worst_distance = 0.0;  // max dist(T x, D)
};

/// Sampled check of T(D) subset of D.
SelfMapReport certify_self_map(const Operator& t, const ConvexSet& domain, std::size_t samples,
                               std::uint64_t seed, double tol);

}  // namespace fpi
