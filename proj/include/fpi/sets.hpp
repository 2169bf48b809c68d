#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "fpi/hilbert.hpp"

namespace fpi {

struct Ball {
  Vec center;
  double radius = 1.0;
  friend bool operator==(const Ball&, const Ball&) = default;
};

struct Box {
  Vec lo;
  Vec hi;
  friend bool operator==(const Box&, const Box&) = default;
};

/// {x : <normal, x> <= offset}
struct Halfspace {
  Vec normal;
  double offset = 0.0;
  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// {x : <normal, x> = offset}
struct Hyperplane {
  Vec normal;
  double offset = 0.0;
  friend bool operator==(const Hyperplane&, const Hyperplane&) = default;
};

/// basepoint + span(directions); no directions encodes a single point.
struct AffineSubspace {
  Vec basepoint;
  std::vector<Vec> directions;
  friend bool operator==(const AffineSubspace&, const AffineSubspace&) = default;
};

struct FullSpace {
  std::size_t dim = 0;
  friend bool operator==(const FullSpace&, const FullSpace&) = default;
};

enum class SetKind { Ball, Box, Halfspace, Hyperplane, AffineSubspace, FullSpace };

std::string_view to_string(SetKind kind);

/// Nonempty closed convex subset of R^n with a closed-form projection.
///
/// Instances are only built through the named constructors, which enforce
/// the shape invariants and throw BadSet otherwise.
class ConvexSet {
public:
  using Shape = std::variant<Ball, Box, Halfspace, Hyperplane, AffineSubspace, FullSpace>;

  static ConvexSet ball(Vec center, double radius);
  static ConvexSet box(Vec lo, Vec hi);
  static ConvexSet halfspace(Vec normal, double offset);
  static ConvexSet hyperplane(Vec normal, double offset);
  static ConvexSet affine(Vec basepoint, std::vector<Vec> orthonormal_directions);
  static ConvexSet point(Vec p) { return affine(std::move(p), {}); }
  static ConvexSet full(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  SetKind kind() const noexcept { return static_cast<SetKind>(shape_.index()); }
  const Shape& shape() const noexcept { return shape_; }

  friend bool operator==(const ConvexSet&, const ConvexSet&) = default;

private:
  ConvexSet(Shape shape, std::size_t dim) : shape_(std::move(shape)), dim_(dim) {}
  Shape shape_;
  std::size_t dim_ = 0;
};

/// Euclidean distance from x to C.
double distance_to(const ConvexSet& c, const Vec& x);

bool contains(const ConvexSet& c, const Vec& x, double tol);

/// Nearest point of C to u.
Vec project(const ConvexSet& c, const Vec& u);

struct ProjectionReport {
  Vec point;
  double vi_violation = 0.0;
  std::optional<double> oracle_gap;
  bool valid = false;  // vi_violation <= tol
};

/// Checks <u - p, w - p> <= 0 over sampled members w of C.
ProjectionReport check_projection_vi(const ConvexSet& c, const Vec& u, const Vec& p,
                                     std::span<const Vec> samples, double tol);

/// Brute-force nearest point by seeded sampling plus bisection toward u.
/// Independent of project(); meant for tests and cross-checks.
Vec oracle_project(const ConvexSet& c, const Vec& u, std::size_t budget, std::uint64_t seed);

/// Random member of C. Unbounded sets are sampled in a window of the given
/// half-width around a reference member.
Vec sample_member(const ConvexSet& c, Rng& rng, double window = 5.0);

/// Pair of members of C, mixing independent draws with close pairs.
std::pair<Vec, Vec> sample_member_pair(const ConvexSet& c, Rng& rng, double window = 5.0);

/// Orthonormal basis of the orthogonal complement of span{v}.
std::vector<Vec> orthonormal_complement(const Vec& v);

}  // namespace fpi
