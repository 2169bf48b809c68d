#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace fpi {

using Rng = std::mt19937_64;

/// Dense element of R^n with the Euclidean inner product.
///
/// Coordinates supplied through the constructors must be finite. Arithmetic
/// results are not re-validated; the runners check finiteness per iterate.
class Vec {
public:
  Vec() = default;
  explicit Vec(std::size_t dim) : coords_(dim, 0.0) {}
  Vec(std::initializer_list<double> coords);
  explicit Vec(std::vector<double> coords);

  static Vec zeros(std::size_t dim) { return Vec(dim); }
  static Vec basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  bool all_finite() const noexcept;

  Vec& operator+=(const Vec& other);
  Vec& operator-=(const Vec& other);
  Vec& operator*=(double s) noexcept;

  friend bool operator==(const Vec&, const Vec&) = default;

private:
  friend Vec combine(double a, const Vec& x, double b, const Vec& y);
  std::vector<double> coords_;
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator-(Vec a);
Vec operator*(double s, Vec a);
Vec operator*(Vec a, double s);

/// a*x + b*y, evaluated coordinatewise in that order.
Vec combine(double a, const Vec& x, double b, const Vec& y);

double inner(const Vec& a, const Vec& b);
double norm(const Vec& a);
double norm_squared(const Vec& a);
double distance(const Vec& a, const Vec& b);

void require_same_dim(const Vec& a, const Vec& b);

Vec random_gaussian(std::size_t dim, Rng& rng);
Vec random_unit(std::size_t dim, Rng& rng);

struct ConvergenceVerdict {
  bool converged = false;
  std::optional<Vec> limit_estimate;
  double tail_deviation = 0.0;
  std::size_t horizon = 0;  // length of the sequence examined
  std::size_t tail = 0;
};

inline constexpr double kDefaultTolerance = 1e-9;

/// Norm convergence to p on the last `tail` entries of seq.
ConvergenceVerdict check_strong_convergence(std::span<const Vec> seq, const Vec& p,
                                            std::size_t tail, double tol);

/// Convergence of <seq[k], y> to <p, y> for each test vector y on the tail.
ConvergenceVerdict check_weak_convergence(std::span<const Vec> seq, const Vec& p,
                                          std::span<const Vec> test_vectors,
                                          std::size_t tail, double tol);

/// Finite-horizon surrogate of ||p|| <= liminf ||x_n||.
bool check_norm_lsc(std::span<const Vec> seq, const Vec& p, std::size_t tail,
                    double slack);

/// Standard basis of R^dim followed by 8 seeded random unit vectors.
std::vector<Vec> default_test_vectors(std::size_t dim, std::uint64_t seed);

}  // namespace fpi
