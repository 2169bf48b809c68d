#include "fpi/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

namespace {

void require_finite(std::span<const double> coords) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw Error(ErrorCode::NonFinite, "coordinate " + std::to_string(i) + " is not finite");
    }
  }
}

std::size_t checked_tail_start(std::size_t length, std::size_t tail) {
  if (length == 0) throw Error(ErrorCode::EmptyTrace, "sequence is empty");
  if (tail == 0) throw Error(ErrorCode::EmptyTrace, "empty tail window");
  if (tail > length) {
    throw Error(ErrorCode::BadWindow, "tail " + std::to_string(tail) + " exceeds length " +
                                          std::to_string(length));
  }
  return length - tail;
}

}  // namespace

Vec::Vec(std::initializer_list<double> coords) : coords_(coords) { require_finite(coords_); }

Vec::Vec(std::vector<double> coords) : coords_(std::move(coords)) { require_finite(coords_); }

Vec Vec::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw Error(ErrorCode::DimMismatch, "basis index out of range");
  Vec e(dim);
  e.coords_[index] = 1.0;
  return e;
}

bool Vec::all_finite() const noexcept {
  return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
}

Vec& Vec::operator+=(const Vec& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

Vec& Vec::operator*=(double s) noexcept {
  for (double& v : coords_) v *= s;
  return *this;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator-(Vec a) { return a *= -1.0; }
Vec operator*(double s, Vec a) { return a *= s; }
Vec operator*(Vec a, double s) { return a *= s; }

Vec combine(double a, const Vec& x, double b, const Vec& y) {
  require_same_dim(x, y);
  Vec out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out.coords_[i] = a * x.coords_[i] + b * y.coords_[i];
  return out;
}

void require_same_dim(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
}

double inner(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm_squared(const Vec& a) { return inner(a, a); }

double norm(const Vec& a) { return std::sqrt(norm_squared(a)); }

double distance(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec random_gaussian(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(dim);
  for (double& v : c) v = normal(rng);
  return Vec(std::move(c));
}

Vec random_unit(std::size_t dim, Rng& rng) {
  for (;;) {
    Vec g = random_gaussian(dim, rng);
    const double n = norm(g);
    if (n > 1e-8) return (1.0 / n) * std::move(g);
  }
}

ConvergenceVerdict check_strong_convergence(std::span<const Vec> seq, const Vec& p,
                                            std::size_t tail, double tol) {
  const std::size_t start = checked_tail_start(seq.size(), tail);
  ConvergenceVerdict v;
  v.horizon = seq.size();
  v.tail = tail;
  for (std::size_t k = start; k < seq.size(); ++k) {
    v.tail_deviation = std::max(v.tail_deviation, distance(seq[k], p));
  }
  v.converged = v.tail_deviation <= tol;
  if (v.converged) v.limit_estimate = p;
  return v;
}

ConvergenceVerdict check_weak_convergence(std::span<const Vec> seq, const Vec& p,
                                          std::span<const Vec> test_vectors,
                                          std::size_t tail, double tol) {
  const std::size_t start = checked_tail_start(seq.size(), tail);
  if (test_vectors.empty()) throw Error(ErrorCode::BadWindow, "no test vectors");
  ConvergenceVerdict v;
  v.horizon = seq.size();
  v.tail = tail;
  for (const Vec& y : test_vectors) {
    const double target = inner(p, y);
    for (std::size_t k = start; k < seq.size(); ++k) {
      v.tail_deviation = std::max(v.tail_deviation, std::abs(inner(seq[k], y) - target));
    }
  }
  v.converged = v.tail_deviation <= tol;
  if (v.converged) v.limit_estimate = p;
  return v;
}

bool check_norm_lsc(std::span<const Vec> seq, const Vec& p, std::size_t tail, double slack) {
  const std::size_t start = checked_tail_start(seq.size(), tail);
  double tail_min = norm(seq[start]);
  for (std::size_t k = start + 1; k < seq.size(); ++k) tail_min = std::min(tail_min, norm(seq[k]));
  return norm(p) <= tail_min + slack;
}

std::vector<Vec> default_test_vectors(std::size_t dim, std::uint64_t seed) {
  std::vector<Vec> out;
  out.reserve(dim + 8);
  for (std::size_t i = 0; i < dim; ++i) out.push_back(Vec::basis(dim, i));
  Rng rng(seed);
  for (int i = 0; i < 8; ++i) out.push_back(random_unit(dim, rng));
  return out;
}

}  // namespace fpi
