#include "fpi/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

struct Operator::Node {
  OperatorKind kind = OperatorKind::Identity;
  std::optional<ConvexSet> set;
  double theta = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  Matrix matrix;
  Vec shift;
  double lambda = 0.0;
  std::vector<Operator> children;
};

Matrix Matrix::identity(std::size_t n, double scale) {
  Matrix m{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) m.data[k * n + k] = scale;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw Error(ErrorCode::DimMismatch, "ragged matrix rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

Vec Matrix::apply(const Vec& x) const {
  if (x.dim() != cols) throw Error(ErrorCode::DimMismatch, "matrix/vector dimensions");
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += data[r * cols + c] * x[c];
    y[r] = s;
  }
  return Vec(std::move(y));
}

Vec Matrix::apply_transposed(const Vec& y) const {
  if (y.dim() != rows) throw Error(ErrorCode::DimMismatch, "matrix/vector dimensions");
  std::vector<double> x(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) x[c] += data[r * cols + c] * y[r];
  }
  return Vec(std::move(x));
}

double operator_norm(const Matrix& a) {
  if (a.rows == 0 || a.cols == 0) return 0.0;
  // Deterministic, generic start vector.
  std::vector<double> start(a.cols);
  for (std::size_t k = 0; k < a.cols; ++k) start[k] = 1.0 + 0.1 * std::sin(1.0 + k);
  Vec v(std::move(start));
  v *= 1.0 / norm(v);
  double estimate = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Vec w = a.apply_transposed(a.apply(v));
    const double n = norm(w);
    if (n == 0.0) return std::sqrt(estimate);
    const double next = n;  // Rayleigh growth of A^T A on a unit vector
    v = (1.0 / n) * std::move(w);
    if (it > 10 && std::abs(next - estimate) <= 1e-15 * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return std::sqrt(estimate);
}

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Identity: return "identity";
    case OperatorKind::NegIdentity: return "neg_identity";
    case OperatorKind::Projection: return "projection";
    case OperatorKind::Reflection: return "reflection";
    case OperatorKind::Rotation2D: return "rotation";
    case OperatorKind::AffineMap: return "affine";
    case OperatorKind::Average: return "average";
    case OperatorKind::Compose: return "compose";
  }
  return "unknown";
}

namespace {

std::shared_ptr<Operator::Node> new_node(OperatorKind kind) {
  auto node = std::make_shared<Operator::Node>();
  node->kind = kind;
  return node;
}

}  // namespace

Operator Operator::identity() { return Operator(new_node(OperatorKind::Identity)); }

Operator Operator::neg_identity() { return Operator(new_node(OperatorKind::NegIdentity)); }

Operator Operator::projection(ConvexSet c) {
  auto node = new_node(OperatorKind::Projection);
  node->set = std::move(c);
  return Operator(std::move(node));
}

Operator Operator::reflection(ConvexSet c) {
  auto node = new_node(OperatorKind::Reflection);
  node->set = std::move(c);
  return Operator(std::move(node));
}

Operator Operator::rotation(double theta, std::size_t i, std::size_t j) {
  if (i == j) throw Error(ErrorCode::BadOperator, "rotation plane indices must differ");
  if (!std::isfinite(theta)) throw Error(ErrorCode::BadOperator, "rotation angle not finite");
  auto node = new_node(OperatorKind::Rotation2D);
  node->theta = theta;
  node->i = i;
  node->j = j;
  return Operator(std::move(node));
}

Operator Operator::affine(Matrix a, Vec shift) {
  if (a.rows != a.cols || a.rows == 0) throw Error(ErrorCode::BadOperator, "matrix must be square");
  if (shift.dim() != a.rows) throw Error(ErrorCode::BadOperator, "shift dimension mismatch");
  for (double v : a.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::BadOperator, "matrix entry not finite");
  }
  const double n = operator_norm(a);
  if (n > 1.0 + 1e-10) {
    throw Error(ErrorCode::BadOperator, "linear part has operator norm " + std::to_string(n));
  }
  auto node = new_node(OperatorKind::AffineMap);
  node->matrix = std::move(a);
  node->shift = std::move(shift);
  return Operator(std::move(node));
}

Operator Operator::average(Operator inner, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::BadOperator, "average weight outside [0,1]");
  }
  auto node = new_node(OperatorKind::Average);
  node->lambda = lambda;
  node->children.push_back(std::move(inner));
  return Operator(std::move(node));
}

Operator Operator::compose(Operator first, Operator second) {
  const auto a = first.fixed_dim();
  const auto b = second.fixed_dim();
  if (a && b && *a != *b) throw Error(ErrorCode::BadOperator, "composed operators disagree on dim");
  const std::size_t need = std::max(first.min_dim(), second.min_dim());
  if ((a && *a < need) || (b && *b < need)) {
    throw Error(ErrorCode::BadOperator, "rotation plane outside operator dimension");
  }
  auto node = new_node(OperatorKind::Compose);
  node->children.push_back(std::move(first));
  node->children.push_back(std::move(second));
  return Operator(std::move(node));
}

OperatorKind Operator::kind() const noexcept { return node_->kind; }

const ConvexSet& Operator::set() const {
  if (!node_->set) throw Error(ErrorCode::BadOperator, "operator has no set");
  return *node_->set;
}

double Operator::theta() const { return node_->theta; }
std::pair<std::size_t, std::size_t> Operator::plane() const { return {node_->i, node_->j}; }
const Matrix& Operator::matrix() const { return node_->matrix; }
const Vec& Operator::shift() const { return node_->shift; }
double Operator::lambda() const { return node_->lambda; }

const Operator& Operator::inner() const {
  if (kind() != OperatorKind::Average) throw Error(ErrorCode::BadOperator, "not an average");
  return node_->children[0];
}

const Operator& Operator::first() const {
  if (kind() != OperatorKind::Compose) throw Error(ErrorCode::BadOperator, "not a composition");
  return node_->children[0];
}

const Operator& Operator::second() const {
  if (kind() != OperatorKind::Compose) throw Error(ErrorCode::BadOperator, "not a composition");
  return node_->children[1];
}

std::optional<std::size_t> Operator::fixed_dim() const {
  switch (kind()) {
    case OperatorKind::Projection:
    case OperatorKind::Reflection: return node_->set->dim();
    case OperatorKind::AffineMap: return node_->matrix.rows;
    case OperatorKind::Average: return inner().fixed_dim();
    case OperatorKind::Compose: {
      if (auto d = first().fixed_dim()) return d;
      return second().fixed_dim();
    }
    default: return std::nullopt;
  }
}

std::size_t Operator::min_dim() const {
  switch (kind()) {
    case OperatorKind::Rotation2D: return std::max(node_->i, node_->j) + 1;
    case OperatorKind::Average: return inner().min_dim();
    case OperatorKind::Compose: return std::max(first().min_dim(), second().min_dim());
    default: return fixed_dim().value_or(1);
  }
}

bool operator==(const Operator& a, const Operator& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.set == y.set && x.theta == y.theta && x.i == y.i && x.j == y.j &&
         x.matrix == y.matrix && x.shift == y.shift && x.lambda == y.lambda &&
         x.children == y.children;
}

Vec apply(const Operator& t, const Vec& x) {
  if (auto d = t.fixed_dim(); d && *d != x.dim()) {
    throw Error(ErrorCode::DimMismatch, "operator acts on dim " + std::to_string(*d) +
                                            ", point has dim " + std::to_string(x.dim()));
  }
  if (t.min_dim() > x.dim()) {
    throw Error(ErrorCode::DimMismatch, "rotation plane outside point dimension");
  }
  switch (t.kind()) {
    case OperatorKind::Identity: return x;
    case OperatorKind::NegIdentity: return -x;
    case OperatorKind::Projection: return project(t.set(), x);
    case OperatorKind::Reflection: return combine(2.0, project(t.set(), x), -1.0, x);
    case OperatorKind::Rotation2D: {
      const auto [i, j] = t.plane();
      const double c = std::cos(t.theta());
      const double s = std::sin(t.theta());
      std::vector<double> y(x.coords().begin(), x.coords().end());
      y[i] = c * x[i] - s * x[j];
      y[j] = s * x[i] + c * x[j];
      return Vec(std::move(y));
    }
    case OperatorKind::AffineMap: return t.matrix().apply(x) + t.shift();
    case OperatorKind::Average: return combine(1.0 - t.lambda(), x, t.lambda(), apply(t.inner(), x));
    case OperatorKind::Compose: return apply(t.second(), apply(t.first(), x));
  }
  throw Error(ErrorCode::BadOperator, "unknown operator kind");
}

double residual(const Operator& t, const Vec& x) { return distance(apply(t, x), x); }

CertReport certify_nonexpansive(const Operator& t, const ConvexSet& domain, std::size_t pairs,
                                std::uint64_t seed, double tol) {
  Rng rng(seed);
  CertReport report;
  for (std::size_t k = 0; k < pairs; ++k) {
    auto [x, y] = sample_member_pair(domain, rng);
    const double gap = distance(x, y);
    if (gap <= 1e-12) continue;
    ++report.pairs_tested;
    const double ratio = distance(apply(t, x), apply(t, y)) / gap;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      if (ratio > 1.0 + tol) report.witness = std::make_pair(std::move(x), std::move(y));
    }
  }
  report.certified = report.worst_ratio <= 1.0 + tol;
  if (report.certified) report.witness.reset();
  return report;
}

namespace {

void require_fixed_point(const Operator& t, const ConvexSet& domain, const Vec& y, double tol) {
  const double r = residual(t, y);
  if (r > tol) {
    throw Error(ErrorCode::NotAFixedPoint, "residual " + std::to_string(r) + " exceeds tolerance");
  }
  if (!contains(domain, y, tol)) throw Error(ErrorCode::NotAFixedPoint, "point lies outside domain");
}

}  // namespace

CertReport certify_quasinonexpansive(const Operator& t, const ConvexSet& domain,
                                     std::span<const Vec> fixed_points, std::size_t samples,
                                     std::uint64_t seed, double tol) {
  if (fixed_points.empty()) throw Error(ErrorCode::NotAFixedPoint, "no fixed points supplied");
  for (const Vec& y : fixed_points) require_fixed_point(t, domain, y, tol);
  Rng rng(seed);
  CertReport report;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec x = sample_member(domain, rng);
    const Vec tx = apply(t, x);
    for (const Vec& y : fixed_points) {
      const double gap = distance(x, y);
      if (gap <= 1e-12) continue;
      ++report.pairs_tested;
      const double ratio = distance(tx, y) / gap;
      if (ratio > report.worst_ratio) {
        report.worst_ratio = ratio;
        if (ratio > 1.0 + tol) report.witness = std::make_pair(x, y);
      }
    }
  }
  report.certified = report.worst_ratio <= 1.0 + tol;
  if (report.certified) report.witness.reset();
  return report;
}

bool check_fix_halfspace_characterization(const Operator& t, const ConvexSet& domain,
                                          const Vec& y, std::span<const Vec> probes,
                                          double tol) {
  require_fixed_point(t, domain, y, tol);
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Vec& x = probes[k];
    if (!contains(domain, x, tol)) {
      throw Error(ErrorCode::SampleOutsideSet, "probe " + std::to_string(k) + " outside domain");
    }
    const Vec tx = apply(t, x);
    const double lhs = inner(y - tx, x - tx);
    const double rhs = 0.5 * norm_squared(tx - x);
    if (lhs > rhs + tol) return false;
  }
  return true;
}

namespace {

bool is_full(const std::optional<ConvexSet>& s) {
  return s && s->kind() == SetKind::FullSpace;
}

// Fix of a rotation in the (i, j) plane: the coordinates i and j vanish.
ConvexSet rotation_fixed_set(std::size_t dim, std::size_t i, std::size_t j) {
  std::vector<Vec> dirs;
  for (std::size_t k = 0; k < dim; ++k) {
    if (k != i && k != j) dirs.push_back(Vec::basis(dim, k));
  }
  return ConvexSet::affine(Vec(dim), std::move(dirs));
}

}  // namespace

std::optional<ConvexSet> known_fixed_set(const Operator& t, std::size_t dim) {
  if (auto d = t.fixed_dim(); d && *d != dim) {
    throw Error(ErrorCode::DimMismatch, "operator acts on dim " + std::to_string(*d));
  }
  switch (t.kind()) {
    case OperatorKind::Identity: return ConvexSet::full(dim);
    case OperatorKind::NegIdentity: return ConvexSet::point(Vec(dim));
    case OperatorKind::Projection:
    case OperatorKind::Reflection: return t.set();
    case OperatorKind::Rotation2D: {
      const double turns = t.theta() / (2.0 * std::numbers::pi);
      if (turns == std::round(turns)) return ConvexSet::full(dim);
      const auto [i, j] = t.plane();
      return rotation_fixed_set(dim, i, j);
    }
    case OperatorKind::AffineMap: return std::nullopt;
    case OperatorKind::Average:
      if (t.lambda() == 0.0) return ConvexSet::full(dim);
      return known_fixed_set(t.inner(), dim);
    case OperatorKind::Compose: {
      auto a = known_fixed_set(t.first(), dim);
      auto b = known_fixed_set(t.second(), dim);
      if (is_full(a)) return b;
      if (is_full(b)) return a;
      if (t.first().kind() == OperatorKind::Projection &&
          t.second().kind() == OperatorKind::Projection && t.first().set() == t.second().set()) {
        return t.first().set();
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

SelfMapReport certify_self_map(const Operator& t, const ConvexSet& domain, std::size_t samples,
                               std::uint64_t seed, double tol) {
  Rng rng(seed);
  SelfMapReport report;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec x = sample_member(domain, rng);
    const double d = distance_to(domain, apply(t, x));
    ++report.samples_tested;
    report.worst_distance = std::max(report.worst_distance, d);
    if (d > tol) ++report.violations;
  }
  return report;
}

}  // namespace fpi
