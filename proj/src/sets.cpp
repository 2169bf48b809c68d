#include "fpi/sets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const ConvexSet& c, const Vec& x) {
  if (c.dim() != x.dim()) {
    throw Error(ErrorCode::DimMismatch, "set has dim " + std::to_string(c.dim()) +
                                            ", point has dim " + std::to_string(x.dim()));
  }
}

// Member of the hyperplane <n, x> = offset closest to the origin.
Vec hyperplane_base(const Vec& normal, double offset) {
  return (offset / norm_squared(normal)) * normal;
}

Vec uniform_in_cube(const Vec& center, double half_width, Rng& rng) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<double> c(center.dim());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = center[i] + u(rng);
  return Vec(std::move(c));
}

Vec affine_point(const Vec& base, std::span<const Vec> dirs, std::span<const double> coef) {
  Vec p = base;
  for (std::size_t i = 0; i < dirs.size(); ++i) p += coef[i] * dirs[i];
  return p;
}

}  // namespace

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::Ball: return "ball";
    case SetKind::Box: return "box";
    case SetKind::Halfspace: return "halfspace";
    case SetKind::Hyperplane: return "hyperplane";
    case SetKind::AffineSubspace: return "affine";
    case SetKind::FullSpace: return "full";
  }
  return "unknown";
}

ConvexSet ConvexSet::ball(Vec center, double radius) {
  if (center.empty()) throw Error(ErrorCode::BadSet, "ball center has dim 0");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::BadSet, "radius must be positive and finite");
  }
  const std::size_t d = center.dim();
  return ConvexSet(Ball{std::move(center), radius}, d);
}

ConvexSet ConvexSet::box(Vec lo, Vec hi) {
  if (lo.empty()) throw Error(ErrorCode::BadSet, "box has dim 0");
  if (lo.dim() != hi.dim()) throw Error(ErrorCode::BadSet, "box lo/hi dimensions differ");
  for (std::size_t i = 0; i < lo.dim(); ++i) {
    if (lo[i] > hi[i]) throw Error(ErrorCode::BadSet, "box lo > hi at " + std::to_string(i));
  }
  const std::size_t d = lo.dim();
  return ConvexSet(Box{std::move(lo), std::move(hi)}, d);
}

ConvexSet ConvexSet::halfspace(Vec normal, double offset) {
  if (normal.empty() || norm(normal) == 0.0) throw Error(ErrorCode::BadSet, "normal is zero");
  if (!std::isfinite(offset)) throw Error(ErrorCode::BadSet, "offset is not finite");
  const std::size_t d = normal.dim();
  return ConvexSet(Halfspace{std::move(normal), offset}, d);
}

ConvexSet ConvexSet::hyperplane(Vec normal, double offset) {
  if (normal.empty() || norm(normal) == 0.0) throw Error(ErrorCode::BadSet, "normal is zero");
  if (!std::isfinite(offset)) throw Error(ErrorCode::BadSet, "offset is not finite");
  const std::size_t d = normal.dim();
  return ConvexSet(Hyperplane{std::move(normal), offset}, d);
}

ConvexSet ConvexSet::affine(Vec basepoint, std::vector<Vec> directions) {
  if (basepoint.empty()) throw Error(ErrorCode::BadSet, "basepoint has dim 0");
  if (directions.size() > basepoint.dim()) {
    throw Error(ErrorCode::BadSet, "more directions than dimensions");
  }
  for (std::size_t i = 0; i < directions.size(); ++i) {
    if (directions[i].dim() != basepoint.dim()) {
      throw Error(ErrorCode::BadSet, "direction " + std::to_string(i) + " has wrong dim");
    }
    for (std::size_t j = 0; j <= i; ++j) {
      const double expected = (i == j) ? 1.0 : 0.0;
      if (std::abs(inner(directions[i], directions[j]) - expected) > 1e-10) {
        throw Error(ErrorCode::BadSet, "directions are not orthonormal");
      }
    }
  }
  const std::size_t d = basepoint.dim();
  return ConvexSet(AffineSubspace{std::move(basepoint), std::move(directions)}, d);
}

ConvexSet ConvexSet::full(std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::BadSet, "full space of dim 0");
  return ConvexSet(FullSpace{dim}, dim);
}

double distance_to(const ConvexSet& c, const Vec& x) {
  require_dim(c, x);
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return std::max(0.0, distance(x, b.center) - b.radius); },
          [&](const Box& b) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.dim(); ++i) {
              const double e = std::max({b.lo[i] - x[i], x[i] - b.hi[i], 0.0});
              s += e * e;
            }
            return std::sqrt(s);
          },
          [&](const Halfspace& h) {
            return std::max(0.0, (inner(h.normal, x) - h.offset) / norm(h.normal));
          },
          [&](const Hyperplane& h) {
            return std::abs(inner(h.normal, x) - h.offset) / norm(h.normal);
          },
          [&](const AffineSubspace& a) {
            Vec r = x - a.basepoint;
            for (const Vec& d : a.directions) r -= inner(r, d) * d;
            return norm(r);
          },
          [](const FullSpace&) { return 0.0; },
      },
      c.shape());
}

bool contains(const ConvexSet& c, const Vec& x, double tol) { return distance_to(c, x) <= tol; }

Vec project(const ConvexSet& c, const Vec& u) {
  require_dim(c, u);
  if (contains(c, u, 0.0)) return u;
  return std::visit(
      Overloaded{
          [&](const Ball& b) {
            Vec offset = u - b.center;
            return b.center + (b.radius / norm(offset)) * offset;
          },
          [&](const Box& b) {
            std::vector<double> p(u.dim());
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(u[i], b.lo[i], b.hi[i]);
            return Vec(std::move(p));
          },
          [&](const Halfspace& h) {
            const double excess = inner(h.normal, u) - h.offset;
            return u - (excess / norm_squared(h.normal)) * h.normal;
          },
          [&](const Hyperplane& h) {
            const double excess = inner(h.normal, u) - h.offset;
            return u - (excess / norm_squared(h.normal)) * h.normal;
          },
          [&](const AffineSubspace& a) {
            const Vec r = u - a.basepoint;
            Vec p = a.basepoint;
            for (const Vec& d : a.directions) p += inner(r, d) * d;
            return p;
          },
          [&](const FullSpace&) { return u; },
      },
      c.shape());
}

ProjectionReport check_projection_vi(const ConvexSet& c, const Vec& u, const Vec& p,
                                     std::span<const Vec> samples, double tol) {
  require_dim(c, u);
  require_dim(c, p);
  ProjectionReport report{p, 0.0, std::nullopt, false};
  const Vec outward = u - p;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!contains(c, samples[i], tol)) {
      throw Error(ErrorCode::SampleOutsideSet, "sample " + std::to_string(i) + " is not in C");
    }
    report.vi_violation = std::max(report.vi_violation, inner(outward, samples[i] - p));
  }
  report.valid = report.vi_violation <= tol;
  return report;
}

std::vector<Vec> orthonormal_complement(const Vec& v) {
  const std::size_t d = v.dim();
  std::vector<Vec> basis{(1.0 / norm(v)) * v};
  for (std::size_t i = 0; i < d && basis.size() < d; ++i) {
    Vec w = Vec::basis(d, i);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& b : basis) w -= inner(w, b) * b;
    }
    const double n = norm(w);
    if (n > 1e-6) basis.push_back((1.0 / n) * w);
  }
  basis.erase(basis.begin());
  return basis;
}

Vec sample_member(const ConvexSet& c, Rng& rng, double window) {
  const std::size_t d = c.dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-window, window);
  auto coefficients = [&](std::size_t k) {
    std::vector<double> coef(k);
    for (double& v : coef) v = sym(rng);
    return coef;
  };
  return std::visit(
      Overloaded{
          [&](const Ball& b) {
            const double r = b.radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
            return b.center + r * random_unit(d, rng);
          },
          [&](const Box& b) {
            std::vector<double> p(d);
            for (std::size_t i = 0; i < d; ++i) p[i] = b.lo[i] + unit(rng) * (b.hi[i] - b.lo[i]);
            // Rounding can push lo + t*(hi - lo) past hi.
            for (std::size_t i = 0; i < d; ++i) p[i] = std::clamp(p[i], b.lo[i], b.hi[i]);
            return Vec(std::move(p));
          },
          [&](const Halfspace& h) {
            const auto dirs = orthonormal_complement(h.normal);
            Vec p = affine_point(hyperplane_base(h.normal, h.offset), dirs,
                                 coefficients(dirs.size()));
            return p - (window * unit(rng) / norm(h.normal)) * h.normal;
          },
          [&](const Hyperplane& h) {
            const auto dirs = orthonormal_complement(h.normal);
            return affine_point(hyperplane_base(h.normal, h.offset), dirs,
                                coefficients(dirs.size()));
          },
          [&](const AffineSubspace& a) {
            return affine_point(a.basepoint, a.directions, coefficients(a.directions.size()));
          },
          [&](const FullSpace&) { return uniform_in_cube(Vec(d), window, rng); },
      },
      c.shape());
}

std::pair<Vec, Vec> sample_member_pair(const ConvexSet& c, Rng& rng, double window) {
  Vec x = sample_member(c, rng, window);
  Vec z = sample_member(c, rng, window);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.5) return {std::move(x), std::move(z)};
  // Convex combination keeps y in C while bringing it close to x.
  const double t = std::pow(10.0, -3.0 * unit(rng));
  Vec y = combine(1.0 - t, x, t, z);
  return {std::move(x), std::move(y)};
}

namespace {

// Largest t in [0,1] with from + t (to - from) in C, by bisection. from must be in C.
Vec advance_toward(const ConvexSet& c, const Vec& from, const Vec& to) {
  if (contains(c, to, 0.0)) return to;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (contains(c, combine(1.0 - mid, from, mid, to), 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return combine(1.0 - lo, from, lo, to);
}

// Sets of full dimension are searched in ambient coordinates; flat sets are
// searched in the coordinates of an explicit orthonormal parametrization.
struct Parametrization {
  Vec base;
  std::vector<Vec> dirs;
};

std::optional<Parametrization> flat_parametrization(const ConvexSet& c) {
  if (const auto* h = std::get_if<Hyperplane>(&c.shape())) {
    return Parametrization{hyperplane_base(h->normal, h->offset), orthonormal_complement(h->normal)};
  }
  if (const auto* a = std::get_if<AffineSubspace>(&c.shape())) {
    return Parametrization{a->basepoint, a->directions};
  }
  return std::nullopt;
}

// A member of C; for full-dimensional sets a point of the relative interior.
Vec reference_member(const ConvexSet& c, const Vec& u) {
  return std::visit(Overloaded{
                        [](const Ball& b) { return b.center; },
                        [](const Box& b) { return combine(0.5, b.lo, 0.5, b.hi); },
                        [](const Halfspace& h) {
                          return hyperplane_base(h.normal, h.offset) - (1.0 / norm(h.normal)) * h.normal;
                        },
                        [](const Hyperplane& h) { return hyperplane_base(h.normal, h.offset); },
                        [](const AffineSubspace& a) { return a.basepoint; },
                        [&](const FullSpace&) { return u; },
                    },
                    c.shape());
}

}  // namespace

Vec oracle_project(const ConvexSet& c, const Vec& u, std::size_t budget, std::uint64_t seed) {
  require_dim(c, u);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec m0 = reference_member(c, u);
  const double radius = std::max(1.0, distance(u, m0));
  const std::size_t global_draws = std::max<std::size_t>(1, budget / 2);

  if (auto flat = flat_parametrization(c)) {
    const std::size_t k = flat->dirs.size();
    if (k == 0) return flat->base;
    std::uniform_real_distribution<double> sym(-2.0 * radius, 2.0 * radius);
    std::vector<double> best_coef(k, 0.0);
    double best = distance(affine_point(flat->base, flat->dirs, best_coef), u);
    std::vector<double> coef(k);
    for (std::size_t i = 0; i < global_draws; ++i) {
      for (double& v : coef) v = sym(rng);
      const double d = distance(affine_point(flat->base, flat->dirs, coef), u);
      if (d < best) {
        best = d;
        best_coef = coef;
      }
    }
    double step = radius / 4.0;
    int failures = 0;
    for (std::size_t i = global_draws; i < budget && step > 1e-14; ++i) {
      for (std::size_t j = 0; j < k; ++j) coef[j] = best_coef[j] + step * normal(rng);
      const double d = distance(affine_point(flat->base, flat->dirs, coef), u);
      if (d < best) {
        best = d;
        best_coef = coef;
        failures = 0;
      } else if (++failures == 20) {
        step *= 0.5;
        failures = 0;
      }
    }
    return affine_point(flat->base, flat->dirs, best_coef);
  }

  if (contains(c, u, 0.0)) return u;
  Vec best_point = m0;
  double best = distance(m0, u);
  const bool bounded = c.kind() == SetKind::Ball || c.kind() == SetKind::Box;
  for (std::size_t i = 0; i < global_draws; ++i) {
    Vec w = bounded ? sample_member(c, rng) : uniform_in_cube(u, radius, rng);
    if (!contains(c, w, 0.0)) continue;
    const double d = distance(w, u);
    if (d < best) {
      best = d;
      best_point = std::move(w);
    }
  }
  best_point = advance_toward(c, best_point, u);
  best = distance(best_point, u);

  // Compass search: each sweep tries +-e_j for every axis and dim random unit
  // directions; the step halves only after a sweep without improvement. A
  // proposal outside C is pulled back along the segment from the incumbent,
  // and the result is pushed toward u.
  const std::size_t dim = c.dim();
  double step = std::max(best, 1e-3);
  std::size_t evals = global_draws;
  while (evals < budget && step > 1e-13) {
    bool improved = false;
    for (std::size_t k = 0; k < 3 * dim && evals < budget; ++k, ++evals) {
      std::vector<double> p(best_point.coords().begin(), best_point.coords().end());
      if (k < 2 * dim) {
        p[k / 2] += k % 2 ? step : -step;
      } else {
        const Vec d = random_unit(dim, rng);
        for (std::size_t j = 0; j < dim; ++j) p[j] += step * d[j];
      }
      const Vec proposal(std::move(p));
      Vec candidate = advance_toward(c, advance_toward(c, best_point, proposal), u);
      const double dist = distance(candidate, u);
      if (dist < best * (1.0 - 1e-15)) {
        best = dist;
        best_point = std::move(candidate);
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best_point;
}

}  // namespace fpi
