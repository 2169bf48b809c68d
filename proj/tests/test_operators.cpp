#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fpi/error.hpp"
#include "fpi/operators.hpp"

using fpi::ConvexSet;
using fpi::Operator;
using fpi::Vec;

namespace {

constexpr double kPi = std::numbers::pi;

fpi::ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const fpi::Error& e) {
    return e.code();
  }
  FAIL("expected fpi::Error");
  return fpi::ErrorCode::ParseError;
}

std::vector<Operator> zoo(std::size_t dim) {
  Vec lo(std::vector<double>(dim, -1.0));
  Vec hi(std::vector<double>(dim, 0.5));
  const auto ball = ConvexSet::ball(Vec::basis(dim, 0), 1.0);
  const auto box = ConvexSet::box(lo, hi);
  const auto half = ConvexSet::halfspace(Vec::basis(dim, 1), 0.2);
  std::vector<std::vector<double>> rows(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) {
    rows[i][i] = 0.6;
    rows[i][(i + 1) % dim] = 0.3;
  }
  const auto affine = Operator::affine(fpi::Matrix::from_rows(rows), Vec::basis(dim, 0));
  return {
      Operator::identity(),
      Operator::neg_identity(),
      Operator::projection(ball),
      Operator::projection(box),
      Operator::reflection(half),
      Operator::rotation(1.1, 0, 1),
      affine,
      Operator::average(Operator::reflection(ball), 0.3),
      Operator::compose(Operator::projection(ball), Operator::projection(half)),
      Operator::compose(Operator::rotation(0.4, 0, 1), Operator::average(affine, 0.7)),
  };
}

}  // namespace

TEST_CASE("apply examples") {
  CHECK(fpi::apply(Operator::identity(), Vec{3, 4}) == Vec{3, 4});
  const Vec r = fpi::apply(Operator::rotation(kPi / 2, 0, 1), Vec{1, 0});
  CHECK(fpi::distance(r, Vec{0, 1}) <= 1e-15);
  CHECK(fpi::apply(Operator::average(Operator::neg_identity(), 0.5), Vec{5, -2}) == Vec{0, 0});
  CHECK(fpi::apply(Operator::neg_identity(), Vec{1, -2}) == Vec{-1, 2});
}

TEST_CASE("compose applies first, then second") {
  const auto t = Operator::compose(Operator::projection(ConvexSet::halfspace(Vec{1, 0}, 0)),
                                   Operator::rotation(kPi / 2, 0, 1));
  // P_H(2,0) = (0,0); rotating keeps it at the origin.
  CHECK(fpi::norm(fpi::apply(t, Vec{2, 0})) <= 1e-15);
  const auto s = Operator::compose(Operator::rotation(kPi / 2, 0, 1),
                                   Operator::projection(ConvexSet::halfspace(Vec{1, 0}, 0)));
  // R(2,0) = (0,2), already in H.
  CHECK(fpi::distance(fpi::apply(s, Vec{2, 0}), Vec{0, 2}) <= 1e-15);
}

TEST_CASE("reflection is twice the projection minus the identity") {
  const auto ball = ConvexSet::ball(Vec{0, 0}, 1);
  const Vec x{3, 4};
  const Vec expected = 2.0 * fpi::project(ball, x) - x;
  CHECK(fpi::distance(fpi::apply(Operator::reflection(ball), x), expected) <= 1e-15);
}

TEST_CASE("rotation fixes coordinates outside its plane") {
  const auto t = Operator::rotation(0.7, 1, 3);
  const Vec y = fpi::apply(t, Vec{1, 2, 3, 4, 5});
  CHECK(y[0] == 1.0);
  CHECK(y[2] == 3.0);
  CHECK(y[4] == 5.0);
  CHECK(y[1] == doctest::Approx(2 * std::cos(0.7) - 4 * std::sin(0.7)));
  CHECK(y[3] == doctest::Approx(2 * std::sin(0.7) + 4 * std::cos(0.7)));
}

TEST_CASE("apply dimension mismatch") {
  CHECK(code_of([] { (void)fpi::apply(Operator::rotation(1.0, 0, 2), Vec{1, 0}); }) ==
        fpi::ErrorCode::DimMismatch);
  CHECK(code_of([] { (void)fpi::apply(Operator::projection(ConvexSet::full(3)), Vec{1, 0}); }) ==
        fpi::ErrorCode::DimMismatch);
}

TEST_CASE("residual examples") {
  CHECK(fpi::residual(Operator::identity(), Vec{9, -1, 2}) == 0.0);
  CHECK(fpi::residual(Operator::neg_identity(), Vec{1, 0}) == 2.0);
  CHECK(fpi::residual(Operator::rotation(kPi / 2, 0, 1), Vec{1, 0}) ==
        doctest::Approx(fpi::distance(Vec{0, 1}, Vec{1, 0})).epsilon(1e-15));
}

TEST_CASE("construction invariants") {
  CHECK(code_of([] { (void)Operator::affine(fpi::Matrix::identity(2, 2.0), Vec{0, 0}); }) ==
        fpi::ErrorCode::BadOperator);
  CHECK(code_of([] { (void)Operator::average(Operator::identity(), 1.5); }) == fpi::ErrorCode::BadOperator);
  CHECK(code_of([] { (void)Operator::rotation(1.0, 1, 1); }) == fpi::ErrorCode::BadOperator);
  CHECK(code_of([] { (void)Operator::affine(fpi::Matrix::identity(2), Vec{0, 0, 0}); }) ==
        fpi::ErrorCode::BadOperator);
}

TEST_CASE("operator norm by power iteration") {
  const auto m = fpi::Matrix::from_rows({{3, 0}, {4, 0}});
  CHECK(fpi::operator_norm(m) == doctest::Approx(5.0));
  CHECK(fpi::operator_norm(fpi::Matrix::identity(4, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("nonexpansive certification examples") {
  const auto full = ConvexSet::full(3);
  const auto p = fpi::certify_nonexpansive(Operator::projection(ConvexSet::ball(Vec{1, 0, 0}, 0.5)), full,
                                           2000, 4, 1e-12);
  CHECK(p.certified);
  CHECK(p.worst_ratio <= 1 + 1e-12);
  CHECK_FALSE(p.witness);
  const auto id = fpi::certify_nonexpansive(Operator::identity(), full, 500, 4, 0.0);
  CHECK(id.worst_ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.pairs_tested == 500);
}

TEST_CASE("quasinonexpansive certification examples") {
  const auto full = ConvexSet::full(2);
  const std::vector<Vec> origin{Vec{0, 0}};
  const auto neg = fpi::certify_quasinonexpansive(Operator::neg_identity(), full, origin, 500, 1, 1e-12);
  CHECK(neg.worst_ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(neg.certified);

  const auto ball = ConvexSet::ball(Vec{0.5, 0.5}, 1);
  fpi::Rng rng(6);
  std::vector<Vec> fixed;
  for (int i = 0; i < 5; ++i) fixed.push_back(fpi::sample_member(ball, rng));
  CHECK(fpi::certify_quasinonexpansive(Operator::projection(ball), full, fixed, 1000, 2, 1e-12).certified);

  const std::vector<Vec> any{Vec{4, -3}};
  CHECK(fpi::certify_quasinonexpansive(Operator::identity(), full, any, 200, 2, 0).worst_ratio ==
        doctest::Approx(1.0));

  const std::vector<Vec> not_fixed{Vec{1, 0}};
  CHECK(code_of([&] {
          (void)fpi::certify_quasinonexpansive(Operator::neg_identity(), full, not_fixed, 10, 1, 1e-12);
        }) == fpi::ErrorCode::NotAFixedPoint);
}

TEST_CASE("half-space characterization examples") {
  const auto t = Operator::projection(ConvexSet::ball(Vec{0, 0}, 1));
  const auto domain = ConvexSet::ball(Vec{0, 0}, 2);
  fpi::Rng rng(13);
  std::vector<Vec> probes;
  for (int i = 0; i < 1000; ++i) probes.push_back(fpi::sample_member(domain, rng));
  CHECK(fpi::check_fix_halfspace_characterization(t, domain, Vec{0.5, 0}, probes, 1e-10));

  const std::vector<Vec> self{Vec{0.5, 0}};
  CHECK(fpi::check_fix_halfspace_characterization(t, domain, Vec{0.5, 0}, self, 0.0));

  // Equality case: <y - Tx, x - Tx> = 2 = 0.5 * |Tx - x|^2.
  const auto full = ConvexSet::full(2);
  const std::vector<Vec> e1{Vec{1, 0}};
  const Vec tx = fpi::apply(Operator::neg_identity(), e1[0]);
  CHECK(fpi::inner(Vec{0, 0} - tx, e1[0] - tx) == 0.5 * fpi::norm_squared(tx - e1[0]));
  CHECK(fpi::check_fix_halfspace_characterization(Operator::neg_identity(), full, Vec{0, 0}, e1, 0.0));

  CHECK(code_of([&] {
          (void)fpi::check_fix_halfspace_characterization(Operator::neg_identity(), full, Vec{1, 1}, e1, 1e-10);
        }) == fpi::ErrorCode::NotAFixedPoint);
}

TEST_CASE("known fixed sets") {
  const auto ball = ConvexSet::ball(Vec{0, 0}, 1);
  CHECK(fpi::known_fixed_set(Operator::projection(ball), 2) == ball);
  CHECK(fpi::known_fixed_set(Operator::identity(), 2) == ConvexSet::full(2));
  CHECK(fpi::known_fixed_set(Operator::average(Operator::neg_identity(), 0.5), 2) == ConvexSet::point(Vec{0, 0}));
  CHECK(fpi::known_fixed_set(Operator::rotation(kPi / 2, 0, 1), 2) == ConvexSet::point(Vec{0, 0}));
  CHECK(fpi::known_fixed_set(Operator::rotation(2 * kPi, 0, 1), 2) == ConvexSet::full(2));
  const auto h = ConvexSet::halfspace(Vec{1, 0}, 0);
  CHECK_FALSE(fpi::known_fixed_set(Operator::compose(Operator::projection(ball), Operator::projection(h)), 2));
  CHECK(fpi::known_fixed_set(Operator::compose(Operator::projection(ball), Operator::projection(ball)), 2) == ball);
  CHECK_FALSE(fpi::known_fixed_set(Operator::affine(fpi::Matrix::identity(2, 0.5), Vec{1, 0}), 2));
}

TEST_CASE("rotation in higher dimension fixes the complementary subspace") {
  const auto fix = fpi::known_fixed_set(Operator::rotation(1.0, 0, 2), 4);
  REQUIRE(fix);
  fpi::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec y = fpi::sample_member(*fix, rng);
    CHECK(std::abs(y[0]) <= 1e-12);
    CHECK(std::abs(y[2]) <= 1e-12);
    CHECK(fpi::residual(Operator::rotation(1.0, 0, 2), y) <= 1e-9);
  }
}

TEST_CASE("operator calculus properties") {
  const std::size_t dim = 4;
  const auto full = ConvexSet::full(dim);
  fpi::Rng rng(99);
  for (const auto& t : zoo(dim)) {
    CAPTURE(fpi::to_string(t.kind()));
    const auto cert = fpi::certify_nonexpansive(t, full, 1000, 31, 1e-10);
    CHECK(cert.certified);

    for (double lambda : {0.0, 0.25, 0.5, 1.0}) {
      const auto avg = fpi::certify_nonexpansive(Operator::average(t, lambda), full, 1000, 31, 1e-10);
      CHECK(avg.certified);
    }

    if (const auto fix = fpi::known_fixed_set(t, dim)) {
      std::vector<Vec> fixed;
      for (int i = 0; i < 5; ++i) {
        fixed.push_back(fpi::sample_member(*fix, rng));
        CHECK(fpi::residual(t, fixed.back()) <= 1e-9);
      }
      if (cert.certified) CHECK(fpi::certify_quasinonexpansive(t, full, fixed, 1000, 31, 1e-10).certified);
    }
  }
}

TEST_CASE("composition ratio is bounded by the product of ratios") {
  const auto ops = zoo(3);
  const auto full = ConvexSet::full(3);
  for (std::size_t i = 0; i < ops.size(); i += 3) {
    for (std::size_t j = 1; j < ops.size(); j += 4) {
      const double a = fpi::certify_nonexpansive(ops[i], full, 500, 12, 1e-10).worst_ratio;
      const double b = fpi::certify_nonexpansive(ops[j], full, 500, 12, 1e-10).worst_ratio;
      const double c = fpi::certify_nonexpansive(Operator::compose(ops[i], ops[j]), full, 500, 12, 1e-10).worst_ratio;
      CHECK(c <= std::max(1.0, a) * std::max(1.0, b) + 1e-10);
    }
  }
}

TEST_CASE("self-map certification") {
  const auto ball = ConvexSet::ball(Vec{0, 0}, 1);
  const auto in = fpi::certify_self_map(Operator::projection(ball), ConvexSet::full(2), 200, 1, 1e-9);
  CHECK(in.violations == 0);
  const auto out = fpi::certify_self_map(Operator::affine(fpi::Matrix::identity(2), Vec{3, 0}), ball, 200, 1, 1e-9);
  CHECK(out.violations == 200);
  CHECK(out.worst_distance > 1.0);
}
