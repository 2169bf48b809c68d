#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fpi/error.hpp"
#include "fpi/sets.hpp"

using fpi::ConvexSet;
using fpi::Vec;

namespace {

fpi::ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const fpi::Error& e) {
    return e.code();
  }
  FAIL("expected fpi::Error");
  return fpi::ErrorCode::ParseError;
}

std::vector<ConvexSet> sample_sets(std::size_t dim, fpi::Rng& rng) {
  const Vec c = fpi::random_gaussian(dim, rng);
  Vec lo = fpi::random_gaussian(dim, rng);
  Vec hi = lo + Vec(std::vector<double>(dim, 1.5));
  std::vector<ConvexSet> sets{
      ConvexSet::ball(c, 1.3),
      ConvexSet::box(lo, hi),
      ConvexSet::halfspace(fpi::random_gaussian(dim, rng), 0.4),
      ConvexSet::hyperplane(fpi::random_gaussian(dim, rng), -0.7),
      ConvexSet::full(dim),
  };
  const auto comp = fpi::orthonormal_complement(fpi::random_unit(dim, rng));
  std::vector<Vec> dirs(comp.begin(), comp.begin() + std::min<std::size_t>(comp.size(), 2));
  sets.push_back(ConvexSet::affine(c, dirs));
  return sets;
}

}  // namespace

TEST_CASE("membership examples") {
  CHECK(fpi::contains(ConvexSet::ball(Vec{0, 0}, 1), Vec{0, 0}, 0));
  CHECK(fpi::contains(ConvexSet::halfspace(Vec{1, 0}, 0), Vec{-1, 5}, 0));
  CHECK_FALSE(fpi::contains(ConvexSet::box(Vec{0, 0}, Vec{1, 1}), Vec{2, 0}, 0));
  CHECK(fpi::contains(ConvexSet::hyperplane(Vec{0, 2}, 2), Vec{7, 1}, 0));
  CHECK(fpi::contains(ConvexSet::full(3), Vec{1e6, -1e6, 0}, 0));
  CHECK(code_of([] { (void)fpi::contains(ConvexSet::ball(Vec{0, 0}, 1), Vec{0, 0, 0}, 0); }) ==
        fpi::ErrorCode::DimMismatch);
}

TEST_CASE("projection examples") {
  CHECK(fpi::project(ConvexSet::ball(Vec{0, 0}, 1), Vec{2, 0}) == Vec{1, 0});
  CHECK(fpi::project(ConvexSet::halfspace(Vec{0, 1}, 0), Vec{3, 2}) == Vec{3, 0});

  // Box projection checked against a coordinatewise clamp and the oracle.
  const auto box = ConvexSet::box(Vec{0, 0}, Vec{1, 1});
  const Vec u{2, -1};
  const Vec clamp{std::clamp(u[0], 0.0, 1.0), std::clamp(u[1], 0.0, 1.0)};
  CHECK(fpi::project(box, u) == clamp);
  CHECK(fpi::distance(fpi::oracle_project(box, u, 100000, 1), clamp) <= 1e-2);
}

TEST_CASE("projection of an interior point is the point itself") {
  const auto ball = ConvexSet::ball(Vec{1, 1, 1}, 2);
  const Vec u{1.5, 0.5, 1};
  CHECK(fpi::project(ball, u) == u);
}

TEST_CASE("projection dimension mismatch") {
  CHECK(code_of([] { (void)fpi::project(ConvexSet::full(2), Vec{1, 2, 3}); }) == fpi::ErrorCode::DimMismatch);
}

TEST_CASE("malformed descriptors are rejected") {
  CHECK(code_of([] { (void)ConvexSet::ball(Vec{0, 0}, 0); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::ball(Vec{0, 0}, -1); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::box(Vec{0, 2}, Vec{1, 1}); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::box(Vec{0, 0}, Vec{1, 1, 1}); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::halfspace(Vec{0, 0}, 1); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::hyperplane(Vec{0, 0}, 1); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::affine(Vec{0, 0}, {Vec{1, 0}, Vec{1, 1}}); }) == fpi::ErrorCode::BadSet);
  CHECK(code_of([] { (void)ConvexSet::affine(Vec{0, 0}, {Vec{2, 0}}); }) == fpi::ErrorCode::BadSet);
}

TEST_CASE("variational inequality examples") {
  const auto ball = ConvexSet::ball(Vec{0, 0}, 1);
  std::vector<Vec> circle;
  for (int k = 0; k < 2000; ++k) {
    const double t = 2 * std::numbers::pi * k / 2000;
    circle.push_back(Vec{std::cos(t), std::sin(t)});
  }
  SUBCASE("correct projection") {
    const auto r = fpi::check_projection_vi(ball, Vec{2, 0}, Vec{1, 0}, circle, 1e-12);
    CHECK(r.vi_violation <= 1e-12);
    CHECK(r.valid);
  }
  SUBCASE("interior anchor") {
    const auto r = fpi::check_projection_vi(ball, Vec{0.2, 0.1}, Vec{0.2, 0.1}, circle, 1e-12);
    CHECK(r.vi_violation == 0.0);
  }
  SUBCASE("wrong projection") {
    const auto r = fpi::check_projection_vi(ball, Vec{2, 0}, Vec{0.5, 0}, circle, 1e-12);
    const double expected = fpi::inner(Vec{1.5, 0}, Vec{0.5, 0});
    CHECK(r.vi_violation >= expected - 1e-12);
    CHECK_FALSE(r.valid);
  }
  SUBCASE("sample outside the set") {
    const std::vector<Vec> outside{Vec{3, 0}};
    CHECK(code_of([&] { (void)fpi::check_projection_vi(ball, Vec{2, 0}, Vec{1, 0}, outside, 1e-12); }) ==
          fpi::ErrorCode::SampleOutsideSet);
  }
}

TEST_CASE("oracle projection examples") {
  CHECK(fpi::distance(fpi::oracle_project(ConvexSet::ball(Vec{0, 0}, 1), Vec{2, 0}, 100000, 3), Vec{1, 0}) <=
        1e-2);
  const Vec inside{0.1, -0.3};
  CHECK(fpi::distance(fpi::oracle_project(ConvexSet::ball(Vec{0, 0}, 1), inside, 1000, 3), inside) <= 1e-6);
  const auto plane = ConvexSet::hyperplane(Vec{1, 0}, 0);
  CHECK(fpi::distance(fpi::oracle_project(plane, Vec{3, 4}, 100000, 3), Vec{0, 4}) <= 1e-2);
}

TEST_CASE("oracle projection is deterministic for a seed") {
  const auto h = ConvexSet::halfspace(Vec{1, 1, 0}, 0.5);
  CHECK(fpi::oracle_project(h, Vec{2, 3, 1}, 5000, 9) == fpi::oracle_project(h, Vec{2, 3, 1}, 5000, 9));
}

TEST_CASE("projection properties across set kinds") {
  fpi::Rng rng(21);
  for (std::size_t dim : {2u, 3u, 7u}) {
    for (const auto& c : sample_sets(dim, rng)) {
      CAPTURE(fpi::to_string(c.kind()));
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const Vec u = 4.0 * fpi::random_gaussian(dim, rng);
        const Vec v = u + std::pow(10.0, -6.0 * (i % 2)) * fpi::random_gaussian(dim, rng);
        const Vec pu = fpi::project(c, u);
        const Vec pv = fpi::project(c, v);
        const double d = fpi::distance(u, v);
        if (d > 1e-12) worst = std::max(worst, fpi::distance(pu, pv) / d);
        CHECK(fpi::distance(fpi::project(c, pu), pu) <= 1e-12);
        CHECK(fpi::contains(c, pu, 1e-9));
      }
      CHECK(worst <= 1 + 1e-12);
    }
  }
}

TEST_CASE("projections satisfy the variational inequality over sampled members") {
  fpi::Rng rng(5);
  for (std::size_t dim : {2u, 4u}) {
    for (const auto& c : sample_sets(dim, rng)) {
      CAPTURE(fpi::to_string(c.kind()));
      std::vector<Vec> members;
      for (int i = 0; i < 1000; ++i) members.push_back(fpi::sample_member(c, rng));
      for (int t = 0; t < 5; ++t) {
        const Vec u = 5.0 * fpi::random_gaussian(dim, rng);
        const auto r = fpi::check_projection_vi(c, u, fpi::project(c, u), members, 1e-10);
        CHECK(r.vi_violation <= 1e-10);
      }
    }
  }
}

TEST_CASE("analytic projection agrees with the oracle in low dimension") {
  fpi::Rng rng(8);
  for (std::size_t dim : {2u, 3u, 5u}) {
    for (const auto& c : sample_sets(dim, rng)) {
      CAPTURE(fpi::to_string(c.kind()));
      CAPTURE(dim);
      const Vec u = 3.0 * fpi::random_gaussian(dim, rng);
      CHECK(fpi::distance(fpi::project(c, u), fpi::oracle_project(c, u, 100000, 17)) <= 1e-2);
    }
  }
}

TEST_CASE("sampled members lie in the set") {
  fpi::Rng rng(2);
  for (const auto& c : sample_sets(6, rng)) {
    for (int i = 0; i < 200; ++i) {
      CHECK(fpi::contains(c, fpi::sample_member(c, rng), 1e-9));
      const auto [a, b] = fpi::sample_member_pair(c, rng);
      CHECK(fpi::contains(c, a, 1e-9));
      CHECK(fpi::contains(c, b, 1e-9));
    }
  }
}

TEST_CASE("orthonormal complement") {
  const auto comp = fpi::orthonormal_complement(Vec{1, 2, 2});
  REQUIRE(comp.size() == 2);
  for (const auto& d : comp) {
    CHECK(std::abs(fpi::inner(d, Vec{1, 2, 2})) <= 1e-12);
    CHECK(fpi::norm(d) == doctest::Approx(1.0));
  }
  CHECK(std::abs(fpi::inner(comp[0], comp[1])) <= 1e-12);
}
