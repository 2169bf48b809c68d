#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fpi/error.hpp"
#include "fpi/iterate.hpp"

using fpi::Condition;
using fpi::ConvexSet;
using fpi::Operator;
using fpi::Schedule;
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

fpi::KMConfig km(Operator t, Vec x0, Schedule s, std::size_t max_iter, double stop = 0.0) {
  const std::size_t dim = x0.dim();
  return fpi::KMConfig{std::move(t), ConvexSet::full(dim), std::move(x0), std::move(s), max_iter, stop};
}

}  // namespace

TEST_CASE("schedule values") {
  CHECK(Schedule::constant(0.3).alpha(1000) == 0.3);
  CHECK(Schedule::one_over_n_plus_k(2).alpha(0) == 0.5);
  CHECK(Schedule::one_over_n_plus_k(2).alpha(8) == 0.1);
  const auto c = Schedule::custom({0.2, 0.4});
  CHECK(c.alpha(1) == 0.4);
  CHECK(code_of([&] { (void)c.alpha(2); }) == fpi::ErrorCode::BadSchedule);
  CHECK(code_of([] { (void)Schedule::custom({}); }) == fpi::ErrorCode::EmptySchedule);
}

TEST_CASE("schedule verdict examples") {
  const auto half = fpi::validate_schedule(Schedule::constant(0.5), 100);
  CHECK(half.km_cond1 == Condition::Proven);
  CHECK(half.km_cond2 == Condition::Proven);
  CHECK(half.h_cond2 == Condition::Violated);
  CHECK(half.km_admissible());
  CHECK_FALSE(half.halpern_admissible());

  const auto harmonic = fpi::validate_schedule(Schedule::one_over_n_plus_k(2), 100);
  for (Condition c : {harmonic.km_cond1, harmonic.km_cond2, harmonic.h_cond1, harmonic.h_cond2, harmonic.h_cond3,
                      harmonic.h_cond4}) {
    CHECK(c == Condition::Proven);
  }
  // Independent check of the two sums behind the verdict.
  double sum = 0.0;
  double variation = 0.0;
  for (int n = 0; n < 100000; ++n) {
    sum += 1.0 / (n + 2);
    variation += std::abs(1.0 / (n + 3) - 1.0 / (n + 2));
  }
  CHECK(sum > 10.0);
  CHECK(variation < 0.5);

  const auto bad = fpi::validate_schedule(Schedule::custom({0.5, 1.5, 0.5, 0.5}), 4);
  CHECK(bad.km_cond1 == Condition::Violated);
  REQUIRE(bad.km_range_witness);
  CHECK(*bad.km_range_witness == 1);
}

TEST_CASE("schedule verdict edge cases") {
  const auto zero = fpi::validate_schedule(Schedule::constant(0.0), 10);
  CHECK(zero.km_cond1 == Condition::Proven);
  CHECK(zero.km_cond2 == Condition::Violated);
  const auto one = fpi::validate_schedule(Schedule::constant(1.0), 10);
  CHECK(one.km_cond2 == Condition::Violated);
  CHECK(one.h_cond1 == Condition::Violated);
  const auto k1 = fpi::validate_schedule(Schedule::one_over_n_plus_k(1), 10);
  CHECK(k1.h_cond1 == Condition::Violated);
  CHECK(k1.km_cond1 == Condition::Proven);
}

TEST_CASE("custom schedules are at best consistent at a finite horizon") {
  std::vector<double> harmonic;
  for (int n = 0; n < 5000; ++n) harmonic.push_back(1.0 / (n + 2));
  const auto v = fpi::validate_schedule(Schedule::custom(harmonic), harmonic.size());
  CHECK(v.h_cond1 == Condition::Proven);
  CHECK(v.h_cond3 == Condition::FiniteHorizonConsistent);
  CHECK(v.h_cond2 != Condition::Proven);
  CHECK(v.h_cond4 != Condition::Proven);
  CHECK(v.halpern_admissible());

  const std::vector<double> tiny(50, 1e-4);
  CHECK(fpi::validate_schedule(Schedule::custom(tiny), tiny.size()).km_cond2 == Condition::Violated);
}

TEST_CASE("Picard examples") {
  SUBCASE("identity is fixed immediately") {
    const auto tr = fpi::run_picard(Operator::identity(), Vec{1, 2}, 100, 1e-12);
    CHECK(tr.stop_reason == fpi::StopReason::ResidualBelow);
    CHECK(tr.iterates.size() == 1);
    CHECK(tr.steps() == 0);
  }
  SUBCASE("negative identity oscillates") {
    const auto tr = fpi::run_picard(Operator::neg_identity(), Vec{1, 0}, 10, 1e-12);
    CHECK(tr.stop_reason == fpi::StopReason::MaxIter);
    REQUIRE(tr.iterates.size() == 11);
    for (std::size_t n = 0; n < tr.iterates.size(); ++n) {
      CHECK(tr.iterates[n] == (n % 2 ? Vec{-1, 0} : Vec{1, 0}));
      CHECK(tr.residuals[n] == 2.0);
    }
  }
  SUBCASE("contraction halves the iterate") {
    const auto t = Operator::affine(fpi::Matrix::identity(2, 0.5), Vec{0, 0});
    const auto tr = fpi::run_picard(t, Vec{8, 0}, 20, 0.0);
    for (std::size_t n = 0; n < tr.iterates.size(); ++n) CHECK(tr.iterates[n] == Vec{8.0 / std::pow(2.0, n), 0});
  }
}

TEST_CASE("KM examples") {
  SUBCASE("one-step annihilation") {
    const auto tr = fpi::run_km(km(Operator::neg_identity(), Vec{5, -2}, Schedule::constant(0.5), 100, 1e-12));
    REQUIRE(tr.iterates.size() == 2);
    CHECK(tr.iterates[1] == Vec{0, 0});
    CHECK(tr.stop_reason == fpi::StopReason::ResidualBelow);
  }
  SUBCASE("rotation contracts by cos(pi/4)") {
    const auto tr = fpi::run_km(km(Operator::rotation(kPi / 2, 0, 1), Vec{1, 0}, Schedule::constant(0.5), 60));
    // (I + R)/2 as an explicit matrix power.
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    for (std::size_t n = 0; n < tr.iterates.size(); ++n) {
      CHECK(fpi::norm(tr.iterates[n]) == doctest::Approx(std::pow(std::sqrt(0.5), n)).epsilon(1e-12));
      CHECK(std::abs(tr.iterates[n][0] - m00) <= 1e-14);
      CHECK(std::abs(tr.iterates[n][1] - m10) <= 1e-14);
      const double a = 0.5 * (m00 - m10), b = 0.5 * (m01 - m11), c = 0.5 * (m10 + m00), d = 0.5 * (m11 + m01);
      m00 = a, m01 = b, m10 = c, m11 = d;
    }
  }
  SUBCASE("identity gives a constant trace") {
    const auto tr = fpi::run_km(km(Operator::identity(), Vec{3, 1}, Schedule::one_over_n_plus_k(2), 10));
    for (const auto& x : tr.iterates) CHECK(x == Vec{3, 1});
  }
}

TEST_CASE("KM error paths") {
  auto cfg = km(Operator::identity(), Vec{3, 0}, Schedule::constant(0.5), 10);
  cfg.domain = ConvexSet::ball(Vec{0, 0}, 1);
  CHECK(code_of([&] { (void)fpi::run_km(cfg); }) == fpi::ErrorCode::InitOutsideDomain);
  auto bad = km(Operator::identity(), Vec{0, 0}, Schedule::custom({0.5, 1.5}), 2);
  CHECK(code_of([&] { (void)fpi::run_km(bad); }) == fpi::ErrorCode::BadSchedule);
  auto shorter = km(Operator::identity(), Vec{1, 0}, Schedule::custom({0.5, 0.5}), 5);
  CHECK(code_of([&] { (void)fpi::run_km(shorter); }) == fpi::ErrorCode::BadSchedule);
}

TEST_CASE("Halpern examples") {
  const auto full = ConvexSet::full(2);
  SUBCASE("identity from the anchor stays put") {
    const auto tr = fpi::run_halpern({Operator::identity(), full, Vec{2, 3}, Vec{2, 3}, Schedule::one_over_n_plus_k(2), 50, 0.0});
    for (const auto& x : tr.iterates) CHECK(x == Vec{2, 3});
  }
  SUBCASE("first step onto the ball") {
    const auto t = Operator::projection(ConvexSet::ball(Vec{0, 0}, 1));
    const auto tr = fpi::run_halpern({t, full, Vec{2, 0}, Vec{2, 0}, Schedule::one_over_n_plus_k(2), 5, 0.0});
    CHECK(tr.iterates[1] == Vec{0.5 * 2 + 0.5 * 1, 0});
    REQUIRE(tr.anchor);
    CHECK(*tr.anchor == Vec{2, 0});
  }
  SUBCASE("unit weights pin the trace to the anchor") {
    const auto tr = fpi::run_halpern({Operator::neg_identity(), full, Vec{5, 5}, Vec{1, -1},
                                      Schedule::custom(std::vector<double>(20, 1.0)), 20, -1.0});
    for (std::size_t n = 1; n < tr.iterates.size(); ++n) CHECK(tr.iterates[n] == Vec{1, -1});
  }
  SUBCASE("anchor outside the domain") {
    const auto ball = ConvexSet::ball(Vec{0, 0}, 1);
    CHECK(code_of([&] {
            (void)fpi::run_halpern({Operator::identity(), ball, Vec{0, 0}, Vec{2, 0}, Schedule::one_over_n_plus_k(2), 5, 0.0});
          }) == fpi::ErrorCode::AnchorOutsideDomain);
    CHECK(code_of([&] {
            (void)fpi::run_halpern({Operator::identity(), ball, Vec{2, 0}, Vec{0, 0}, Schedule::one_over_n_plus_k(2), 5, 0.0});
          }) == fpi::ErrorCode::InitOutsideDomain);
  }
}

TEST_CASE("Halpern step rule") {
  const auto t = Operator::rotation(kPi / 3, 0, 1);
  const auto tr = fpi::run_halpern({t, ConvexSet::full(2), Vec{1, 0}, Vec{1, 0}, Schedule::one_over_n_plus_k(2), 10000, 1e-3});
  CHECK(tr.stop_reason == fpi::StopReason::StepBelow);
  const std::size_t n = tr.iterates.size() - 1;
  CHECK(fpi::distance(tr.iterates[n], tr.iterates[n - 1]) <= 1e-3);
}

TEST_CASE("trace invariants: update exactness, interpolation identity, residual monotonicity") {
  fpi::Rng rng(42);
  const std::size_t dim = 5;
  const auto ball = ConvexSet::ball(Vec(dim), 2.0);
  const std::vector<Operator> ops{
      Operator::projection(ConvexSet::halfspace(Vec::basis(dim, 0), -0.3)),
      Operator::rotation(0.9, 1, 3),
      Operator::compose(Operator::projection(ball), Operator::reflection(ConvexSet::hyperplane(Vec::basis(dim, 2), 0.5))),
  };
  for (const auto& t : ops) {
    for (const auto& s : {Schedule::constant(0.3), Schedule::one_over_n_plus_k(2), Schedule::constant(1.0)}) {
      const Vec x0 = 3.0 * fpi::random_gaussian(dim, rng);
      const auto tr = fpi::run_km(km(t, x0, s, 300));
      REQUIRE(tr.iterates.size() == tr.residuals.size());
      REQUIRE(tr.iterates.size() == tr.alphas_used.size() + 1);
      for (std::size_t n = 0; n + 1 < tr.iterates.size(); ++n) {
        const Vec tx = fpi::apply(t, tr.iterates[n]);
        CHECK(tr.iterates[n + 1] == fpi::km_step(tr.iterates[n], tx, tr.alphas_used[n]));
        CHECK(std::abs(fpi::distance(tr.iterates[n + 1], tr.iterates[n]) - tr.alphas_used[n] * tr.residuals[n]) <= 1e-12);
        CHECK(tr.residuals[n + 1] <= tr.residuals[n] + 1e-10);
        CHECK(std::abs(tr.residuals[n] - fpi::residual(t, tr.iterates[n])) <= 1e-12);
      }
      const Vec u = 2.0 * fpi::random_gaussian(dim, rng);
      const auto h = fpi::run_halpern({t, ConvexSet::full(dim), x0, u, Schedule::one_over_n_plus_k(2), 300, 0.0});
      for (std::size_t n = 0; n + 1 < h.iterates.size(); ++n) {
        CHECK(h.iterates[n + 1] == fpi::halpern_step(u, fpi::apply(t, h.iterates[n]), h.alphas_used[n]));
      }
    }
  }
}

TEST_CASE("iterates stay in a self-mapped domain") {
  const auto box = ConvexSet::box(Vec{-1, -1, -1}, Vec{1, 1, 1});
  const auto t = Operator::compose(Operator::rotation(0.5, 0, 1), Operator::projection(box));
  REQUIRE(fpi::certify_self_map(t, box, 500, 3, 1e-9).violations == 0);
  const auto tr = fpi::run_km({t, box, Vec{0.9, -0.9, 0.2}, Schedule::constant(0.4), 500, 0.0});
  for (const auto& x : tr.iterates) CHECK(fpi::contains(box, x, 1e-7));
  const auto h = fpi::run_halpern({t, box, Vec{0.9, -0.9, 0.2}, Vec{1, 1, 1}, Schedule::one_over_n_plus_k(2), 500, 0.0});
  for (const auto& x : h.iterates) CHECK(fpi::contains(box, x, 1e-7));
}

TEST_CASE("a diverging operator is reported as non-finite") {
  // A huge translation overflows after a couple of steps.
  const auto t = Operator::affine(fpi::Matrix::identity(1), Vec{1e308});
  CHECK(code_of([&] { (void)fpi::run_picard(t, Vec{0}, 10, 0.0); }) == fpi::ErrorCode::NonFinite);
}
