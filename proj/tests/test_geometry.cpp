#include <cmath>

#include "doctest.h"
#include "lorentz/error.hpp"
#include "lorentz/geometry.hpp"
#include "support.hpp"

using namespace lorentz;
using support::kPi;

TEST_CASE("build_config") {
  auto one = build_config({{{0.5, 0.5}, 0.4}}, 2);
  CHECK(one.boundary_length == doctest::Approx(2 * kPi * 0.4).epsilon(1e-15));
  auto two = build_config({{{0.25, 0.25}, 0.2}, {{0.75, 0.75}, 0.2}}, 2);
  CHECK(two.boundary_length == doctest::Approx(0.8 * kPi).epsilon(1e-15));
  CHECK_THROWS_AS(build_config({{{0.0, 0.0}, 0.6}}, 2), OverlapError);
  CHECK_THROWS_AS(build_config({{{0.0, 0.0}, 0.5}}, 2), OverlapError);  // closures touch
  CHECK_THROWS_AS(build_config({{{0.1, 0.1}, 0.2}, {{0.3, 0.1}, 0.05}}, 2), OverlapError);
  CHECK_THROWS_AS(build_config({}, 2), EmptyConfigError);
  CHECK_THROWS_AS(build_config({{{1.0, 0.0}, 0.2}}, 2), DomainError);
  CHECK_THROWS_AS(build_config({{{0.0, 0.0}, -0.2}}, 2), DomainError);
  CHECK_THROWS_AS(build_config({{{0.0, 0.0}, 0.2}}, 3), DomainError);
}

TEST_CASE("reflect") {
  auto r = reflect({1, 0}, {-1, 0});
  CHECK(r.x == -1.0);
  CHECK(r.y == 0.0);
  r = reflect({1, 0}, {0, 1});
  CHECK(r.x == 1.0);
  CHECK(r.y == 0.0);
  const double h = std::sqrt(0.5);
  r = reflect({h, -h}, {0, 1});
  CHECK(r.x == doctest::Approx(h).epsilon(1e-15));
  CHECK(r.y == doctest::Approx(h).epsilon(1e-15));
  CHECK_THROWS_AS(reflect({1.1, 0}, {0, 1}), NonUnitInputError);
  CHECK_THROWS_AS(reflect({1, 0}, {0, 0.5}), NonUnitInputError);

  CounterRng rng(3, 0);
  for (int i = 0; i < 10000; ++i) {
    double a = 2 * kPi * rng.uniform(), b = 2 * kPi * rng.uniform();
    Vec2 v{std::cos(a), std::sin(a)}, n{std::cos(b), std::sin(b)};
    Vec2 out = reflect(v, n);
    REQUIRE(std::abs(norm(out) - 1.0) <= 1e-12);
    REQUIRE(std::abs(dot(out, n) + dot(v, n)) <= 1e-12);
  }
}

TEST_CASE("next_collision on the axis") {
  auto cfg = support::square(0.4);
  Hit h = next_collision(cfg, {0.4, 0.0}, {1, 0});
  CHECK(h.cell == Cell{1, 0});
  CHECK(h.obstacle == 0);
  CHECK(h.flight_length == doctest::Approx(0.2).epsilon(1e-14));
  h = next_collision(cfg, {-0.4, 0.0}, {-1, 0});
  CHECK(h.cell == Cell{-1, 0});
  CHECK(h.flight_length == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("next_collision agrees with a brute-force scan") {
  auto cfg = support::square(0.4);
  Vec2 start{0.0, 0.4};
  Vec2 v{std::cos(0.01), std::sin(0.01)};
  Hit h = next_collision(cfg, start, v);
  auto b = support::brute_force_hit(cfg, start, v, 120);
  CHECK(h.cell == b.cell);
  CHECK(h.obstacle == b.obstacle);
  CHECK(h.flight_length == doctest::Approx(b.t).epsilon(1e-12));

  std::vector<ScattererConfig> cfgs = {
      support::square(0.4), support::square(0.25),
      build_config({{{0.25, 0.25}, 0.2}, {{0.75, 0.75}, 0.2}}, 2),
      build_config({{{0.0, 0.0}, 0.3}, {{0.45, 0.6}, 0.12}}, 2)};
  CounterRng rng(11, 0);
  int compared = 0;
  for (const auto& c : cfgs) {
    for (int i = 0; i < 1500; ++i) {
      PhasePoint p = sample_phase_point(c, rng);
      Vec2 s = boundary_point(c, p) + c.disks[std::size_t(p.obstacle)].center;
      Vec2 dir = outgoing_velocity(p);
      auto bh = support::brute_force_hit(c, s, dir, 40);
      if (!(bh.t < 30.0)) continue;  // longer flights leave the scanned box
      Hit hh = next_collision(c, s, dir);
      REQUIRE(hh.cell == bh.cell);
      REQUIRE(hh.obstacle == bh.obstacle);
      REQUIRE(std::abs(hh.flight_length - bh.t) <= 1e-10 * std::max(1.0, bh.t));
      ++compared;
    }
  }
  CHECK(compared > 5000);
}

TEST_CASE("long flights and tangencies") {
  auto cfg = support::square(0.4);
  PhasePoint p{0, kPi / 2, -(kPi / 2 - 1e-4)};  // north pole, nearly horizontal
  CHECK_THROWS_AS(collision_step(cfg, p, 10), HorizonOverflowError);
  CHECK_NOTHROW(collision_step(cfg, p));
  CHECK_THROWS_AS(next_collision(cfg, {0.0, 0.4}, {1, 0}), TangentRayError);
}

TEST_CASE("period-two orbit") {
  auto cfg = support::square(0.4);
  PhasePoint east{0, 0.0, 0.0};
  FlightEvent e = collision_step(cfg, east);
  CHECK(e.kappa == Cell{1, 0});
  CHECK(e.flight_length == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(e.next.obstacle == 0);
  CHECK(e.next.boundary_angle == kPi);
  CHECK(e.next.reflection_angle == 0.0);

  TrajectoryState st;
  st.current = east;
  FlightEvent a = billiard_step(cfg, st);
  FlightEvent b = billiard_step(cfg, st);
  CHECK(a.kappa == Cell{1, 0});
  CHECK(b.kappa == Cell{-1, 0});
  CHECK(st.current == east);
  CHECK(st.kappa_sum == Cell{0, 0});
  CHECK(st.steps == 2);
}

TEST_CASE("billiard_step is deterministic and accumulates kappa") {
  auto cfg = build_config({{{0.0, 0.0}, 0.3}, {{0.45, 0.6}, 0.12}}, 2);
  CounterRng r1(42, 0), r2(42, 0);
  TrajectoryState s1, s2;
  s1.current = sample_phase_point(cfg, r1);
  s2.current = sample_phase_point(cfg, r2);
  Cell sum;
  for (int i = 0; i < 2000; ++i) {
    FlightEvent e1 = billiard_step(cfg, s1);
    FlightEvent e2 = billiard_step(cfg, s2);
    REQUIRE(e1.kappa == e2.kappa);
    REQUIRE(e1.next == e2.next);
    REQUIRE(e1.flight_length > 0.0);
    REQUIRE(e1.next.boundary_angle >= 0.0);
    REQUIRE(e1.next.boundary_angle < 2 * kPi);
    REQUIRE(std::abs(e1.next.reflection_angle) < kPi / 2);
    sum = sum + e1.kappa;
  }
  CHECK(s1.kappa_sum == sum);
}

TEST_CASE("dimension one keeps only the first coordinate") {
  auto cfg = support::square(0.4, 1);
  CounterRng rng(5, 0);
  TrajectoryState st;
  st.current = sample_phase_point(cfg, rng);
  for (int i = 0; i < 500; ++i) REQUIRE(billiard_step(cfg, st).kappa.y == 0);
}

TEST_CASE("sample_phase_point moments") {
  auto cfg = build_config({{{0.0, 0.0}, 0.3}, {{0.45, 0.6}, 0.12}}, 2);
  CounterRng rng(9, 0);
  const int n = 1000000;
  double sphi = 0, ssin = 0;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    PhasePoint p = sample_phase_point(cfg, rng);
    sphi += p.reflection_angle;
    ssin += std::sin(p.reflection_angle);
    first += p.obstacle == 0;
  }
  const double sd_phi = std::sqrt(kPi * kPi / 4 - 2);
  CHECK(std::abs(sphi / n) < 3 * sd_phi / std::sqrt(double(n)));
  CHECK(std::abs(ssin / n) < 3 * std::sqrt(1.0 / 3.0) / std::sqrt(double(n)));
  const double p0 = 0.3 / 0.42;
  CHECK(std::abs(double(first) / n - p0) < 3 * std::sqrt(p0 * (1 - p0) / n));
}

TEST_CASE("time_reverse") {
  PhasePoint p{2, 1.25, 0.3};
  PhasePoint q = time_reverse(p);
  CHECK(q.obstacle == 2);
  CHECK(q.boundary_angle == 1.25);
  CHECK(q.reflection_angle == -0.3);
  CHECK(time_reverse(q) == p);
  PhasePoint z{0, 0.5, 0.0};
  CHECK(time_reverse(z) == z);
}

TEST_CASE("velocity reconstruction is unit") {
  CounterRng rng(2, 0);
  auto cfg = support::square(0.3);
  for (int i = 0; i < 10000; ++i) {
    PhasePoint p = sample_phase_point(cfg, rng);
    REQUIRE(std::abs(norm(outgoing_velocity(p)) - 1.0) <= 1e-12);
  }
}
