#include "lorentz/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

#include "lorentz/error.hpp"

namespace lorentz {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCandidatePad = 1e-9;

double distance_to_unit_square(Vec2 p) {
  double dx = std::max({0.0 - p.x, 0.0, p.x - 1.0});
  double dy = std::max({0.0 - p.y, 0.0, p.y - 1.0});
  return std::hypot(dx, dy);
}

double wrap_angle(double a) {
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

}  // namespace

ScattererConfig build_config(const std::vector<Disk>& disks, int dimension) {
  if (disks.empty()) throw EmptyConfigError("configuration has no disks");
  if (dimension != 1 && dimension != 2)
    throw DomainError("dimension must be 1 or 2, got " + std::to_string(dimension));
  for (std::size_t i = 0; i < disks.size(); ++i) {
    const Disk& d = disks[i];
    if (!(d.radius > 0.0) || !std::isfinite(d.radius))
      throw DomainError("disk " + std::to_string(i) + ": radius must be positive");
    if (!(d.center.x >= 0.0 && d.center.x < 1.0 && d.center.y >= 0.0 && d.center.y < 1.0))
      throw DomainError("disk " + std::to_string(i) + ": center must lie in [0,1)^2");
  }
  for (std::size_t i = 0; i < disks.size(); ++i) {
    for (std::size_t j = i; j < disks.size(); ++j) {
      for (int ox = -2; ox <= 2; ++ox) {
        for (int oy = -2; oy <= 2; ++oy) {
          if (i == j && ox == 0 && oy == 0) continue;
          Vec2 other = disks[j].center + Vec2{double(ox), double(oy)};
          double gap = norm(disks[i].center - other) - disks[i].radius - disks[j].radius;
          if (gap <= 0.0) {
            std::ostringstream os;
            os << "disk " << i << " meets translate (" << ox << "," << oy << ") of disk " << j
               << " (gap " << gap << ")";
            throw OverlapError(os.str());
          }
        }
      }
    }
  }

  ScattererConfig cfg;
  cfg.dimension = dimension;
  cfg.disks = disks;
  for (std::size_t j = 0; j < disks.size(); ++j) {
    cfg.boundary_length += 2.0 * kPi * disks[j].radius;
    cfg.radius_sum += disks[j].radius;
    for (int ox = -1; ox <= 1; ++ox) {
      for (int oy = -1; oy <= 1; ++oy) {
        Vec2 c = disks[j].center + Vec2{double(ox), double(oy)};
        if (distance_to_unit_square(c) < disks[j].radius + kCandidatePad)
          cfg.candidates.push_back({int(j), {ox, oy}, c, disks[j].radius});
      }
    }
  }
  return cfg;
}

Vec2 reflect(Vec2 v, Vec2 n) {
  if (std::abs(norm(v) - 1.0) > 1e-12 || std::abs(norm(n) - 1.0) > 1e-12)
    throw NonUnitInputError("reflect expects unit vectors");
  double vn = dot(v, n);
  return v - n * (2.0 * vn);
}

void exact_sincos(double angle, double& s, double& c) {
  double q = std::nearbyint(angle / (kPi / 2.0));
  double r = angle - q * (kPi / 2.0);
  double sr = std::sin(r), cr = std::cos(r);
  long k = static_cast<long>(q) % 4;
  if (k < 0) k += 4;
  switch (k) {
    case 0: s = sr; c = cr; break;
    case 1: s = cr; c = -sr; break;
    case 2: s = -sr; c = -cr; break;
    default: s = -cr; c = sr; break;
  }
}

Vec2 boundary_point(const ScattererConfig& config, const PhasePoint& p) {
  const Disk& d = config.disks.at(p.obstacle);
  double s, c;
  exact_sincos(p.boundary_angle, s, c);
  return d.center + Vec2{c, s} * d.radius;
}

Vec2 outgoing_velocity(const PhasePoint& p) {
  double s, c;
  exact_sincos(p.boundary_angle + p.reflection_angle, s, c);
  return {c, s};
}

Hit next_collision(const ScattererConfig& config, Vec2 start, Vec2 v,
                   std::int64_t max_cells) {
  if (std::abs(norm(v) - 1.0) > 1e-12) throw NonUnitInputError("direction is not a unit vector");
  const double inf = std::numeric_limits<double>::infinity();
  std::int64_t ix = static_cast<std::int64_t>(std::floor(start.x));
  std::int64_t iy = static_cast<std::int64_t>(std::floor(start.y));
  const int sx = v.x > 0 ? 1 : (v.x < 0 ? -1 : 0);
  const int sy = v.y > 0 ? 1 : (v.y < 0 ? -1 : 0);

  double best_t = inf, tangent_t = inf;
  const CellCandidate* best = nullptr;
  Cell best_cell;
  Vec2 best_dp;

  for (std::int64_t visited = 0;; ++visited) {
    for (const CellCandidate& cand : config.candidates) {
      Vec2 dp{(start.x - cand.center.x) - double(ix), (start.y - cand.center.y) - double(iy)};
      double b = dot(dp, v);
      double h = cross(dp, v);
      double disc = cand.radius * cand.radius - h * h;
      if (disc < -kEpsHit) continue;
      if (disc <= kEpsHit) {
        double t = -b;
        if (t > kSelfHitT && t < tangent_t) tangent_t = t;
        continue;
      }
      double t = -b - std::sqrt(disc);
      if (t > kSelfHitT && t < best_t) {
        best_t = t;
        best = &cand;
        best_cell = Cell{ix, iy} + cand.offset;
        best_dp = dp;
      }
    }
    double tx = sx > 0 ? (double(ix + 1) - start.x) / v.x
                       : (sx < 0 ? (double(ix) - start.x) / v.x : inf);
    double ty = sy > 0 ? (double(iy + 1) - start.y) / v.y
                       : (sy < 0 ? (double(iy) - start.y) / v.y : inf);
    double t_exit = std::min(tx, ty);
    if (std::min(best_t, tangent_t) <= t_exit) break;
    if (visited + 1 >= max_cells) {
      std::ostringstream os;
      os << "no collision within " << max_cells << " cells from (" << start.x << "," << start.y
         << ") along (" << v.x << "," << v.y << ")";
      throw HorizonOverflowError(os.str());
    }
    if (tx < ty) ix += sx;
    else iy += sy;
  }
  if (tangent_t <= best_t) throw TangentRayError("ray is tangent to a scatterer");

  Vec2 n = (best_dp + v * best_t) * (1.0 / best->radius);
  n = n * (1.0 / norm(n));
  return Hit{best->obstacle, best_cell, n, best_t};
}

FlightEvent collision_step(const ScattererConfig& config, const PhasePoint& p,
                           std::int64_t max_cells) {
  Vec2 start = boundary_point(config, p);
  Vec2 v = outgoing_velocity(p);
  Hit hit = next_collision(config, start, v, max_cells);
  Vec2 out = reflect(v, hit.normal);
  FlightEvent ev;
  ev.kappa = hit.cell;
  if (config.dimension == 1) ev.kappa.y = 0;
  ev.flight_length = hit.flight_length;
  ev.next.obstacle = hit.obstacle;
  ev.next.boundary_angle = wrap_angle(std::atan2(hit.normal.y, hit.normal.x));
  ev.next.reflection_angle = std::atan2(cross(hit.normal, out), dot(hit.normal, out));
  return ev;
}

FlightEvent billiard_step(const ScattererConfig& config, TrajectoryState& state,
                          std::int64_t max_cells) {
  FlightEvent ev = collision_step(config, state.current, max_cells);
  state.current = ev.next;
  state.kappa_sum = state.kappa_sum + ev.kappa;
  ++state.steps;
  return ev;
}

PhasePoint sample_phase_point(const ScattererConfig& config, CounterRng& rng) {
  PhasePoint p;
  double u = rng.uniform() * config.radius_sum;
  p.obstacle = int(config.disks.size()) - 1;
  double acc = 0.0;
  for (std::size_t j = 0; j < config.disks.size(); ++j) {
    acc += config.disks[j].radius;
    if (u < acc) {
      p.obstacle = int(j);
      break;
    }
  }
  p.boundary_angle = wrap_angle(2.0 * kPi * rng.uniform());
  for (;;) {
    double phi = std::asin(2.0 * rng.uniform() - 1.0);
    if (std::abs(phi) < kPi / 2.0 - kGrazingReject) {
      p.reflection_angle = phi;
      break;
    }
  }
  return p;
}

PhasePoint time_reverse(const PhasePoint& p) {
  PhasePoint r = p;
  r.reflection_angle = p.reflection_angle == 0.0 ? 0.0 : -p.reflection_angle;
  return r;
}

}  // namespace lorentz
