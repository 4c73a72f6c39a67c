#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lorentz/rng.hpp"

namespace lorentz {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Integer lattice pair: cell index, displacement, direction.
struct Cell {
  std::int64_t x = 0;
  std::int64_t y = 0;
  Cell operator+(Cell o) const { return {x + o.x, y + o.y}; }
  Cell operator-(Cell o) const { return {x - o.x, y - o.y}; }
  Cell operator-() const { return {-x, -y}; }
  Cell operator*(std::int64_t s) const { return {x * s, y * s}; }
  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(c.y) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct Disk {
  Vec2 center;
  double radius = 0.0;
};

// A disk translate that can intersect the unit cell [0,1)^2.
struct CellCandidate {
  int obstacle = 0;
  Cell offset;  // lattice offset of the translate relative to the cell
  Vec2 center;  // disk center relative to the cell's lower-left corner
  double radius = 0.0;
};

struct ScattererConfig {
  int dimension = 2;
  std::vector<Disk> disks;
  double boundary_length = 0.0;
  double radius_sum = 0.0;
  std::vector<CellCandidate> candidates;
};

ScattererConfig build_config(const std::vector<Disk>& disks, int dimension);

Vec2 reflect(Vec2 incoming, Vec2 normal);

// Cosine and sine with exact values at multiples of pi/2.
void exact_sincos(double angle, double& s, double& c);

struct PhasePoint {
  int obstacle = 0;
  double boundary_angle = 0.0;    // [0, 2pi)
  double reflection_angle = 0.0;  // angle from outward normal to outgoing velocity
  bool operator==(const PhasePoint&) const = default;
};

// Position relative to the obstacle's fundamental-cell representative.
Vec2 boundary_point(const ScattererConfig& config, const PhasePoint& p);
Vec2 outgoing_velocity(const PhasePoint& p);

struct Hit {
  int obstacle = 0;
  Cell cell;       // lattice translate of the hit disk
  Vec2 normal;     // outward unit normal at the hit point
  double flight_length = 0.0;
};

inline constexpr std::int64_t kDefaultMaxCells = 10'000'000;

// start is given relative to the lattice (absolute coordinates); it must lie on
// a scatterer boundary with direction pointing into the table.
Hit next_collision(const ScattererConfig& config, Vec2 start, Vec2 direction,
                   std::int64_t max_cells = kDefaultMaxCells);

struct FlightEvent {
  Cell kappa;
  double flight_length = 0.0;
  PhasePoint next;
};

struct TrajectoryState {
  PhasePoint current;
  Cell kappa_sum;
  std::uint64_t steps = 0;
  RngState rng_state;
};

// One collision from a phase point, without touching any trajectory state.
FlightEvent collision_step(const ScattererConfig& config, const PhasePoint& p,
                           std::int64_t max_cells = kDefaultMaxCells);

FlightEvent billiard_step(const ScattererConfig& config, TrajectoryState& state,
                          std::int64_t max_cells = kDefaultMaxCells);

PhasePoint sample_phase_point(const ScattererConfig& config, CounterRng& rng);

PhasePoint time_reverse(const PhasePoint& p);

inline constexpr double kEpsHit = 1e-12;
inline constexpr double kSelfHitT = 1e-9;
inline constexpr double kGrazingReject = 1e-9;

}  // namespace lorentz
