#pragma once

#include <vector>

#include "lorentz/geometry.hpp"

namespace lorentz {

inline constexpr int kDefaultMaxDirection = 8;
inline constexpr double kMinCorridorWidth = 1e-9;
inline constexpr double kTangencyTol = 1e-12;

struct TangencyPoint {
  int obstacle = 0;
  Cell translate;      // lattice translate of the obstacle carrying the point
  Vec2 point;          // absolute position of the tangency point
  int line = 0;        // 0: lower boundary (nu . x = lower), 1: upper boundary
  double position = 0; // coordinate along the corridor direction, in [0, |w|)
};

// Coefficient a_(A,B) for a flight leaving near A along sign*w and landing near B.
struct FlightCoefficient {
  int from = 0;  // index into tangency_points (A)
  int to = 0;    // index into tangency_points (B), on the opposite line
  int sign = 1;
  double value = 0.0;
};

struct Corridor {
  Cell direction;        // prime, first nonzero coordinate positive
  double width = 0.0;
  double lower = 0.0;    // nu . x on the lower boundary line, in [0, 1/|w|)
  double upper = 0.0;    // lower + width
  std::vector<TangencyPoint> tangency_points;
  std::vector<FlightCoefficient> coefficients;

  int n_tangencies() const { return int(tangency_points.size()); }
  double direction_norm() const;
  // Unit normal nu = (-w2, w1)/|w|.
  Vec2 normal() const;
};

struct SigmaMatrix {
  int dimension = 2;
  double a[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

  double det() const {
    return dimension == 1 ? a[0][0] : a[0][0] * a[1][1] - a[0][1] * a[1][0];
  }
  bool nondegenerate() const;
  static SigmaMatrix scalar(double s, int dimension);
};

struct TailEntry {
  Cell L;
  Cell w;  // signed direction
  double c = 0.0;
};

struct TailTable {
  std::vector<TailEntry> entries;
};

struct HorizonCertificate {
  bool infinite = false;
  Cell direction;
  Vec2 point;  // a point on the witness line (corridor midline)
  double offset = 0.0;  // nu . x on the midline
};

std::vector<Cell> prime_directions(int max_direction);

std::vector<Corridor> enumerate_corridors(const ScattererConfig& config,
                                          int max_direction = kDefaultMaxDirection);

// Corridor-sum form. Throws NoCorridorError on an empty list.
SigmaMatrix sigma_squared(const std::vector<Corridor>& corridors, double boundary_length,
                          int dimension);
// Sum over (A, +-w) pairs.
SigmaMatrix sigma_squared_pairs(const std::vector<Corridor>& corridors, double boundary_length,
                                int dimension);
// One half of the sum of c_{L,w} w (x) w over the table.
SigmaMatrix sigma_squared_tail(const TailTable& table, int dimension);

TailTable tail_table(const ScattererConfig& config, const std::vector<Corridor>& corridors);

HorizonCertificate check_infinite_horizon(const ScattererConfig& config,
                                          int max_direction = kDefaultMaxDirection);

}  // namespace lorentz
