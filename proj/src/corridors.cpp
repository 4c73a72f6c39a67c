#include "lorentz/corridors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "lorentz/error.hpp"

namespace lorentz {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Returns (x, y) with -b*x + a*y = 1 for coprime (a, b).
Cell unit_combination(std::int64_t a, std::int64_t b) {
  // extended Euclid on (p, q) = (-b, a)
  std::int64_t old_r = -b, r = a, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r; old_r = r; r = tmp;
    tmp = old_s - q * s; old_s = s; s = tmp;
    tmp = old_t - q * t; old_t = t; t = tmp;
  }
  if (old_r < 0) { old_s = -old_s; old_t = -old_t; }
  return {old_s, old_t};
}

double positive_mod(double x, double p) {
  double m = std::fmod(x, p);
  if (m < 0.0) m += p;
  if (m >= p) m = 0.0;
  return m;
}

struct Interval {
  double s, e;
};

void add_outer(double acc[2][2], Cell w, double weight) {
  acc[0][0] += weight * double(w.x) * double(w.x);
  acc[0][1] += weight * double(w.x) * double(w.y);
  acc[1][0] += weight * double(w.y) * double(w.x);
  acc[1][1] += weight * double(w.y) * double(w.y);
}

SigmaMatrix finish(const double acc[2][2], int dimension) {
  SigmaMatrix m;
  m.dimension = dimension;
  if (dimension == 1) {
    m.a[0][0] = acc[0][0];
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.a[i][j] = acc[i][j];
  }
  return m;
}

void find_tangencies(const ScattererConfig& config, Corridor& cor, double value, int line) {
  const std::int64_t a = cor.direction.x, b = cor.direction.y;
  const double wn = cor.direction_norm();
  const double period = 1.0 / wn;
  const Vec2 nu = cor.normal();
  const Vec2 what{double(a) / wn, double(b) / wn};
  const Cell unit = unit_combination(a, b);
  const double side = line == 0 ? 1.0 : -1.0;
  for (std::size_t j = 0; j < config.disks.size(); ++j) {
    const Disk& d = config.disks[j];
    double edge = dot(nu, d.center) + side * d.radius;
    double delta = (edge - value) / period;
    double k = std::nearbyint(delta);
    if (std::abs(delta - k) * period > kTangencyTol) continue;
    // translate m with nu . m = -k * period
    std::int64_t kk = static_cast<std::int64_t>(k);
    Cell m{-kk * unit.x, -kk * unit.y};
    TangencyPoint tp;
    tp.obstacle = int(j);
    tp.translate = m;
    tp.point = d.center + Vec2{double(m.x), double(m.y)} + nu * (side * d.radius);
    tp.line = line;
    tp.position = positive_mod(dot(tp.point, what), wn);
    cor.tangency_points.push_back(tp);
  }
}

void fill_coefficients(Corridor& cor) {
  const double wn = cor.direction_norm();
  for (int line = 0; line < 2; ++line) {
    std::vector<int> on_line;
    for (int i = 0; i < cor.n_tangencies(); ++i)
      if (cor.tangency_points[i].line == line) on_line.push_back(i);
    std::sort(on_line.begin(), on_line.end(), [&](int x, int y) {
      const auto& px = cor.tangency_points[x];
      const auto& py = cor.tangency_points[y];
      if (px.position != py.position) return px.position < py.position;
      return std::tie(px.point.x, px.point.y) < std::tie(py.point.x, py.point.y);
    });
    const int n = int(on_line.size());
    for (int k = 0; k < n; ++k) {
      double s = cor.tangency_points[on_line[k]].position;
      double prev = cor.tangency_points[on_line[(k + n - 1) % n]].position;
      double next = cor.tangency_points[on_line[(k + 1) % n]].position;
      double back = n == 1 ? wn : positive_mod(s - prev, wn);
      double fwd = n == 1 ? wn : positive_mod(next - s, wn);
      for (int i = 0; i < cor.n_tangencies(); ++i) {
        if (cor.tangency_points[i].line == line) continue;
        cor.coefficients.push_back({i, on_line[k], +1, back / wn});
        cor.coefficients.push_back({i, on_line[k], -1, fwd / wn});
      }
    }
  }
}

}  // namespace

double Corridor::direction_norm() const {
  return std::hypot(double(direction.x), double(direction.y));
}

Vec2 Corridor::normal() const {
  double wn = direction_norm();
  return {-double(direction.y) / wn, double(direction.x) / wn};
}

bool SigmaMatrix::nondegenerate() const {
  double scale = dimension == 1 ? std::abs(a[0][0])
                                : std::max(std::abs(a[0][0]), std::abs(a[1][1]));
  if (!(scale > 0.0)) return false;
  if (dimension == 1) return a[0][0] > 0.0;
  return det() > 1e-12 * scale * scale;
}

SigmaMatrix SigmaMatrix::scalar(double s, int dimension) {
  SigmaMatrix m;
  m.dimension = dimension;
  m.a[0][0] = s;
  if (dimension == 2) m.a[1][1] = s;
  return m;
}

std::vector<Cell> prime_directions(int max_direction) {
  if (max_direction < 1) throw DomainError("max_direction must be >= 1");
  std::vector<Cell> dirs;
  for (int a = 0; a <= max_direction; ++a) {
    for (int b = -max_direction; b <= max_direction; ++b) {
      if (a == 0 && b <= 0) continue;
      if (std::gcd(a, std::abs(b)) != 1) continue;
      dirs.push_back({a, b});
    }
  }
  std::sort(dirs.begin(), dirs.end(), [](Cell u, Cell v) {
    auto nu = u.x * u.x + u.y * u.y, nv = v.x * v.x + v.y * v.y;
    if (nu != nv) return nu < nv;
    return u < v;
  });
  return dirs;
}

std::vector<Corridor> enumerate_corridors(const ScattererConfig& config, int max_direction) {
  std::vector<Corridor> out;
  for (Cell w : prime_directions(max_direction)) {
    Corridor proto;
    proto.direction = w;
    const double wn = proto.direction_norm();
    const double period = 1.0 / wn;
    const Vec2 nu = proto.normal();

    bool covered = false;
    for (const Disk& d : config.disks)
      if (2.0 * d.radius >= period) covered = true;
    if (covered) continue;

    const double base = dot(nu, config.disks[0].center) - config.disks[0].radius;
    std::vector<Interval> iv;
    for (const Disk& d : config.disks) {
      double s = positive_mod(dot(nu, d.center) - d.radius - base, period);
      iv.push_back({s, s + 2.0 * d.radius});
    }
    std::sort(iv.begin(), iv.end(), [](const Interval& x, const Interval& y) { return x.s < y.s; });
    double reach = iv[0].e;
    for (const Interval& x : iv) reach = std::max(reach, x.e - period);

    std::vector<std::pair<double, double>> gaps;
    for (std::size_t i = 1; i < iv.size(); ++i) {
      if (iv[i].s - reach > kMinCorridorWidth) gaps.push_back({reach, iv[i].s});
      reach = std::max(reach, iv[i].e);
    }
    if (period - reach > kMinCorridorWidth) gaps.push_back({reach, period});

    for (auto [lo, hi] : gaps) {
      Corridor cor = proto;
      cor.width = hi - lo;
      cor.lower = positive_mod(base + lo, period);
      cor.upper = cor.lower + cor.width;
      find_tangencies(config, cor, cor.lower, 0);
      find_tangencies(config, cor, cor.upper, 1);
      fill_coefficients(cor);
      out.push_back(std::move(cor));
    }
  }
  return out;
}

SigmaMatrix sigma_squared(const std::vector<Corridor>& corridors, double boundary_length,
                          int dimension) {
  if (corridors.empty()) throw NoCorridorError("no corridor: finite horizon configuration");
  double acc[2][2] = {{0, 0}, {0, 0}};
  for (const Corridor& c : corridors) {
    double weight = c.n_tangencies() * c.width * c.width / c.direction_norm();
    add_outer(acc, c.direction, weight / (2.0 * boundary_length));
  }
  return finish(acc, dimension);
}

SigmaMatrix sigma_squared_pairs(const std::vector<Corridor>& corridors, double boundary_length,
                                int dimension) {
  if (corridors.empty()) throw NoCorridorError("no corridor: finite horizon configuration");
  double acc[2][2] = {{0, 0}, {0, 0}};
  for (const Corridor& c : corridors) {
    double weight = c.width * c.width / c.direction_norm() / (4.0 * boundary_length);
    for (std::size_t i = 0; i < c.tangency_points.size(); ++i) {
      add_outer(acc, c.direction, weight);
      add_outer(acc, -c.direction, weight);
    }
  }
  return finish(acc, dimension);
}

SigmaMatrix sigma_squared_tail(const TailTable& table, int dimension) {
  double acc[2][2] = {{0, 0}, {0, 0}};
  for (const TailEntry& e : table.entries) add_outer(acc, e.w, 0.5 * e.c);
  return finish(acc, dimension);
}

TailTable tail_table(const ScattererConfig& config, const std::vector<Corridor>& corridors) {
  std::map<std::pair<Cell, Cell>, double> acc;
  for (const Corridor& cor : corridors) {
    const double wn = cor.direction_norm();
    const std::int64_t w2 = cor.direction.x * cor.direction.x + cor.direction.y * cor.direction.y;
    const double scale = cor.width * cor.width / (2.0 * config.boundary_length * wn);
    for (const FlightCoefficient& fc : cor.coefficients) {
      Cell W = cor.direction * fc.sign;
      Cell D = cor.tangency_points[fc.to].translate - cor.tangency_points[fc.from].translate;
      std::int64_t j = floor_div(D.x * W.x + D.y * W.y, w2);
      Cell L = D - W * j;
      acc[{L, W}] += scale * fc.value;
    }
  }
  TailTable t;
  for (const auto& [key, c] : acc)
    if (c > 0.0) t.entries.push_back({key.first, key.second, c});
  return t;
}

HorizonCertificate check_infinite_horizon(const ScattererConfig& config, int max_direction) {
  HorizonCertificate cert;
  auto cors = enumerate_corridors(config, max_direction);
  if (cors.empty()) return cert;
  const Corridor& c = cors.front();
  cert.infinite = true;
  cert.direction = c.direction;
  cert.offset = 0.5 * (c.lower + c.upper);
  cert.point = c.normal() * cert.offset;
  return cert;
}

}  // namespace lorentz
