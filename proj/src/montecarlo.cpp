#include "lorentz/montecarlo.hpp"

#include <cmath>
#include <set>

#include "lorentz/error.hpp"

namespace lorentz {

namespace {

struct Moments {
  double s = 0.0, s2 = 0.0;
  void add(double x) {
    s += x;
    s2 += x * x;
  }
  void merge(const Moments& o) {
    s += o.s;
    s2 += o.s2;
  }
};

EstimateWithCI mean_estimate(const Moments& m, std::uint64_t count) {
  EstimateWithCI e;
  e.count = count;
  if (count == 0) return e;
  double n = double(count);
  e.value = m.s / n;
  double var = m.s2 / n - e.value * e.value;
  e.sigma = std::sqrt(std::max(var, 0.0) / n);
  return e;
}

void check_overflow(std::uint64_t dropped, std::uint64_t total, const RunOptions& opts) {
  if (total == 0) return;
  double frac = double(dropped) / double(total);
  if (frac > opts.overflow_abort)
    throw OverflowAbortError("dropped fraction " + std::to_string(frac) + " exceeds " +
                             std::to_string(opts.overflow_abort));
}

// Evolves one mu-bar sample for `steps` collisions, calling visit(t, event, state)
// after each step t = 1..steps. Returns 0 on success, 1 on overflow, 2 on tangent.
template <class Visit>
int run_trajectory(const ScattererConfig& config, std::uint64_t seed, std::uint64_t stream,
                   std::int64_t steps, std::int64_t max_cells, PhasePoint& start, Visit visit) {
  CounterRng rng(seed, stream);
  TrajectoryState st;
  st.current = sample_phase_point(config, rng);
  st.rng_state = rng.state();
  start = st.current;
  try {
    for (std::int64_t t = 1; t <= steps; ++t) {
      FlightEvent ev = billiard_step(config, st, max_cells);
      visit(t, ev, st);
    }
  } catch (const HorizonOverflowError&) {
    return 1;
  } catch (const TangentRayError&) {
    return 2;
  }
  return 0;
}

StreamRange range_of(const RunOptions& o, std::uint64_t count) {
  return {o.seed, o.stream_base, count};
}

struct CorrelationBlock {
  Moments re, im;
  std::uint64_t valid = 0, dropped = 0;
};

template <class Value>
CorrelationEstimate correlate(const ScattererConfig& config, std::int64_t steps,
                              std::uint64_t trajectories, const RunOptions& opts, Value value) {
  auto blocks = run_blocks<CorrelationBlock>(
      trajectories, opts, [&](std::uint64_t b, std::uint64_t e) {
        CorrelationBlock acc;
        std::vector<std::pair<Cell, int>> path(std::size_t(steps) + 1);
        for (std::uint64_t i = b; i < e; ++i) {
          PhasePoint start;
          int rc = run_trajectory(config, opts.seed, opts.stream_base + i, steps, opts.max_cells,
                                  start, [&](std::int64_t t, const FlightEvent&,
                                             const TrajectoryState& st) {
                                    path[std::size_t(t)] = {st.kappa_sum, st.current.obstacle};
                                  });
          if (rc != 0) {
            ++acc.dropped;
            continue;
          }
          path[0] = {Cell{}, start.obstacle};
          complex v = value(path);
          acc.re.add(v.real());
          acc.im.add(v.imag());
          ++acc.valid;
        }
        return acc;
      });
  CorrelationBlock tot;
  for (const auto& blk : blocks) {
    tot.re.merge(blk.re);
    tot.im.merge(blk.im);
    tot.valid += blk.valid;
    tot.dropped += blk.dropped;
  }
  check_overflow(tot.dropped, trajectories, opts);
  CorrelationEstimate out;
  out.estimate.re = mean_estimate(tot.re, tot.valid);
  out.estimate.im = mean_estimate(tot.im, tot.valid);
  out.dropped = tot.dropped;
  return out;
}

// phi values grouped by obstacle: obstacle -> list of (cell, value)
std::vector<std::vector<std::pair<Cell, complex>>> by_obstacle(const ScattererConfig& config,
                                                                const CellObservable& obs) {
  std::vector<std::vector<std::pair<Cell, complex>>> out(config.disks.size());
  for (const auto& [key, v] : obs.support) {
    if (key.second < 0 || key.second >= int(config.disks.size()))
      throw DomainError("observable refers to unknown obstacle " + std::to_string(key.second));
    out[std::size_t(key.second)].push_back({key.first, v});
  }
  return out;
}

// sum over N1 of phi(N1, j0) psi(N1 + kappa, jn)
complex pair_value(const std::vector<std::vector<std::pair<Cell, complex>>>& phi,
                   const CellObservable& psi, int j0, Cell kappa, int jn) {
  complex acc{0.0};
  for (const auto& [cell, v] : phi[std::size_t(j0)]) acc += v * psi.at(cell + kappa, jn);
  return acc;
}

void require_support(const CellObservable& phi, const CellObservable& psi) {
  if (phi.empty() || psi.empty()) throw EmptySupportError("observable has empty support");
}

}  // namespace

void check_streams(const std::vector<StreamRange>& ranges) {
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    for (std::size_t j = i + 1; j < ranges.size(); ++j) {
      const auto& a = ranges[i];
      const auto& b = ranges[j];
      if (a.seed != b.seed || a.count == 0 || b.count == 0) continue;
      if (a.first < b.first + b.count && b.first < a.first + a.count)
        throw SeedCollisionError("stream ranges " + std::to_string(i) + " and " +
                                 std::to_string(j) + " overlap under seed " +
                                 std::to_string(a.seed));
    }
  }
}

void SparseHistogram::merge(const SparseHistogram& o) {
  for (const auto& [k, c] : o.counts) counts[k] += c;
  total += o.total;
  overflow_count += o.overflow_count;
  tangent_count += o.tangent_count;
  provenance.insert(provenance.end(), o.provenance.begin(), o.provenance.end());
}

EstimateWithCI proportion_estimate(std::uint64_t successes, std::uint64_t trials, double z) {
  EstimateWithCI e;
  e.count = trials;
  e.proportion = true;
  e.wilson_z = z;
  if (trials == 0) return e;
  const double n = double(trials);
  const double p = double(successes) / n;
  e.value = p;
  e.sigma = std::sqrt(p * (1.0 - p) / n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  e.wilson_low = std::max(0.0, center - half);
  e.wilson_high = std::min(1.0, center + half);
  if (successes == 0) e.wilson_low = 0.0;
  if (successes == trials) e.wilson_high = 1.0;
  return e;
}

complex observable_integral(const ScattererConfig& config, const CellObservable& obs) {
  complex acc{0.0};
  for (const auto& [key, v] : obs.support)
    acc += v * (config.disks.at(std::size_t(key.second)).radius / config.radius_sum);
  return acc;
}

std::vector<complex> observable_projection(const ScattererConfig& config,
                                           const CellObservable& obs) {
  std::vector<complex> out(config.disks.size(), complex{0.0});
  for (const auto& [key, v] : obs.support) out.at(std::size_t(key.second)) += v;
  return out;
}

SparseHistogram estimate_tail(const ScattererConfig& config, std::uint64_t samples,
                              const RunOptions& opts) {
  if (samples < 1) throw DomainError("samples must be >= 1");
  auto blocks = run_blocks<SparseHistogram>(samples, opts, [&](std::uint64_t b, std::uint64_t e) {
    SparseHistogram h;
    for (std::uint64_t i = b; i < e; ++i) {
      CounterRng rng(opts.seed, opts.stream_base + i);
      PhasePoint p = sample_phase_point(config, rng);
      try {
        h.add(collision_step(config, p, opts.max_cells).kappa);
      } catch (const HorizonOverflowError&) {
        h.add_dropped(false);
      } catch (const TangentRayError&) {
        h.add_dropped(true);
      }
    }
    return h;
  });
  SparseHistogram out;
  for (const auto& h : blocks) out.merge(h);
  out.provenance = {range_of(opts, samples)};
  check_overflow(out.overflow_count, out.total, opts);
  return out;
}

SparseHistogram run_parallel(const ScattererConfig& config, const std::vector<JobSpec>& jobs,
                             unsigned workers) {
  std::vector<StreamRange> ranges;
  for (const auto& j : jobs) ranges.push_back(j.streams);
  check_streams(ranges);
  SparseHistogram out;
  for (const auto& j : jobs) {
    if (j.streams.count == 0) continue;
    RunOptions o;
    o.seed = j.streams.seed;
    o.stream_base = j.streams.first;
    o.workers = workers;
    out.merge(estimate_tail(config, j.streams.count, o));
  }
  return out;
}

std::vector<LltEstimate> estimate_llt_multi(const ScattererConfig& config,
                                            const std::vector<std::int64_t>& n_list,
                                            const std::vector<Cell>& targets,
                                            std::uint64_t trajectories, const RunOptions& opts) {
  if (n_list.empty()) throw DomainError("n_list is empty");
  for (auto n : n_list)
    if (n < 3) throw DomainError("n must be >= 3, got " + std::to_string(n));
  const std::int64_t nmax = *std::max_element(n_list.begin(), n_list.end());
  const std::set<std::int64_t> wanted(n_list.begin(), n_list.end());
  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < n_list.size(); ++i) slot.emplace(n_list[i], i);

  using Block = std::vector<SparseHistogram>;
  auto blocks = run_blocks<Block>(trajectories, opts, [&](std::uint64_t b, std::uint64_t e) {
    Block hs(n_list.size());
    std::vector<Cell> at(n_list.size());
    for (std::uint64_t i = b; i < e; ++i) {
      PhasePoint start;
      int rc = run_trajectory(config, opts.seed, opts.stream_base + i, nmax, opts.max_cells, start,
                              [&](std::int64_t t, const FlightEvent&, const TrajectoryState& st) {
                                if (wanted.count(t)) at[slot[t]] = st.kappa_sum;
                              });
      for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (rc == 0) hs[k].add(at[k]);
        else hs[k].add_dropped(rc == 2);
      }
    }
    return hs;
  });
  std::vector<LltEstimate> out(n_list.size());
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    out[k].n = n_list[k];
    out[k].targets = targets;
    for (const auto& blk : blocks) out[k].histogram.merge(blk[k]);
    out[k].histogram.provenance = {range_of(opts, trajectories)};
    check_overflow(out[k].histogram.overflow_count, out[k].histogram.total, opts);
    for (Cell t : targets) {
      if (config.dimension == 1) t.y = 0;
      out[k].estimates.push_back(
          proportion_estimate(out[k].histogram.count(t), out[k].histogram.valid()));
    }
  }
  return out;
}

LltEstimate estimate_llt(const ScattererConfig& config, std::int64_t n,
                         const std::vector<Cell>& targets, std::uint64_t trajectories,
                         const RunOptions& opts) {
  return estimate_llt_multi(config, {n}, targets, trajectories, opts).front();
}

CorrelationEstimate estimate_mixing(const ScattererConfig& config, const CellObservable& phi,
                                    const CellObservable& psi, std::int64_t n,
                                    std::uint64_t trajectories, const RunOptions& opts) {
  require_support(phi, psi);
  if (n < 3) throw DomainError("n must be >= 3");
  auto grouped = by_obstacle(config, phi);
  return correlate(config, n, trajectories, opts, [&](const auto& path) {
    const auto& [kn, jn] = path[std::size_t(n)];
    return pair_value(grouped, psi, path[0].second, kn, jn);
  });
}

CorrelationEstimate coboundary_estimate(const ScattererConfig& config, const CellObservable& phi,
                                        const CellObservable& psi, std::int64_t n, int m,
                                        std::uint64_t trajectories, const RunOptions& opts) {
  require_support(phi, psi);
  if (m < 1) throw DomainError("coboundary order m must be >= 1");
  if (n - m < 3) throw DomainError("coboundary requires n - m >= 3");
  auto grouped = by_obstacle(config, phi);
  std::vector<double> weight(std::size_t(m) + 1);
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    weight[std::size_t(k)] = (k % 2 == 0) ? binom : -binom;
    binom = binom * double(m - k) / double(k + 1);
  }
  return correlate(config, n, trajectories, opts, [&](const auto& path) {
    complex acc{0.0};
    for (int k = 0; k <= m; ++k) {
      const auto& [kt, jt] = path[std::size_t(n - k)];
      acc += weight[std::size_t(k)] * pair_value(grouped, psi, path[0].second, kt, jt);
    }
    return acc;
  });
}

KEstimate estimate_K(const ScattererConfig& config, const CellObservable& phi,
                     const CellObservable& psi, int J, std::uint64_t samples,
                     const RunOptions& opts) {
  if (J < 1) throw DomainError("J must be >= 1");
  require_support(phi, psi);
  const auto phibar = observable_projection(config, phi);
  const auto psibar = observable_projection(config, psi);
  const complex mean_phi = observable_integral(config, phi) ;
  const complex mean_psi = observable_integral(config, psi);
  // mu-bar means of the projections coincide with the mu-integrals
  const std::size_t nj = std::size_t(J);

  struct Block {
    std::vector<Moments> fwd, bwd;  // 4 per term: (comp, re/im)
    std::array<Moments, 4> k;
    std::uint64_t valid = 0, dropped = 0;
  };
  auto blocks = run_blocks<Block>(samples, opts, [&](std::uint64_t b, std::uint64_t e) {
    Block acc;
    acc.fwd.resize(4 * nj);
    acc.bwd.resize(4 * nj);
    std::vector<Cell> kap(nj + 1);
    std::vector<int> obst(nj + 1);
    for (std::uint64_t i = b; i < e; ++i) {
      PhasePoint start;
      int rc = run_trajectory(config, opts.seed, opts.stream_base + i, J + 1, opts.max_cells,
                              start, [&](std::int64_t t, const FlightEvent& ev,
                                         const TrajectoryState& st) {
                                kap[std::size_t(t - 1)] = ev.kappa;
                                obst[std::size_t(t)] = st.current.obstacle;
                              });
      if (rc != 0) {
        ++acc.dropped;
        continue;
      }
      obst[0] = start.obstacle;
      ++acc.valid;
      std::array<complex, 2> z{complex{0.0}, complex{0.0}};
      const double k0[2] = {double(kap[0].x), double(kap[0].y)};
      for (std::size_t j = 0; j < nj; ++j) {
        complex f = phibar[std::size_t(obst[j])];
        for (int c = 0; c < 2; ++c) {
          complex term = k0[c] * f;
          acc.fwd[4 * j + 2 * c].add(term.real());
          acc.fwd[4 * j + 2 * c + 1].add(term.imag());
          z[std::size_t(c)] += mean_psi * term;
        }
      }
      const complex g = psibar[std::size_t(obst[0])];
      for (std::size_t i = 1; i <= nj; ++i) {
        const double ki[2] = {double(kap[i].x), double(kap[i].y)};
        for (int c = 0; c < 2; ++c) {
          complex term = ki[c] * g;
          acc.bwd[4 * (i - 1) + 2 * c].add(term.real());
          acc.bwd[4 * (i - 1) + 2 * c + 1].add(term.imag());
          z[std::size_t(c)] += mean_phi * term;
        }
      }
      for (int c = 0; c < 2; ++c) {
        acc.k[std::size_t(2 * c)].add(z[std::size_t(c)].real());
        acc.k[std::size_t(2 * c + 1)].add(z[std::size_t(c)].imag());
      }
    }
    return acc;
  });

  Block tot;
  tot.fwd.resize(4 * nj);
  tot.bwd.resize(4 * nj);
  for (const auto& blk : blocks) {
    for (std::size_t i = 0; i < 4 * nj; ++i) {
      tot.fwd[i].merge(blk.fwd[i]);
      tot.bwd[i].merge(blk.bwd[i]);
    }
    for (std::size_t i = 0; i < 4; ++i) tot.k[i].merge(blk.k[i]);
    tot.valid += blk.valid;
    tot.dropped += blk.dropped;
  }
  check_overflow(tot.dropped, samples, opts);

  KEstimate out;
  out.dropped = tot.dropped;
  for (int c = 0; c < 2; ++c) {
    out.K[std::size_t(c)].re = mean_estimate(tot.k[std::size_t(2 * c)], tot.valid);
    out.K[std::size_t(c)].im = mean_estimate(tot.k[std::size_t(2 * c + 1)], tot.valid);
  }
  auto unpack = [&](const std::vector<Moments>& m, std::vector<std::array<complex, 2>>& terms,
                    std::vector<double>& sig) {
    for (std::size_t j = 0; j < nj; ++j) {
      std::array<complex, 2> t;
      double s2 = 0.0;
      for (int c = 0; c < 2; ++c) {
        auto re = mean_estimate(m[4 * j + 2 * c], tot.valid);
        auto im = mean_estimate(m[4 * j + 2 * c + 1], tot.valid);
        t[std::size_t(c)] = {re.value, im.value};
        s2 += re.sigma * re.sigma + im.sigma * im.sigma;
      }
      terms.push_back(t);
      sig.push_back(std::sqrt(s2));
    }
  };
  unpack(tot.fwd, out.forward, out.forward_sigma);
  unpack(tot.bwd, out.backward, out.backward_sigma);

  const double first_ci = 1.96 * std::max(out.forward_sigma.front(), out.backward_sigma.front());
  const std::size_t q0 = nj - std::max<std::size_t>(1, nj / 4);
  auto mag = [](const std::array<complex, 2>& t) {
    return std::sqrt(std::norm(t[0]) + std::norm(t[1]));
  };
  for (std::size_t j = q0; j < nj; ++j)
    if (mag(out.forward[j]) >= 10.0 * first_ci || mag(out.backward[j]) >= 10.0 * first_ci)
      out.non_decay_warning = true;
  return out;
}

ReversalAudit audit_time_reversal(const ScattererConfig& config, std::int64_t n,
                                  std::uint64_t trajectories, const RunOptions& opts) {
  if (n < 1) throw DomainError("n must be >= 1");
  auto blocks = run_blocks<ReversalAudit>(trajectories, opts, [&](std::uint64_t b,
                                                                  std::uint64_t e) {
    ReversalAudit acc;
    std::vector<PhasePoint> pts(std::size_t(n) + 1);
    for (std::uint64_t i = b; i < e; ++i) {
      ++acc.trajectories;
      PhasePoint start;
      Cell kappa_n;
      int rc = run_trajectory(config, opts.seed, opts.stream_base + i, n, opts.max_cells, start,
                              [&](std::int64_t t, const FlightEvent&, const TrajectoryState& st) {
                                pts[std::size_t(t)] = st.current;
                                kappa_n = st.kappa_sum;
                              });
      if (rc != 0) {
        ++acc.dropped;
        continue;
      }
      pts[0] = start;
      Cell reversed;
      bool ok = true;
      try {
        for (std::int64_t k = n; k >= 1; --k) {
          FlightEvent ev = collision_step(config, time_reverse(pts[std::size_t(k)]), opts.max_cells);
          reversed = reversed + ev.kappa;
          PhasePoint expect = time_reverse(pts[std::size_t(k - 1)]);
          if (ev.next.obstacle != expect.obstacle) ok = false;
          double da = std::abs(std::remainder(ev.next.boundary_angle - expect.boundary_angle,
                                              2.0 * 3.141592653589793));
          double dphi = std::abs(ev.next.reflection_angle - expect.reflection_angle);
          acc.max_angle_error = std::max({acc.max_angle_error, da, dphi});
        }
      } catch (const Error&) {
        ok = false;
      }
      ++acc.checked;
      if (!ok || !(reversed == -kappa_n)) ++acc.failures;
    }
    return acc;
  });
  ReversalAudit out;
  for (const auto& blk : blocks) {
    out.trajectories += blk.trajectories;
    out.checked += blk.checked;
    out.failures += blk.failures;
    out.dropped += blk.dropped;
    out.max_angle_error = std::max(out.max_angle_error, blk.max_angle_error);
  }
  return out;
}

}  // namespace lorentz
