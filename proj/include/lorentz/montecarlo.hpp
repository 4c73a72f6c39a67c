#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "lorentz/geometry.hpp"
#include "lorentz/kernels.hpp"

namespace lorentz {

// A contiguous range of rng streams under one seed.
struct StreamRange {
  std::uint64_t seed = 0;
  std::uint64_t first = 0;
  std::uint64_t count = 0;
  bool operator==(const StreamRange&) const = default;
};

// Throws SeedCollisionError if two ranges share a (seed, stream) pair.
void check_streams(const std::vector<StreamRange>& ranges);

struct SparseHistogram {
  std::map<Cell, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t overflow_count = 0;  // dropped samples (horizon overflow or tangent ray)
  std::uint64_t tangent_count = 0;   // subset of overflow_count
  std::vector<StreamRange> provenance;

  void add(Cell k) {
    ++counts[k];
    ++total;
  }
  void add_dropped(bool tangent) {
    ++overflow_count;
    ++total;
    if (tangent) ++tangent_count;
  }
  std::uint64_t count(Cell k) const {
    auto it = counts.find(k);
    return it == counts.end() ? 0 : it->second;
  }
  std::uint64_t valid() const { return total - overflow_count; }
  void merge(const SparseHistogram& o);
};

struct EstimateWithCI {
  double value = 0.0;
  double sigma = 0.0;
  std::uint64_t count = 0;
  // Wilson score interval; set for proportion estimates only.
  bool proportion = false;
  double wilson_z = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

EstimateWithCI proportion_estimate(std::uint64_t successes, std::uint64_t trials,
                                   double z = 1.959963984540054);

struct ComplexEstimate {
  EstimateWithCI re;
  EstimateWithCI im;
  complex value() const { return {re.value, im.value}; }
};

// Finitely supported observable, constant on each obstacle of each cell.
struct CellObservable {
  std::map<std::pair<Cell, int>, complex> support;

  void set(Cell cell, int obstacle, complex v) { support[{cell, obstacle}] = v; }
  // Same value on every obstacle of the cell.
  void set_cell(Cell cell, int obstacles, complex v) {
    for (int j = 0; j < obstacles; ++j) set(cell, j, v);
  }
  complex at(Cell cell, int obstacle) const {
    auto it = support.find({cell, obstacle});
    return it == support.end() ? complex{0.0} : it->second;
  }
  bool empty() const { return support.empty(); }
};

// Integral against mu (each cell carries a copy of the invariant probability).
complex observable_integral(const ScattererConfig& config, const CellObservable& obs);
// Per-obstacle values of the Z^2-periodised observable.
std::vector<complex> observable_projection(const ScattererConfig& config,
                                           const CellObservable& obs);

struct RunOptions {
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;
  unsigned workers = 1;
  std::uint64_t block_size = 4096;
  std::int64_t max_cells = kDefaultMaxCells;
  double overflow_abort = 1e-4;
};

// Runs fn(begin, end) over fixed blocks of [0, total) on `workers` threads and
// returns the per-block results in block order.
template <class Acc, class Fn>
std::vector<Acc> run_blocks(std::uint64_t total, const RunOptions& opts, Fn fn) {
  const std::uint64_t bs = std::max<std::uint64_t>(1, opts.block_size);
  const std::uint64_t nblocks = (total + bs - 1) / bs;
  std::vector<Acc> out(nblocks);
  std::vector<std::exception_ptr> errors(nblocks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::uint64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      try {
        out[b] = fn(b * bs, std::min(total, (b + 1) * bs));
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  const unsigned w = std::max(1u, opts.workers);
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

SparseHistogram estimate_tail(const ScattererConfig& config, std::uint64_t samples,
                              const RunOptions& opts);

struct JobSpec {
  StreamRange streams;
};

// Tail histograms for several stream ranges, merged.
SparseHistogram run_parallel(const ScattererConfig& config, const std::vector<JobSpec>& jobs,
                             unsigned workers);

struct LltEstimate {
  std::int64_t n = 0;
  std::vector<Cell> targets;
  std::vector<EstimateWithCI> estimates;
  SparseHistogram histogram;  // law of kappa_n
};

LltEstimate estimate_llt(const ScattererConfig& config, std::int64_t n,
                         const std::vector<Cell>& targets, std::uint64_t trajectories,
                         const RunOptions& opts);

// Same trajectories observed at every n in n_list.
std::vector<LltEstimate> estimate_llt_multi(const ScattererConfig& config,
                                            const std::vector<std::int64_t>& n_list,
                                            const std::vector<Cell>& targets,
                                            std::uint64_t trajectories, const RunOptions& opts);

struct CorrelationEstimate {
  ComplexEstimate estimate;
  std::uint64_t dropped = 0;
};

CorrelationEstimate estimate_mixing(const ScattererConfig& config, const CellObservable& phi,
                                    const CellObservable& psi, std::int64_t n,
                                    std::uint64_t trajectories, const RunOptions& opts);

// m-th backward difference in n of the correlation, on shared trajectories.
CorrelationEstimate coboundary_estimate(const ScattererConfig& config, const CellObservable& phi,
                                        const CellObservable& psi, std::int64_t n, int m,
                                        std::uint64_t trajectories, const RunOptions& opts);

struct KEstimate {
  std::array<ComplexEstimate, 2> K;
  // forward[j] ~ E[kappa . phi o T^j], j = 0..J-1; backward[i-1] ~ E[kappa o T^i . psi], i = 1..J
  std::vector<std::array<complex, 2>> forward, backward;
  std::vector<double> forward_sigma, backward_sigma;  // norm of per-component sigmas
  bool non_decay_warning = false;
  std::uint64_t dropped = 0;
};

KEstimate estimate_K(const ScattererConfig& config, const CellObservable& phi,
                     const CellObservable& psi, int J, std::uint64_t samples,
                     const RunOptions& opts);

struct ReversalAudit {
  std::uint64_t trajectories = 0;
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  std::uint64_t dropped = 0;
  double max_angle_error = 0.0;
};

// For each trajectory x, rebuilds kappa_n(tau T^n x) from single steps started
// at tau(T^k x) and compares with -kappa_n(x) in integers.
ReversalAudit audit_time_reversal(const ScattererConfig& config, std::int64_t n,
                                  std::uint64_t trajectories, const RunOptions& opts);

}  // namespace lorentz
