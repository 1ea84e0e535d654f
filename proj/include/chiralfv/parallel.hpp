#pragma once

// Static spatial domain decomposition used by the 3D kernels.
//
// The x-rows of the spatial grid are split into contiguous slabs, one per
// worker. A worker owns the cells of its slab and reads a halo of `halo`
// rows on each side from the shared, read-only state of the current stage.
// Every output value is produced by exactly one worker with the same
// arithmetic regardless of the slab layout, and reductions are carried out
// afterwards in a fixed row order, so results do not depend on the worker
// count.

#include <functional>
#include <vector>

namespace chiralfv {

struct Slab {
  int begin = 0;  // first owned row
  int end = 0;    // one past the last owned row
};

struct Decomposition {
  std::vector<Slab> slabs;
  int halo = 0;
};

/// Number of workers used by the parallel kernels (>= 1).
int worker_count() noexcept;
void set_worker_count(int workers);

/// Splits `rows` rows into min(workers, rows) contiguous slabs of near-equal
/// size; the first `rows % workers` slabs receive one extra row.
Decomposition decompose_rows(int rows, int workers, int halo);

/// Runs body(slab) for every slab, concurrently when more than one worker is
/// configured.
void for_each_slab(const Decomposition& decomposition, const std::function<void(const Slab&)>& body);

/// Convenience: decompose `rows` over the current worker count and run body
/// on every row.
void parallel_rows(int rows, const std::function<void(int row)>& body);

}  // namespace chiralfv
