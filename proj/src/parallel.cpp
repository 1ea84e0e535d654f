#include "chiralfv/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>

#ifdef CHIRALFV_HAVE_OPENMP
#include <omp.h>
#endif

namespace chiralfv {

namespace {
std::atomic<int> g_workers{1};
}

int worker_count() noexcept { return g_workers.load(std::memory_order_relaxed); }

void set_worker_count(int workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  g_workers.store(workers, std::memory_order_relaxed);
}

Decomposition decompose_rows(int rows, int workers, int halo) {
  if (rows <= 0 || workers <= 0 || halo < 0) throw std::invalid_argument("decompose_rows: bad arguments");
  Decomposition d;
  d.halo = halo;
  const int parts = std::min(rows, workers);
  const int base = rows / parts;
  const int extra = rows % parts;
  int begin = 0;
  for (int p = 0; p < parts; ++p) {
    const int size = base + (p < extra ? 1 : 0);
    d.slabs.push_back({begin, begin + size});
    begin += size;
  }
  return d;
}

void for_each_slab(const Decomposition& decomposition, const std::function<void(const Slab&)>& body) {
  const int parts = static_cast<int>(decomposition.slabs.size());
#ifdef CHIRALFV_HAVE_OPENMP
  if (parts > 1) {
    // Exceptions must not escape the parallel region; the one from the lowest
    // slab is rethrown so error reporting does not depend on scheduling.
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(parts));
#pragma omp parallel for schedule(static, 1) num_threads(parts)
    for (int p = 0; p < parts; ++p) {
      try {
        body(decomposition.slabs[static_cast<std::size_t>(p)]);
      } catch (...) {
        errors[static_cast<std::size_t>(p)] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    return;
  }
#endif
  for (int p = 0; p < parts; ++p) body(decomposition.slabs[static_cast<std::size_t>(p)]);
}

void parallel_rows(int rows, const std::function<void(int row)>& body) {
  const Decomposition d = decompose_rows(rows, worker_count(), 0);
  for_each_slab(d, [&](const Slab& s) {
    for (int r = s.begin; r < s.end; ++r) body(r);
  });
}

}  // namespace chiralfv
