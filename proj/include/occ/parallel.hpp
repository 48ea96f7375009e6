#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace occ {

// Effective worker count. Order of precedence: explicit request, the
// OCC_THREADS environment variable, hardware concurrency. Always >= 1.
int resolve_threads(int requested = 0);

// Runs fn(chunk_begin, chunk_end) over disjoint contiguous chunks covering
// [begin, end). Work items must be independent per element so the chunking
// (and therefore the thread count) cannot change results.
void parallel_for(std::int64_t begin, std::int64_t end, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

// Pairwise tree sum. The reduction order depends only on the length of
// `values`, never on the thread count, so totals reproduce exactly.
double pairwise_sum(std::span<const double> values);

}  // namespace occ
