#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chaos {

/// Caps the number of worker threads used by parallel_for. 0 selects the
/// hardware concurrency. Results never depend on this value: work is split
/// into fixed index ranges and every reduction runs in a fixed order.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(i) for every i in [0, n), spreading indices over worker threads.
/// The first exception thrown by any call is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Pairwise (tree) summation. The association order depends only on the
/// length of the input.
double tree_sum(std::span<const double> values);

/// Elementwise pairwise reduction of equally sized vectors, in place: the
/// result is left in partials[0].
void tree_reduce_vectors(std::vector<std::vector<double>>& partials);

}  // namespace chaos
