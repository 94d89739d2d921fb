#ifndef AFFERENTSIM_PARALLEL_HPP
#define AFFERENTSIM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace afferentsim {

/// Worker count: hardware concurrency, capped by AFFERENTSIM_THREADS.
int thread_count();

/// Calls body(i) for i in [0, n) on up to thread_count() threads. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace afferentsim

#endif  // AFFERENTSIM_PARALLEL_HPP
