#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace favard::parallel {

// Worker count used by every parallel loop in the library. Results never
// depend on it: work is split into fixed-size chunks and reduced in chunk order.
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs body(chunk, begin, end) for the chunks [k*chunk, min(n, (k+1)*chunk)).
// If any chunk throws, the exception from the lowest-numbered failing chunk
// is rethrown after all workers stop.
template <class Body>
void for_chunks(std::size_t n, std::size_t chunk, Body&& body) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const std::size_t workers = std::min<std::size_t>(thread_count(), chunks);

  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < chunks; k = next.fetch_add(1)) {
      try {
        body(k, k * chunk, std::min(n, (k + 1) * chunk));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Pairwise (tree) summation of a vector; the association order depends only
// on the vector length.
inline double tree_sum(std::vector<double> v) {
  if (v.empty()) return 0.0;
  while (v.size() > 1) {
    std::size_t half = (v.size() + 1) / 2;
    for (std::size_t i = 0; i + half < v.size(); ++i) v[i] += v[i + half];
    v.resize(half);
  }
  return v[0];
}

// Deterministic parallel sum: partial(begin, end) is evaluated per chunk and
// the chunk results are tree-summed.
template <class Partial>
double sum(std::size_t n, std::size_t chunk, Partial&& partial) {
  if (n == 0) return 0.0;
  chunk = std::max<std::size_t>(chunk, 1);
  std::vector<double> parts((n + chunk - 1) / chunk, 0.0);
  for_chunks(n, chunk, [&](std::size_t k, std::size_t b, std::size_t e) { parts[k] = partial(b, e); });
  return tree_sum(std::move(parts));
}

}  // namespace favard::parallel
