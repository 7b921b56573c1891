#include "favard/parallel.hpp"

#include <atomic>

namespace favard::parallel {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_count(unsigned count) { g_threads.store(count); }

unsigned thread_count() {
  unsigned n = g_threads.load();
  if (n != 0) return n;
  n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace favard::parallel
