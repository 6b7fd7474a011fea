#include "despeckle/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace despeckle {

namespace {

std::atomic<int> g_thread_cap{0};

int default_threads() {
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
      // fall through to hardware concurrency
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void set_num_threads(int n) { g_thread_cap.store(n < 0 ? 0 : n); }

int num_threads() {
  const int cap = g_thread_cap.load();
  return cap > 0 ? cap : default_threads();
}

}  // namespace despeckle
