#include "gplab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gplab {

int thread_cap() {
  if (const char* env = std::getenv("GP_LAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& task) {
  const int workers = std::min(count, thread_cap());
  std::vector<std::exception_ptr> errors(std::max(count, 0));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gplab
