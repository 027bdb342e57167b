#include <atomic>
#include <cstdlib>
#include <string>

#include "gridcomp/kernels.hpp"

namespace gridcomp::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("GRIDCOMP_KERNELS")) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  return (avx2_table() != nullptr && cpu_has_avx2()) ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

bool backend_supported(Backend b) {
  if (b == Backend::scalar) return true;
  return avx2_table() != nullptr && cpu_has_avx2();
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
  if (!backend_supported(b)) return false;
  current().store(b, std::memory_order_relaxed);
  return true;
}

std::string_view backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& active() {
  return active_backend() == Backend::avx2 ? *avx2_table() : scalar_table();
}

}  // namespace gridcomp::kernels
