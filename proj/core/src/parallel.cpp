#include "cdlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace cdlab {

std::size_t worker_limit() {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const char* cap = std::getenv(kThreadCapVariable);
  if (cap == nullptr || *cap == '\0') return hw;
  char* end = nullptr;
  const long v = std::strtol(cap, &end, 10);
  if (end == cap || *end != '\0' || v <= 0) return hw;
  return static_cast<std::size_t>(v);
}

}  // namespace cdlab
