#include "hssalt/parallel.hpp"

#include <cstdlib>
#include <string>

#include "hssalt/error.hpp"

namespace hssalt {

std::size_t resolve_workers(std::optional<std::size_t> requested) {
  if (requested) {
    if (*requested == 0) throw ArgumentError("workers must be at least 1");
    return *requested;
  }
  if (const char* env = std::getenv("HSSALT_WORKERS"); env != nullptr && *env != '\0') {
    std::size_t pos = 0;
    long long value = 0;
    try {
      value = std::stoll(env, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != std::string(env).size() || value < 1) {
      throw ArgumentError("HSSALT_WORKERS must be a positive integer");
    }
    return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace hssalt
