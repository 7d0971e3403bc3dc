#include "z2q/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace z2q {

std::size_t max_free_links() {
  const char* env = std::getenv("Z2Q_MAX_FREE_LINKS");
  if (env == nullptr || *env == '\0') return kDefaultMaxFreeLinks;
  std::size_t value = 0;
  const char* end = env + std::strlen(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end || value == 0 || value > 40) {
    throw std::invalid_argument(std::string("bad Z2Q_MAX_FREE_LINKS value: ") + env);
  }
  return value;
}

}  // namespace z2q
