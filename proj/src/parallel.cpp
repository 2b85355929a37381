#include "lrst/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace lrst {

std::size_t worker_count() {
    std::size_t requested = 0;
    if (const char* env = std::getenv("LRST_THREADS")) {
        std::size_t value = 0;
        const char* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec == std::errc() && ptr == end) requested = value;
    }
    if (requested == 0) {
        requested = std::thread::hardware_concurrency();
        if (requested == 0) requested = 1;
    }
    return requested;
}

}  // namespace lrst
