#include "lrfhss/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lrfhss {

std::size_t worker_count() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("LRFHSS_LAB_THREADS")) {
        try {
            const long v = std::stol(cap);
            if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return n;
}

}  // namespace lrfhss
