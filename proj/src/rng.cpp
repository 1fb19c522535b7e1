#include "rlab/rng.hpp"

#include <cstdio>

namespace rlab {

std::uint64_t Rng::uniform(std::uint64_t bound) noexcept {
    // Rejection sampling keeps the distribution exact.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % bound;
}

Bytes Rng::bytes(std::size_t n) {
    Bytes out;
    out.reserve(n);
    while (out.size() < n) {
        std::uint64_t v = next();
        for (int i = 0; i < 8 && out.size() < n; ++i) {
            out.push_back(static_cast<std::uint8_t>(v));
            v >>= 8;
        }
    }
    return out;
}

std::string Rng::next_id(std::string_view prefix) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04u", static_cast<unsigned>(++serial_));
    return std::string(prefix) + "-" + buf;
}

}  // namespace rlab
