#include "cfeval/rng.hpp"

namespace cfeval {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, StreamKind kind,
                          std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix(root);
    h = mix(h ^ mix(static_cast<std::uint64_t>(kind)));
    std::uint64_t depth = 0;
    for (std::uint64_t component : path) {
        // Position-dependent salt keeps (a, b) and (b, a) apart.
        h = mix(h ^ mix(component + 0xA0761D6478BD642FULL * ++depth));
    }
    return mix(h ^ depth);
}

} // namespace cfeval
