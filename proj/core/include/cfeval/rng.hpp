#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfeval {

/// Entity kinds used to partition the key space of derived streams.
enum class StreamKind : std::uint64_t {
    Location = 1,
    Model = 2,
    ModelLocation = 3,
    Approach = 4,
};

/// Mixes a root seed and a key path into a 64-bit stream seed. Any change
/// in a key component yields an unrelated stream, so draws for one entity
/// never depend on how many other entities exist or the order they run in.
std::uint64_t derive_seed(std::uint64_t root, StreamKind kind,
                          std::initializer_list<std::uint64_t> path);

/// A seeded random stream. Copyable; a copy replays the same sequence.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : engine_{seed} {}
    Stream(std::uint64_t root, StreamKind kind, std::initializer_list<std::uint64_t> path)
        : engine_{derive_seed(root, kind, path)} {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>{lo, hi}(engine_);
    }

    /// Normal draw as mean + sd * z, so sd == 0 returns mean exactly.
    double normal(double mean, double sd) { return mean + sd * standard_normal_(engine_); }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> standard_normal_{0.0, 1.0};
};

} // namespace cfeval
