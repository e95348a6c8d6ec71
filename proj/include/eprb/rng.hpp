#pragma once

// Counter-based random number streams.
//
// Every random quantity in a run is drawn from a stream keyed by
// (seed, domain, index). Streams are stateless to construct and cheap to
// mix, so trial generation can be partitioned across workers in any way
// without changing a single drawn value.

#include <cstdint>

namespace eprb {

inline constexpr double kTwoPi = 6.283185307179586476925286766559005768;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

// Sub-stream tags. One domain per independent source of randomness.
enum class StreamDomain : std::uint64_t {
    schedule = 1,       // setting-pair choice, one draw per trial
    source = 2,         // pair state (lambda, aux)
    station_left = 3,   // left-station local randomness (time tags)
    station_right = 4,  // right-station local randomness
    reference = 5,      // non-local reference sampler
};

class RngStream {
  public:
    RngStream(std::uint64_t seed, StreamDomain domain, std::uint64_t index)
        : state_(hash_combine(hash_combine(mix64(seed + 0x7F4A7C15ull),
                                           static_cast<std::uint64_t>(domain)),
                              index)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform double in [0, 1), 53 significant bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform angle in [0, 2*pi).
    double next_angle() { return next_unit() * kTwoPi; }

    // Uniform sign in {-1, +1}.
    int next_sign() { return (next_u64() >> 63) ? 1 : -1; }

  private:
    std::uint64_t state_;
};

}  // namespace eprb
