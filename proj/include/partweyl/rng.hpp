#ifndef PARTWEYL_RNG_HPP
#define PARTWEYL_RNG_HPP

#include <cstdint>

namespace partweyl {

namespace detail {
// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
} // namespace detail

/// Counter-based splittable generator: every draw is a pure function of
/// (seed, stream, counter), so parallel partitions with distinct streams
/// reproduce bit-identically regardless of scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(detail::mix64(seed ^ detail::mix64(stream * 0xd1342543de82ef95ull + 1))) {}

    CounterRng split(std::uint64_t stream) const {
        CounterRng r(key_, stream + 0x5851f42d4c957f2dull);
        return r;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

} // namespace partweyl

#endif
