#ifndef GRIDNAV_RNG_HPP
#define GRIDNAV_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace gridnav {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named sub-stream derivation: one root seed fans out into independent,
// reproducible streams keyed by (name, index).
inline uint64_t derive_seed(uint64_t root, std::string_view name, uint64_t index = 0) {
    uint64_t k = splitmix64(root ^ fnv1a64(name));
    return splitmix64(k ^ splitmix64(index));
}

// Thin wrapper over mt19937_64 with distribution helpers whose outputs are
// identical on every platform (stdlib distributions are not portable).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

inline Rng make_stream(uint64_t root, std::string_view name, uint64_t index = 0) {
    return Rng(derive_seed(root, name, index));
}

}  // namespace gridnav

#endif
