#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "tloc/detail/text.hpp"

namespace tloc::detail {

// Deterministic RNG wrapper. std::uniform_int_distribution is
// implementation-defined, so index draws are done by hand to keep
// output streams reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform draw in [0, n). Debiased via rejection sampling.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    double unit() { // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// Derives an independent child seed from a parent seed and a name, so a
// consumer keyed by one name is unaffected by draws made under another.
inline std::uint64_t child_seed(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = fnv1a64(name);
    h ^= seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

} // namespace tloc::detail
