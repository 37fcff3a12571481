#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace cw {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). A 64-bit word is a pure function of
// (seed, stream, counter):
//
//   key     = {lo32(seed), hi32(seed)}
//   counter = {lo32(counter), hi32(counter), lo32(stream), hi32(stream)}
//   out     = philox4x32_10(counter, key)
//   word    = (uint64(out[1]) << 32) | out[0]
//
// Derived draws consume consecutive counters; see Rng below.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t random_word(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Sequential view over one (seed, stream) pair. Every draw advances the
// counter by a fixed number of words so streams are reproducible from
// their definition alone:
//   next_u64      1 word
//   uniform01     1 word, (w >> 11 + 0.5) * 2^-53, strictly inside (0,1)
//   normal        2 words, Box-Muller cosine branch
//   uniform_index rejection sampling on w mod n, >= 1 word
//   sign          1 word, top bit set -> -1
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64();
    double uniform01();
    double uniform(double lo, double hi);
    double normal();
    double sign();
    std::uint64_t uniform_index(std::uint64_t n);

    // Fisher-Yates, i from size-1 down to 1, j = uniform_index(i+1).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace cw
