#pragma once

#include <cstdint>

namespace balmat {

// SplitMix64 finalizer, used as the avalanche step of the keyed stream.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a parent seed and a salt.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix64(seed ^ mix64(salt + 0x632be59bd9b4e019ull));
}

// Purpose tags keep draws for different decisions statistically independent
// even when they share (round, slot).
enum class Tag : std::uint64_t {
    orientation = 1,  // ceil/floor orientation of a matched pair
    shuffle = 2,      // sibling swap at one height level (level in sub)
    excess = 3,       // unpaired top token crossing the edge
    proposal = 4,     // node's neighbor proposal in the random matching model
    async_edge = 5,   // uniform edge pick in the single-edge model
    pairing = 6,      // stub pairing in random regular graph construction
    init = 7,         // initial load generation
};

// Counter-based random stream: every draw is a pure function of
// (seed, round, slot, tag, sub). Decisions within a round are therefore
// order-independent, and a round can be processed in parallel with
// bit-identical results.
class CounterRng {
public:
    CounterRng() : seed_(0) {}
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t word(std::uint64_t round, std::uint64_t slot, Tag tag,
                       std::uint64_t sub = 0) const {
        std::uint64_t h = mix64(seed_ ^ (round * 0xd1342543de82ef95ull));
        h = mix64(h ^ (slot * 0xaf251af3b0f025b5ull));
        h = mix64(h ^ (static_cast<std::uint64_t>(tag) + (sub << 8)));
        return h;
    }

    bool coin(std::uint64_t round, std::uint64_t slot, Tag tag,
              std::uint64_t sub = 0) const {
        return word(round, slot, tag, sub) & 1ull;
    }

    // +1 or -1, each with probability 1/2.
    int sign(std::uint64_t round, std::uint64_t slot, Tag tag,
             std::uint64_t sub = 0) const {
        return coin(round, slot, tag, sub) ? 1 : -1;
    }

    // Uniform value in [0, bound) via multiply-shift with rejection,
    // so the result is exactly uniform and platform-independent.
    std::uint64_t below(std::uint64_t bound, std::uint64_t round,
                        std::uint64_t slot, Tag tag,
                        std::uint64_t sub = 0) const {
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (std::uint64_t attempt = 0;; ++attempt) {
            std::uint64_t r = word(round, slot, tag, sub + (attempt << 32));
            unsigned __int128 m =
                static_cast<unsigned __int128>(r) * static_cast<unsigned __int128>(bound);
            if (static_cast<std::uint64_t>(m) >= threshold)
                return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Uniform double in [0, 1).
    double unit(std::uint64_t round, std::uint64_t slot, Tag tag,
                std::uint64_t sub = 0) const {
        return static_cast<double>(word(round, slot, tag, sub) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
};

// Canonical 64-bit key of an undirected edge {u, v} with u < v.
inline std::uint64_t edge_key(int u, int v) {
    if (u > v) { int t = u; u = v; v = t; }
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
}

}  // namespace balmat
