#include "mtdiff/rng.hpp"

namespace mtdiff {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t run, std::uint64_t node, StreamTag tag) {
    std::uint64_t h = mix(master);
    h = mix(h ^ static_cast<std::uint64_t>(tag));
    h = mix(h ^ run);
    h = mix(h ^ node);
    return h;
}

}  // namespace mtdiff
