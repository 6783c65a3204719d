#pragma once

#include <cstdint>
#include <random>

namespace mtdiff {

using Rng = std::mt19937_64;

/// Stream purposes, mixed into the substream key so that independent uses of
/// the same (seed, run, node) never share a stream.
enum class StreamTag : std::uint64_t {
    Data = 1,
    Topology = 2,
    Clustering = 3,
};

/// Stateless key derivation: a counter-based split of the master seed. The
/// resulting engine depends only on its arguments, never on how many other
/// streams were created before it.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t run, std::uint64_t node,
                             StreamTag tag = StreamTag::Data);

inline Rng make_stream(std::uint64_t master, std::uint64_t run, std::uint64_t node,
                       StreamTag tag = StreamTag::Data) {
    return Rng(substream_seed(master, run, node, tag));
}

}  // namespace mtdiff
