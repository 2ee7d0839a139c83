#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cesis {

// Counter-based random stream. A stream is a (key, counter) pair; output
// block i is a strong 64-bit mix of the key and i, so any number of child
// streams can be split off a master seed and consumed in any order without
// overlap. This is what makes parallel repetitions reproducible: workers
// never share mutable generator state, they derive their own streams.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key), counter_(0) {}

    // Child stream whose key depends on this stream's key and a tag.
    // Deriving never advances this stream's counter.
    [[nodiscard]] RngStream derive(std::uint64_t tag) const;
    [[nodiscard]] RngStream derive(std::string_view tag) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller. Always consumes exactly two 64-bit
    // blocks so stream positions stay predictable.
    double normal();

    // Index j with probability weights[j]/sum(weights). Weights need not
    // be normalized; they must be nonnegative with a positive sum.
    std::size_t categorical(const std::vector<double>& weights);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace cesis
