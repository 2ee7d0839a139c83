#include "cesis/rng.hpp"

#include <cmath>

#include "cesis/error.hpp"

namespace cesis {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// FNV-1a, used only to turn tag strings into 64-bit tags.
std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

RngStream RngStream::derive(std::uint64_t tag) const {
    // Two mixing rounds so that related (key, tag) pairs decorrelate.
    return RngStream(mix64(key_ + kGolden + mix64(tag * kGolden + 0x632be59bd9b4e019ULL)));
}

RngStream RngStream::derive(std::string_view tag) const { return derive(fnv1a(tag)); }

std::uint64_t RngStream::next_u64() { return mix64(key_ + (++counter_) * kGolden); }

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // uniform() is in [0,1); flip to (0,1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::size_t RngStream::categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw InputError("categorical: weights must be finite and nonnegative");
        total += w;
    }
    if (total <= 0.0) throw InputError("categorical: weight sum must be positive");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
        acc += weights[j];
        if (u < acc) return j;
    }
    return weights.size() - 1;
}

}  // namespace cesis
