#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace textaug {

// FNV-1a 64-bit hash, used to fold string tags into RNG keys and to
// derive response-cache filenames.
std::uint64_t fnv1a64(std::string_view data);

// Deterministic counter-based generator (SplitMix64): the state advances
// by a fixed gamma and each output is a finalizer hash of the state, so
// the k-th draw of a stream is a pure function of (key, k). Streams for
// sub-tasks are derived from the parent key and a tag, never from the
// stream position, which keeps per-sample augmentation reproducible
// regardless of batch order. Integer paths use no libm and are
// platform-independent.
class Rng {
public:
    explicit Rng(std::uint64_t key);

    // Child stream keyed by (key, tag). Independent of draws made so far.
    Rng derive(std::string_view tag) const;
    Rng derive(std::string_view tag, std::string_view id) const;

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit mantissa.
    double next_double();

    // Uniform in [0, n). Multiply-shift bounding; bias is < n / 2^64.
    std::size_t below(std::size_t n);

    // Standard normal via Box-Muller.
    double normal();

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

    // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> choose(std::size_t n, std::size_t k);

private:
    std::uint64_t key_;
    std::uint64_t state_;
};

}  // namespace textaug
