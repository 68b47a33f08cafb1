#include "textaug/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace textaug {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

Rng::Rng(std::uint64_t key) : key_(key), state_(key) {}

Rng Rng::derive(std::string_view tag) const {
    return Rng(mix64(key_ + kGamma + fnv1a64(tag)));
}

Rng Rng::derive(std::string_view tag, std::string_view id) const {
    return derive(tag).derive(id);
}

std::uint64_t Rng::next_u64() {
    state_ += kGamma;
    return mix64(state_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    using u128 = unsigned __int128;
    return static_cast<std::size_t>((u128(next_u64()) * u128(n)) >> 64);
}

double Rng::normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::choose(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("Rng::choose: k exceeds n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + below(n - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace textaug
