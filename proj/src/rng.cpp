#include "chasd/rng.hpp"

#include <cmath>
#include <numbers>

namespace chasd::rng {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

Stream Stream::keyed(std::uint64_t seed, std::string_view label) {
    return Stream(mix64(mix64(seed) ^ hash_label(label)));
}

Stream Stream::split(std::string_view label) const {
    return Stream(mix64(key_ ^ hash_label(label)));
}

Stream Stream::split(std::uint64_t index) const {
    return Stream(mix64(key_ ^ (mix64(index) + 0x9E3779B97F4A7C15ULL)));
}

std::uint64_t Stream::next_u64() {
    return mix64(key_ ^ mix64(counter_++));
}

double Stream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::next_normal() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double keyed_normal(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    Stream s = Stream::keyed(seed, label);
    const std::uint64_t base = 2 * index;
    const double u1 = 1.0 - static_cast<double>(mix64(s.key() ^ mix64(base)) >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(mix64(s.key() ^ mix64(base + 1)) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace chasd::rng
