#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace urllc {

// Every random consumer owns its own engine. Engines are seeded from the
// master seed, a component label and a tuple of indices (episode, slot, ...),
// so adding a new consumer never shifts the draws of an existing one.
using RandomStream = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::initializer_list<std::uint64_t> indices = {});

RandomStream make_stream(std::uint64_t master, std::string_view label,
                         std::initializer_list<std::uint64_t> indices = {});

// Uniform integer in [0, n). Implemented here rather than with
// std::uniform_int_distribution so draws are identical across standard libraries.
std::size_t uniform_index(RandomStream& rng, std::size_t n);

// Uniform double in [0, 1).
double uniform01(RandomStream& rng);

// Uniform double in the open interval (0, 1).
double uniform_open01(RandomStream& rng);

}  // namespace urllc
