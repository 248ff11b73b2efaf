#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rlpt::text {

// ASCII-only casefold; multibyte sequences pass through untouched.
std::string casefold(std::string_view s);

// Runs of whitespace become a single space; leading/trailing stripped.
std::string collapse_whitespace(std::string_view s);

std::string trim(std::string_view s);

std::vector<std::string> whitespace_tokens(std::string_view s);

std::size_t count_whitespace_tokens(std::string_view s);

bool is_terminal_punct(char c);  // . ! ?

// splitmix64 finalizer; also the basis for seed derivation.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the bytes, then mixed with the seed.
std::uint64_t hash_bytes(std::string_view s, std::uint64_t seed = 0);

// Deterministic seed derivation for per-worker / per-group RNG streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Uniform double in [0, 1) from the top 53 bits of a raw 64-bit draw.
double to_unit_double(std::uint64_t raw);

}  // namespace rlpt::text
