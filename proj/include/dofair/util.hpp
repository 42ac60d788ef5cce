#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace dofair {

std::string sha256_hex(std::string_view data);

/// First 8 bytes of sha256(data) as an integer; stable across platforms,
/// used to derive per-item RNG seeds.
uint64_t stable_hash64(std::string_view data);

std::string base64_decode(std::string_view encoded);

std::string lowercase(std::string_view text);

/// Lowercased alphanumeric word tokens, for retrieval scoring.
std::vector<std::string> lexical_tokens(std::string_view text);

/// Replaces every occurrence of `slot` in `text`.
std::string replace_all(std::string text, std::string_view slot, std::string_view value);

size_t count_occurrences(std::string_view text, std::string_view needle);

/// Writes via a temp file in the same directory, then renames over the target.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Runs fn(0..n-1) on up to `workers` threads. The first exception thrown by
/// any worker is rethrown on the caller once all threads have joined.
void parallel_for_each(size_t n, int workers, const std::function<void(size_t)>& fn);

std::string format_fixed(double value, int decimals);

}  // namespace dofair
