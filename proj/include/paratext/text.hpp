#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace paratext::text {

// Decode UTF-8 into codepoints; invalid sequences become U+FFFD (one per bad byte).
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(const std::vector<char32_t>& cps);
std::string encode_utf8(char32_t cp);

bool is_cjk(char32_t cp);
bool is_space(char32_t cp);
// ASCII punctuation, general punctuation, CJK symbols/punctuation, fullwidth forms.
bool is_punct(char32_t cp);

// Word segmentation for metrics: lowercase ASCII letters, split on whitespace
// and punctuation, every CJK codepoint is its own token.
std::vector<std::string> tokenize(std::string_view s);

// Strip whitespace and CJK/Latin punctuation; other codepoints pass through
// unchanged. Used before substring matching (no case folding).
std::string normalize_for_match(std::string_view s);

// Contiguous codepoint-substring test; an empty needle is contained in every
// haystack. Both arguments must be valid UTF-8; on normalized strings a
// byte-level search is codepoint-exact.
bool contains_codepoints(std::string_view haystack, std::string_view needle);

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Longest common subsequence length over token sequences (for ROUGE-L).
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Hex SHA-256 of a byte string (cache keys, fixture determinism, digests).
std::string sha256_hex(std::string_view data);

// First 8 bytes of SHA-256 as an unsigned integer; deterministic pick helper.
std::uint64_t stable_hash(std::string_view data);

}  // namespace paratext::text
