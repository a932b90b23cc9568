#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

// UTF-8 helpers shared by the filtering, dedup, and tokenizer-metric code.
// Decoding is tolerant: malformed byte sequences decode as U+FFFD one byte
// at a time so downstream counts stay stable on dirty web text.

std::vector<uint32_t> decode_utf8(std::string_view text);
void append_utf8(std::string& out, uint32_t cp);
size_t codepoint_count(std::string_view text);

bool is_unicode_space(uint32_t cp);

// Splits on runs of Unicode whitespace; never returns empty tokens.
std::vector<std::string_view> split_words(std::string_view text);

// Splits on '\n' ('\r\n' tolerated); trailing newline yields no extra line.
std::vector<std::string_view> split_lines(std::string_view text);

std::string to_lower_ascii(std::string_view text);

// Collapses whitespace runs to single spaces, trims, lowercases ASCII.
std::string normalize_for_shingling(std::string_view text);

// Consecutive n-codepoint windows; empty when the text is shorter than n.
std::vector<std::string> char_ngrams(std::string_view text, size_t n);

// True when the line's last non-whitespace codepoint is one of . ! ? or
// the Devanagari danda U+0964.
bool ends_with_terminal_punct(std::string_view line);

// Devanagari combining marks (vowel signs, virama, nukta, stress marks,
// and the dependent vocalic signs) that should not add to word length.
bool is_devanagari_combining_mark(uint32_t cp);

// Codepoint count excluding combining marks, so Hindi words measure by
// their visible base characters.
size_t word_length(std::string_view word);

}  // namespace corpuskit
