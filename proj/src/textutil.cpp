#include "corpuskit/textutil.hpp"

namespace corpuskit {

namespace {

constexpr uint32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at text[pos]; advances pos. Malformed
// sequences consume a single byte and yield U+FFFD.
uint32_t decode_one(std::string_view text, size_t& pos) {
    unsigned char b0 = static_cast<unsigned char>(text[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    size_t need = 0;
    uint32_t cp = 0;
    uint32_t min_cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        need = 1;
        cp = b0 & 0x1F;
        min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        need = 2;
        cp = b0 & 0x0F;
        min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        need = 3;
        cp = b0 & 0x07;
        min_cp = 0x10000;
    } else {
        ++pos;
        return kReplacement;
    }
    if (pos + need >= text.size()) {
        ++pos;
        return kReplacement;
    }
    for (size_t i = 1; i <= need; ++i) {
        unsigned char bi = static_cast<unsigned char>(text[pos + i]);
        if ((bi & 0xC0) != 0x80) {
            ++pos;
            return kReplacement;
        }
        cp = (cp << 6) | (bi & 0x3F);
    }
    if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kReplacement;
    }
    pos += need + 1;
    return cp;
}

}  // namespace

std::vector<uint32_t> decode_utf8(std::string_view text) {
    std::vector<uint32_t> out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) out.push_back(decode_one(text, pos));
    return out;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

size_t codepoint_count(std::string_view text) {
    size_t count = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        decode_one(text, pos);
        ++count;
    }
    return count;
}

bool is_unicode_space(uint32_t cp) {
    switch (cp) {
        case 0x09:
        case 0x0A:
        case 0x0B:
        case 0x0C:
        case 0x0D:
        case 0x20:
        case 0x85:
        case 0xA0:
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    size_t pos = 0;
    size_t word_start = 0;
    bool in_word = false;
    while (pos < text.size()) {
        size_t cp_start = pos;
        uint32_t cp = decode_one(text, pos);
        if (is_unicode_space(cp)) {
            if (in_word) {
                words.push_back(text.substr(word_start, cp_start - word_start));
                in_word = false;
            }
        } else if (!in_word) {
            word_start = cp_start;
            in_word = true;
        }
    }
    if (in_word) words.push_back(text.substr(word_start));
    return words;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            size_t end = i;
            if (end > start && text[end - 1] == '\r') --end;
            lines.push_back(text.substr(start, end - start));
            start = i + 1;
        }
    }
    if (start < text.size()) {
        size_t end = text.size();
        if (end > start && text[end - 1] == '\r') --end;
        lines.push_back(text.substr(start, end - start));
    }
    return lines;
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string normalize_for_shingling(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t cp_start = pos;
        uint32_t cp = decode_one(text, pos);
        if (is_unicode_space(cp)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        if (cp < 0x80 && cp >= 'A' && cp <= 'Z') {
            out.push_back(static_cast<char>(cp - 'A' + 'a'));
        } else {
            out.append(text.substr(cp_start, pos - cp_start));
        }
    }
    return out;
}

std::vector<std::string> char_ngrams(std::string_view text, size_t n) {
    std::vector<std::string> grams;
    if (n == 0) return grams;
    // Byte offsets of each codepoint boundary, plus the end sentinel.
    std::vector<size_t> bounds;
    bounds.reserve(text.size() + 1);
    size_t pos = 0;
    while (pos < text.size()) {
        bounds.push_back(pos);
        decode_one(text, pos);
    }
    bounds.push_back(text.size());
    size_t cp_count = bounds.size() - 1;
    if (cp_count < n) return grams;
    grams.reserve(cp_count - n + 1);
    for (size_t i = 0; i + n <= cp_count; ++i) {
        grams.emplace_back(text.substr(bounds[i], bounds[i + n] - bounds[i]));
    }
    return grams;
}

bool ends_with_terminal_punct(std::string_view line) {
    auto cps = decode_utf8(line);
    for (auto it = cps.rbegin(); it != cps.rend(); ++it) {
        if (is_unicode_space(*it)) continue;
        return *it == '.' || *it == '!' || *it == '?' || *it == 0x0964;
    }
    return false;
}

bool is_devanagari_combining_mark(uint32_t cp) {
    // Non-spacing marks only; spacing matras like U+093E still count
    // toward word length because they occupy visual width.
    if (cp >= 0x0900 && cp <= 0x0902) return true;       // candrabindu, anusvara
    if (cp == 0x093C) return true;                       // nukta
    if (cp >= 0x0941 && cp <= 0x0948) return true;       // u/uu/vocalic/e vowel signs
    if (cp == 0x094D) return true;                       // virama
    if (cp >= 0x0951 && cp <= 0x0957) return true;       // stress and cantillation
    if (cp == 0x0962 || cp == 0x0963) return true;       // vocalic l signs
    return false;
}

size_t word_length(std::string_view word) {
    size_t count = 0;
    size_t pos = 0;
    while (pos < word.size()) {
        uint32_t cp = decode_one(word, pos);
        if (!is_devanagari_combining_mark(cp)) ++count;
    }
    return count;
}

}  // namespace corpuskit
