#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mtxls {

namespace detail {

// Decodes one UTF-8 code point starting at `pos`; malformed bytes decode as
// U+FFFD and advance by one so tokenization never throws.
inline char32_t decode_utf8(const std::string& text, std::size_t& pos) {
    const auto byte = [&](std::size_t i) {
        return static_cast<unsigned char>(text[i]);
    };
    const unsigned char lead = byte(pos);
    std::size_t len = 1;
    char32_t cp = 0xFFFD;
    if (lead < 0x80) {
        cp = lead;
    } else if ((lead >> 5) == 0x6) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead >> 4) == 0xE) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead >> 3) == 0x1E) {
        len = 4;
        cp = lead & 0x07;
    } else {
        ++pos;
        return 0xFFFD;
    }
    if (len > 1) {
        if (pos + len > text.size()) {
            ++pos;
            return 0xFFFD;
        }
        for (std::size_t i = 1; i < len; ++i) {
            if ((byte(pos + i) & 0xC0) != 0x80) {
                ++pos;
                return 0xFFFD;
            }
            cp = (cp << 6) | (byte(pos + i) & 0x3F);
        }
    }
    pos += len;
    return cp;
}

inline void encode_utf8(char32_t cp, std::string& out) {
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

// Case folding for ASCII, Latin-1 supplement, and Cyrillic; other scripts
// pass through unchanged.
inline char32_t fold_case(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp == 0x401) return 0x451;
    return cp;
}

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U' ':
        case U'\t':
        case U'\n':
        case U'\r':
        case U'\f':
        case U'\v':
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
            return (cp >= 0x2000 && cp <= 0x200A);
    }
}

inline bool is_punct_cp(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    }
    if (cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 || cp == 0xB7 ||
        cp == 0xBB || cp == 0xBF || cp == 0xD7)
        return true;
    if (cp >= 0x2010 && cp <= 0x2027) return true;   // dashes, quotes, daggers
    if (cp >= 0x2030 && cp <= 0x205E) return true;   // permille through misc
    if (cp >= 0x3001 && cp <= 0x303F) return true;   // CJK punctuation
    if (cp >= 0xFE50 && cp <= 0xFE6F) return true;   // small form variants
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;   // fullwidth ASCII punct
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    return false;
}

}  // namespace detail

inline const std::set<std::string>& default_non_segmenting_languages() {
    static const std::set<std::string> langs = {"zh"};
    return langs;
}

// Lowercased word tokens split on whitespace and punctuation; for languages
// in the non-segmenting set every remaining code point is its own token.
// Punctuation and whitespace never appear in tokens.
inline std::vector<std::string> rouge_tokenize(
    const std::string& text, const std::string& language,
    const std::set<std::string>& non_segmenting = default_non_segmenting_languages()) {
    const bool per_character = non_segmenting.count(language) != 0;
    std::vector<std::string> tokens;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = detail::decode_utf8(text, pos);
        if (detail::is_space_cp(cp) || detail::is_punct_cp(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        const char32_t folded = detail::fold_case(cp);
        if (per_character) {
            std::string single;
            detail::encode_utf8(folded, single);
            tokens.push_back(std::move(single));
        } else {
            detail::encode_utf8(folded, current);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// ROUGE-2 F1 over bigram multisets: overlap clips each bigram count at the
// minimum of the two sides; returns 0 when either side has no bigrams.
inline double rouge2_f1(
    const std::string& candidate, const std::string& reference,
    const std::string& language,
    const std::set<std::string>& non_segmenting = default_non_segmenting_languages()) {
    const auto cand_tokens = rouge_tokenize(candidate, language, non_segmenting);
    const auto ref_tokens = rouge_tokenize(reference, language, non_segmenting);
    if (cand_tokens.size() < 2 || ref_tokens.size() < 2) return 0.0;

    const auto bigram_counts = [](const std::vector<std::string>& tokens) {
        std::map<std::pair<std::string, std::string>, std::size_t> counts;
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            ++counts[{tokens[i], tokens[i + 1]}];
        }
        return counts;
    };
    const auto cand_bigrams = bigram_counts(cand_tokens);
    const auto ref_bigrams = bigram_counts(ref_tokens);

    std::size_t overlap = 0;
    for (const auto& [bigram, count] : cand_bigrams) {
        const auto it = ref_bigrams.find(bigram);
        if (it != ref_bigrams.end()) {
            overlap += std::min(count, it->second);
        }
    }
    if (overlap == 0) return 0.0;
    const double precision =
        static_cast<double>(overlap) / static_cast<double>(cand_tokens.size() - 1);
    const double recall =
        static_cast<double>(overlap) / static_cast<double>(ref_tokens.size() - 1);
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace mtxls
