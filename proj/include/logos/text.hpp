#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "logos/error.hpp"

namespace logos {

enum class Language { GRC, EN, EL };

inline std::string_view language_name(Language l) {
    switch (l) {
    case Language::GRC: return "grc";
    case Language::EN: return "en";
    case Language::EL: return "el";
    }
    return "grc";
}

inline Language parse_language(std::string_view s) {
    std::string lo(s);
    std::transform(lo.begin(), lo.end(), lo.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lo == "grc") return Language::GRC;
    if (lo == "en") return Language::EN;
    if (lo == "el") return Language::EL;
    throw data_error("unknown language tag: " + std::string(s));
}

/// One normalized text segment with document provenance.
struct Sentence {
    std::string doc_id;
    int index = 0; // ordinal within the document, contiguous from 0
    std::string text;
    Language language = Language::GRC;
};

/// A raw input document. section_breaks are byte offsets into `text` marking
/// section boundaries; they must be strictly increasing, inside the text and
/// on UTF-8 codepoint boundaries.
struct RawDocument {
    std::string id;
    Language language = Language::GRC;
    std::string text;
    std::vector<std::size_t> section_breaks;
};

struct SegmentationConfig {
    bool colon_as_raised_dot = false;
    std::vector<std::string> english_abbreviations = {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Jr.", "Sr.",
        "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "No.", "ch.", "p.", "pp.",
    };
};

/// An aligned source/target sentence pair.
struct ParallelPair {
    std::string source;
    std::string target;
    double score = 0.0;
};

namespace detail {

inline UChar32 next_codepoint(std::string_view s, std::size_t& i) {
    UChar32 c = U_SENTINEL;
    int32_t pos = static_cast<int32_t>(i);
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), pos, static_cast<int32_t>(s.size()), c);
    i = static_cast<std::size_t>(pos);
    return c < 0 ? 0xFFFD : c;
}

inline void append_codepoint(std::string& out, UChar32 c) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, c, err);
    if (!err) out.append(reinterpret_cast<char*>(buf), static_cast<std::size_t>(len));
}

inline const icu::Normalizer2& nfd() {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(ec);
    if (U_FAILURE(ec) || n == nullptr) throw data_error("ICU NFD normalizer unavailable");
    return *n;
}

inline const icu::Normalizer2& nfc() {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(ec);
    if (U_FAILURE(ec) || n == nullptr) throw data_error("ICU NFC normalizer unavailable");
    return *n;
}

} // namespace detail

/// Number of Unicode codepoints in a UTF-8 string. Length thresholds and
/// alignment length statistics count codepoints, not bytes, so Greek and
/// English text are measured on the same scale.
inline std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++n) detail::next_codepoint(s, i);
    return n;
}

/// Collapse every run of Unicode whitespace to a single space and trim.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (std::size_t i = 0; i < s.size();) {
        UChar32 c = detail::next_codepoint(s, i);
        if (u_isUWhiteSpace(c)) {
            pending = !out.empty();
        } else {
            if (pending) out.push_back(' ');
            pending = false;
            detail::append_codepoint(out, c);
        }
    }
    return out;
}

/// Normalize Greek text: canonical decomposition, drop all combining marks,
/// recompose, lowercase with the default (root) Unicode case mapping, then
/// collapse whitespace. Punctuation is preserved; note that canonical
/// decomposition maps ano teleia (U+0387) to middle dot (U+00B7) and the
/// Greek question mark (U+037E) to a semicolon. Idempotent and total.
inline std::string normalize_greek(std::string_view text) {
    if (text.empty()) return {};
    UErrorCode ec = U_ZERO_ERROR;
    icu::UnicodeString us =
        icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString dec = detail::nfd().normalize(us, ec);
    if (U_FAILURE(ec)) throw data_error("unicode normalization failed");
    icu::UnicodeString base;
    for (int32_t i = 0; i < dec.length();) {
        UChar32 c = dec.char32At(i);
        if (u_charType(c) != U_NON_SPACING_MARK) base.append(c);
        i += U16_LENGTH(c);
    }
    icu::UnicodeString rec = detail::nfc().normalize(base, ec);
    if (U_FAILURE(ec)) throw data_error("unicode normalization failed");
    rec.toLower(icu::Locale::getRoot());
    std::string out;
    rec.toUTF8String(out);
    return collapse_whitespace(out);
}

namespace detail {

inline bool is_greek_terminator(UChar32 c, const SegmentationConfig& cfg) {
    // '.'  ';' (and U+037E, its unnormalized form)  raised dot (U+00B7, with
    // U+0387 accepted for unnormalized input)  and ':' in colon mode.
    if (c == '.' || c == ';' || c == 0x037E || c == 0x00B7 || c == 0x0387) return true;
    return cfg.colon_as_raised_dot && c == ':';
}

inline bool is_opening_char(UChar32 c) {
    switch (c) {
    case '"': case '\'': case '(': case '[': case '{':
    case 0x2018: case 0x201C: case 0x00AB:
        return true;
    default:
        return false;
    }
}

inline void flush_segment(std::string& buf, std::vector<Sentence>& out, const std::string& doc_id,
                          Language lang) {
    std::string seg = collapse_whitespace(buf);
    buf.clear();
    if (seg.empty()) return;
    out.push_back(Sentence{doc_id, static_cast<int>(out.size()), std::move(seg), lang});
}

} // namespace detail

/// Segment normalized Greek text by period, question mark (;) and raised dot,
/// plus colon when cfg.colon_as_raised_dot is set. Terminators stay attached
/// to their segment; text after the last terminator forms a final segment.
inline std::vector<Sentence> segment_greek(std::string_view text, const SegmentationConfig& cfg,
                                           const std::string& doc_id = "", Language lang = Language::GRC) {
    std::vector<Sentence> out;
    std::string buf;
    for (std::size_t i = 0; i < text.size();) {
        UChar32 c = detail::next_codepoint(text, i);
        detail::append_codepoint(buf, c);
        if (detail::is_greek_terminator(c, cfg)) detail::flush_segment(buf, out, doc_id, lang);
    }
    detail::flush_segment(buf, out, doc_id, lang);
    return out;
}

/// Segment English text. First pass: sentence boundaries at . ! ? followed by
/// whitespace and an uppercase or opening character, with the abbreviation
/// list suppressing splits at '.'. Second pass: each sentence is further
/// subdivided at ';' and ':'. Terminators stay attached; segments are
/// whitespace-collapsed.
inline std::vector<Sentence> segment_english(std::string_view text, const SegmentationConfig& cfg,
                                             const std::string& doc_id = "", Language lang = Language::EN) {
    const std::unordered_set<std::string> abbrev(cfg.english_abbreviations.begin(),
                                                 cfg.english_abbreviations.end());
    for (const std::string& a : cfg.english_abbreviations) {
        if (a.empty()) throw data_error("empty entry in english_abbreviations");
    }

    // Pass 1: sentence boundaries.
    std::vector<std::string> sentences;
    std::string cur;
    for (std::size_t i = 0; i < text.size();) {
        UChar32 c = detail::next_codepoint(text, i);
        detail::append_codepoint(cur, c);
        if (c != '.' && c != '!' && c != '?') continue;

        if (c == '.') {
            // Token ending at this dot, scanned back to the previous whitespace.
            std::size_t start = cur.find_last_of(" \t\r\n\f\v");
            std::string token = start == std::string::npos ? cur : cur.substr(start + 1);
            if (abbrev.count(token) > 0) continue;
        }

        // Boundary requires whitespace then an uppercase/opening character.
        std::size_t j = i;
        bool saw_ws = false;
        UChar32 nc = 0;
        while (j < text.size()) {
            std::size_t k = j;
            nc = detail::next_codepoint(text, k);
            if (!u_isUWhiteSpace(nc)) break;
            saw_ws = true;
            j = k;
        }
        if (saw_ws && j < text.size() && (u_isupper(nc) || detail::is_opening_char(nc))) {
            sentences.push_back(cur);
            cur.clear();
            i = j;
        }
    }
    if (!cur.empty()) sentences.push_back(cur);

    // Pass 2: subdivide at ';' and ':'. Both are single-byte codepoints, so a
    // byte scan is UTF-8 safe.
    std::vector<Sentence> out;
    std::string buf;
    for (const std::string& sent : sentences) {
        for (char ch : sent) {
            buf.push_back(ch);
            if (ch == ';' || ch == ':') detail::flush_segment(buf, out, doc_id, lang);
        }
        detail::flush_segment(buf, out, doc_id, lang);
    }
    return out;
}

/// Remove exact duplicate (source, target) pairs, keeping first occurrences,
/// and drop pairs where either side has fewer than min_chars codepoints.
inline std::vector<ParallelPair> dedup_and_filter(const std::vector<ParallelPair>& pairs, int min_chars) {
    if (min_chars < 0) throw data_error("min_chars must be >= 0");
    std::vector<ParallelPair> out;
    std::unordered_set<std::string> seen;
    out.reserve(pairs.size());
    for (const ParallelPair& p : pairs) {
        std::string key = p.source + '\x1f' + p.target;
        if (!seen.insert(std::move(key)).second) continue;
        if (codepoint_count(p.source) < static_cast<std::size_t>(min_chars)) continue;
        if (codepoint_count(p.target) < static_cast<std::size_t>(min_chars)) continue;
        out.push_back(p);
    }
    return out;
}

struct SegmentedDocument {
    std::vector<Sentence> sentences;      // global indices, contiguous from 0
    std::vector<std::size_t> section_starts; // first sentence index of each section
};

inline void validate_document(const RawDocument& doc) {
    std::size_t prev = 0;
    bool first = true;
    for (std::size_t b : doc.section_breaks) {
        if (!first && b <= prev) throw data_error("section breaks not strictly increasing in " + doc.id);
        if (b == 0 || b >= doc.text.size()) throw data_error("section break outside text in " + doc.id);
        if ((static_cast<unsigned char>(doc.text[b]) & 0xC0) == 0x80)
            throw data_error("section break splits a UTF-8 sequence in " + doc.id);
        prev = b;
        first = false;
    }
}

/// Normalize (Greek path) and segment a document section by section. Greek
/// and Modern Greek share the normalization path; English is segmented raw
/// with per-segment whitespace collapsing.
inline SegmentedDocument segment_document(const RawDocument& doc, const SegmentationConfig& cfg) {
    validate_document(doc);
    std::vector<std::string_view> sections;
    std::string_view text = doc.text;
    std::size_t pos = 0;
    for (std::size_t b : doc.section_breaks) {
        sections.push_back(text.substr(pos, b - pos));
        pos = b;
    }
    sections.push_back(text.substr(pos));

    SegmentedDocument result;
    for (std::string_view sec : sections) {
        result.section_starts.push_back(result.sentences.size());
        std::vector<Sentence> segs;
        if (doc.language == Language::EN) {
            segs = segment_english(sec, cfg, doc.id);
        } else {
            segs = segment_greek(normalize_greek(sec), cfg, doc.id, doc.language);
        }
        for (Sentence& s : segs) {
            s.index = static_cast<int>(result.sentences.size());
            result.sentences.push_back(std::move(s));
        }
    }
    return result;
}

} // namespace logos
