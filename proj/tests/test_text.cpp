#include <catch2/catch_amalgamated.hpp>

#include "logos/text.hpp"

using namespace logos;

// U+0387 GREEK ANO TELEIA, U+00B7 MIDDLE DOT, U+037E GREEK QUESTION MARK.
#define ANO_TELEIA "\xCE\x87"
#define MIDDLE_DOT "\xC2\xB7"
#define GREEK_QMARK "\xCD\xBE"

TEST_CASE("codepoint_count counts codepoints, not bytes", "[text]") {
    CHECK(codepoint_count("") == 0);
    CHECK(codepoint_count("abc") == 3);
    CHECK(codepoint_count("αβγ") == 3);
    CHECK(codepoint_count("aβc") == 3);
    CHECK(codepoint_count(MIDDLE_DOT) == 1);
}

TEST_CASE("collapse_whitespace trims and squeezes all Unicode spaces", "[text]") {
    CHECK(collapse_whitespace("") == "");
    CHECK(collapse_whitespace("   ") == "");
    CHECK(collapse_whitespace("a  b") == "a b");
    CHECK(collapse_whitespace("  a\t\nb  ") == "a b");
    CHECK(collapse_whitespace("α \r\n β") == "α β");
    // U+00A0 no-break space has White_Space=Yes
    CHECK(collapse_whitespace("a\xC2\xA0\x62") == "a b");
}

TEST_CASE("normalize_greek strips diacritics and lowercases", "[text]") {
    CHECK(normalize_greek("Σωκράτης") == "σωκρατης");
    CHECK(normalize_greek("ἐστὶ") == "εστι");
    CHECK(normalize_greek("φιλόσοφος") == "φιλοσοφος");
    CHECK(normalize_greek("προΐστημι") == "προιστημι");
    CHECK(normalize_greek("ὁ βίος   βραχύς") == "ο βιος βραχυς");
}

TEST_CASE("normalize_greek applies the final-sigma rule", "[text]") {
    CHECK(normalize_greek("ΖΕΥΣ.") == "ζευς.");
    CHECK(normalize_greek("ΖΕΥΣ ΕΣΤΙ ΘΕΟΣ.") == "ζευς εστι θεος.");
}

TEST_CASE("normalize_greek canonicalizes Greek punctuation", "[text]") {
    // NFD maps ano teleia to middle dot and Greek question mark to semicolon.
    CHECK(normalize_greek("α" ANO_TELEIA) == "α" MIDDLE_DOT);
    CHECK(normalize_greek("τίς" GREEK_QMARK) == "τις;");
}

TEST_CASE("normalize_greek is idempotent and total", "[text]") {
    const std::vector<std::string> samples = {"", "Σωκράτης ἐστὶ ΣΟΦΟΣ.", "abc DEF", "  mixed Ελληνικά  "};
    for (const std::string& s : samples) {
        const std::string once = normalize_greek(s);
        CHECK(normalize_greek(once) == once);
    }
}

TEST_CASE("segment_greek splits at terminators and keeps them attached", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_greek("α. β" MIDDLE_DOT " γ; δ", cfg, "d");
    REQUIRE(segs.size() == 4);
    CHECK(segs[0].text == "α.");
    CHECK(segs[1].text == "β" MIDDLE_DOT);
    CHECK(segs[2].text == "γ;");
    CHECK(segs[3].text == "δ");
    for (int i = 0; i < 4; ++i) {
        CHECK(segs[static_cast<std::size_t>(i)].index == i);
        CHECK(segs[static_cast<std::size_t>(i)].doc_id == "d");
    }
}

TEST_CASE("segment_greek accepts unnormalized terminator forms", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_greek("α" GREEK_QMARK " β" ANO_TELEIA " γ", cfg);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].text == "α" GREEK_QMARK);
    CHECK(segs[1].text == "β" ANO_TELEIA);
    CHECK(segs[2].text == "γ");
}

TEST_CASE("segment_greek colon mode", "[text]") {
    SegmentationConfig cfg;
    CHECK(segment_greek("α: β", cfg).size() == 1);
    cfg.colon_as_raised_dot = true;
    const auto segs = segment_greek("α: β", cfg);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].text == "α:");
    CHECK(segs[1].text == "β");
}

TEST_CASE("segment_greek edge cases", "[text]") {
    SegmentationConfig cfg;
    CHECK(segment_greek("", cfg).empty());
    CHECK(segment_greek("   ", cfg).empty());
    // terminator-only runs produce no empty segments
    const auto segs = segment_greek("α.. β.", cfg);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].text == "α.");
    CHECK(segs[1].text == ".");
    CHECK(segs[2].text == "β.");
}

TEST_CASE("segment_english splits on terminator + space + capital", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_english("One sentence. Another one! A third? yes, still third.", cfg);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].text == "One sentence.");
    CHECK(segs[1].text == "Another one!");
    CHECK(segs[2].text == "A third? yes, still third.");
}

TEST_CASE("segment_english suppresses abbreviation splits", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_english("Dr. Smith met Mr. Jones. They talked.", cfg);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].text == "Dr. Smith met Mr. Jones.");
    CHECK(segs[1].text == "They talked.");
}

TEST_CASE("segment_english treats opening characters as sentence starts", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_english("He left. \"Stay,\" she said.", cfg);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].text == "He left.");
    CHECK(segs[1].text == "\"Stay,\" she said.");
}

TEST_CASE("segment_english subdivides at semicolons and colons", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_english("First part; second part: third part. Done.", cfg);
    REQUIRE(segs.size() == 4);
    CHECK(segs[0].text == "First part;");
    CHECK(segs[1].text == "second part:");
    CHECK(segs[2].text == "third part.");
    CHECK(segs[3].text == "Done.");
}

TEST_CASE("segment_english collapses internal whitespace", "[text]") {
    SegmentationConfig cfg;
    const auto segs = segment_english("Spread  over\nlines. Next one.", cfg);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].text == "Spread over lines.");
    CHECK(segs[1].text == "Next one.");
}

TEST_CASE("segment_english rejects empty abbreviation entries", "[text]") {
    SegmentationConfig cfg;
    cfg.english_abbreviations.push_back("");
    CHECK_THROWS_AS(segment_english("x. Y", cfg), data_error);
}

TEST_CASE("dedup_and_filter removes duplicates and short pairs", "[text]") {
    std::vector<ParallelPair> pairs = {
        {"abcdef", "uvwxyz", 1.0}, {"abcdef", "uvwxyz", 0.5}, {"ab", "uvwxyz", 1.0},
        {"abcdef", "uv", 1.0},     {"second", "paired", 0.9},
    };
    const auto out = dedup_and_filter(pairs, 5);
    REQUIRE(out.size() == 2);
    CHECK(out[0].source == "abcdef");
    CHECK(out[0].score == 1.0); // first occurrence wins
    CHECK(out[1].source == "second");
    CHECK_THROWS_AS(dedup_and_filter(pairs, -1), data_error);
}

TEST_CASE("dedup_and_filter measures codepoints", "[text]") {
    std::vector<ParallelPair> pairs = {{"αβγδε", "abcde", 1.0}};
    CHECK(dedup_and_filter(pairs, 5).size() == 1);
    CHECK(dedup_and_filter(pairs, 6).empty());
}

TEST_CASE("parse_language accepts known tags only", "[text]") {
    CHECK(parse_language("grc") == Language::GRC);
    CHECK(parse_language("EN") == Language::EN);
    CHECK(parse_language("el") == Language::EL);
    CHECK_THROWS_AS(parse_language("fr"), data_error);
    CHECK(language_name(Language::EL) == "el");
}

TEST_CASE("validate_document rejects bad section breaks", "[text]") {
    RawDocument doc;
    doc.id = "d";
    doc.text = "αβ γδ";
    doc.section_breaks = {4};
    CHECK_NOTHROW(validate_document(doc)); // the space between the words
    doc.section_breaks = {2};
    CHECK_NOTHROW(validate_document(doc)); // start of β, a codepoint boundary
    doc.section_breaks = {0};
    CHECK_THROWS_AS(validate_document(doc), data_error);
    doc.section_breaks = {doc.text.size()};
    CHECK_THROWS_AS(validate_document(doc), data_error);
    doc.section_breaks = {4, 2};
    CHECK_THROWS_AS(validate_document(doc), data_error);
    doc.section_breaks = {1}; // inside the two-byte α
    CHECK_THROWS_AS(validate_document(doc), data_error);
}

TEST_CASE("segment_document keeps section starts and contiguous indices", "[text]") {
    RawDocument doc;
    doc.id = "d";
    doc.language = Language::GRC;
    doc.text = "Α. Β. ΓΔ. Ε.";
    // break between the two halves: find the byte offset of "ΓΔ"
    doc.section_breaks = {doc.text.find("ΓΔ")};
    const SegmentedDocument seg = segment_document(doc, {});
    REQUIRE(seg.sentences.size() == 4);
    REQUIRE(seg.section_starts == std::vector<std::size_t>{0, 2});
    CHECK(seg.sentences[0].text == "α.");
    CHECK(seg.sentences[2].text == "γδ.");
    for (std::size_t i = 0; i < seg.sentences.size(); ++i)
        CHECK(seg.sentences[i].index == static_cast<int>(i));
}

TEST_CASE("segment_document handles English and no sections", "[text]") {
    RawDocument doc;
    doc.id = "e";
    doc.language = Language::EN;
    doc.text = "Hello there. Second one.";
    const SegmentedDocument seg = segment_document(doc, {});
    REQUIRE(seg.section_starts == std::vector<std::size_t>{0});
    REQUIRE(seg.sentences.size() == 2);
    CHECK(seg.sentences[1].text == "Second one.");
    CHECK(seg.sentences[1].language == Language::EN);
}
