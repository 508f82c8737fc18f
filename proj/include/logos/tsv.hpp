#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "logos/align.hpp"
#include "logos/error.hpp"
#include "logos/eval.hpp"
#include "logos/text.hpp"
#include "logos/train.hpp"

namespace logos {

/// Fixed decimal rendering used in every text artifact, so identical runs
/// produce identical bytes.
inline std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace detail {

inline void check_field(std::string_view field, const std::string& what) {
    if (field.find_first_of("\t\n\r") != std::string_view::npos)
        throw data_error(what + ": field contains a tab or newline");
}

inline std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            return fields;
        }
        fields.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw io_error(where + ": not a number: " + s);
    }
}

inline long parse_long(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw io_error(where + ": not an integer: " + s);
    }
}

/// Reads a TSV file, checks the exact header, returns the data rows split
/// into fields (each row must have exactly as many fields as the header).
inline std::vector<std::vector<std::string>> read_tsv(const std::string& path, std::string_view header) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) return {};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw io_error(path + ": expected header \"" + std::string(header) + "\", got \"" + line + "\"");
    const std::size_t n_fields = split_tabs(header).size();
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != n_fields)
            throw io_error(path + " line " + std::to_string(line_no) + ": expected " +
                           std::to_string(n_fields) + " fields, got " + std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    return f;
}

inline void finish_out(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw io_error("write failed: " + path);
}

} // namespace detail

// ---- sentences -------------------------------------------------------------

inline constexpr std::string_view kSentencesHeader = "doc_id\tindex\tlanguage\ttext";

inline void write_sentences_tsv(const std::string& path, const std::vector<Sentence>& sentences) {
    std::ofstream f = detail::open_out(path);
    f << kSentencesHeader << '\n';
    for (const Sentence& s : sentences) {
        detail::check_field(s.doc_id, "sentence doc_id");
        detail::check_field(s.text, "sentence text");
        f << s.doc_id << '\t' << s.index << '\t' << language_name(s.language) << '\t' << s.text << '\n';
    }
    detail::finish_out(f, path);
}

inline std::vector<Sentence> read_sentences_tsv(const std::string& path) {
    std::vector<Sentence> out;
    for (const auto& row : detail::read_tsv(path, kSentencesHeader)) {
        Sentence s;
        s.doc_id = row[0];
        s.index = static_cast<int>(detail::parse_long(row[1], path));
        s.language = parse_language(row[2]);
        s.text = row[3];
        out.push_back(std::move(s));
    }
    return out;
}

// ---- section sidecars ------------------------------------------------------

/// One nonnegative integer per line (byte offsets for raw documents,
/// sentence start indices for segmented output).
inline std::vector<std::size_t> read_section_lines(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    std::vector<std::size_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const long v = detail::parse_long(line, path + " line " + std::to_string(line_no));
        if (v < 0) throw io_error(path + " line " + std::to_string(line_no) + ": negative offset");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

inline void write_section_lines(const std::string& path, const std::vector<std::size_t>& values) {
    std::ofstream f = detail::open_out(path);
    for (std::size_t v : values) f << v << '\n';
    detail::finish_out(f, path);
}

// ---- parallel pairs ---------------------------------------------------------

inline constexpr std::string_view kPairsHeader = "source\ttarget\tscore";

inline void write_pairs_tsv(const std::string& path, const std::vector<ParallelPair>& pairs) {
    std::ofstream f = detail::open_out(path);
    f << kPairsHeader << '\n';
    for (const ParallelPair& p : pairs) {
        detail::check_field(p.source, "pair source");
        detail::check_field(p.target, "pair target");
        f << p.source << '\t' << p.target << '\t' << format_float(p.score) << '\n';
    }
    detail::finish_out(f, path);
}

inline std::vector<ParallelPair> read_pairs_tsv(const std::string& path) {
    std::vector<ParallelPair> out;
    for (const auto& row : detail::read_tsv(path, kPairsHeader))
        out.push_back({row[0], row[1], detail::parse_double(row[2], path)});
    return out;
}

// ---- alignment links --------------------------------------------------------

inline constexpr std::string_view kAlignmentHeader = "src_doc\tsrc_indices\ttgt_doc\ttgt_indices\tscore";

namespace detail {

inline std::string join_indices(const std::vector<int>& idx) {
    std::string out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(idx[i]);
    }
    return out;
}

inline std::vector<int> split_indices(const std::string& s, const std::string& where) {
    std::vector<int> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        const std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back(static_cast<int>(parse_long(part, where)));
        if (comma == std::string::npos) return out;
        start = comma + 1;
    }
}

} // namespace detail

inline void write_alignment_tsv(const std::string& path, const std::vector<AlignmentLink>& links,
                                const std::string& src_doc, const std::string& tgt_doc) {
    std::ofstream f = detail::open_out(path);
    f << kAlignmentHeader << '\n';
    for (const AlignmentLink& l : links) {
        f << src_doc << '\t' << detail::join_indices(l.src_indices) << '\t' << tgt_doc << '\t'
          << detail::join_indices(l.tgt_indices) << '\t' << format_float(l.score) << '\n';
    }
    detail::finish_out(f, path);
}

inline std::vector<AlignmentLink> read_alignment_tsv(const std::string& path) {
    std::vector<AlignmentLink> out;
    for (const auto& row : detail::read_tsv(path, kAlignmentHeader)) {
        AlignmentLink l;
        l.src_indices = detail::split_indices(row[1], path);
        l.tgt_indices = detail::split_indices(row[3], path);
        l.score = detail::parse_double(row[4], path);
        if (l.src_indices.empty() && l.tgt_indices.empty())
            throw io_error(path + ": link with both sides empty");
        out.push_back(std::move(l));
    }
    return out;
}

// ---- STS dataset ------------------------------------------------------------

inline constexpr std::string_view kStsHeader = "a_grc\ta_en\tb_grc\tb_en\tgold";

inline std::vector<StsItem> read_sts_tsv(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw io_error("cannot open: " + path);
    std::string first;
    std::getline(probe, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    {
        const std::vector<std::string> cols = detail::split_tabs(first);
        const std::vector<std::string> want = detail::split_tabs(kStsHeader);
        for (const std::string& w : want) {
            if (std::find(cols.begin(), cols.end(), w) == cols.end())
                throw io_error(path + ": missing column \"" + w + "\"");
        }
    }
    std::vector<StsItem> out;
    for (const auto& row : detail::read_tsv(path, kStsHeader)) {
        StsItem it;
        it.a_grc = row[0];
        it.a_en = row[1];
        it.b_grc = row[2];
        it.b_en = row[3];
        it.gold = detail::parse_double(row[4], path);
        out.push_back(std::move(it));
    }
    return out;
}

inline void write_sts_tsv(const std::string& path, const std::vector<StsItem>& items) {
    std::ofstream f = detail::open_out(path);
    f << kStsHeader << '\n';
    for (const StsItem& it : items) {
        for (const std::string* t : {&it.a_grc, &it.a_en, &it.b_grc, &it.b_en}) detail::check_field(*t, "sts text");
        f << it.a_grc << '\t' << it.a_en << '\t' << it.b_grc << '\t' << it.b_en << '\t' << format_float(it.gold)
          << '\n';
    }
    detail::finish_out(f, path);
}

// ---- retrieval dataset --------------------------------------------------------

inline constexpr std::string_view kPassagesHeader = "id\ttext";
inline constexpr std::string_view kQueriesHeader = "query\trelevant_ids";

struct RetrievalQuery {
    std::string query_text;
    std::unordered_set<std::string> relevant_ids;
};

inline std::vector<std::pair<std::string, std::string>> read_passages_tsv(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& row : detail::read_tsv(path, kPassagesHeader)) out.emplace_back(row[0], row[1]);
    return out;
}

inline void write_passages_tsv(const std::string& path,
                               const std::vector<std::pair<std::string, std::string>>& passages) {
    std::ofstream f = detail::open_out(path);
    f << kPassagesHeader << '\n';
    for (const auto& [id, text] : passages) {
        detail::check_field(id, "passage id");
        detail::check_field(text, "passage text");
        f << id << '\t' << text << '\n';
    }
    detail::finish_out(f, path);
}

inline std::vector<RetrievalQuery> read_queries_tsv(const std::string& path) {
    std::vector<RetrievalQuery> out;
    for (const auto& row : detail::read_tsv(path, kQueriesHeader)) {
        RetrievalQuery q;
        q.query_text = row[0];
        std::size_t start = 0;
        const std::string& ids = row[1];
        while (start <= ids.size() && !ids.empty()) {
            const std::size_t comma = ids.find(',', start);
            const std::string id =
                ids.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!id.empty()) q.relevant_ids.insert(id);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (q.relevant_ids.empty()) throw io_error(path + ": query with no relevant ids: " + q.query_text);
        out.push_back(std::move(q));
    }
    return out;
}

inline void write_queries_tsv(const std::string& path, const std::vector<RetrievalQuery>& queries) {
    std::ofstream f = detail::open_out(path);
    f << kQueriesHeader << '\n';
    for (const RetrievalQuery& q : queries) {
        detail::check_field(q.query_text, "query text");
        std::vector<std::string> ids(q.relevant_ids.begin(), q.relevant_ids.end());
        std::sort(ids.begin(), ids.end());
        std::string joined;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i > 0) joined += ',';
            joined += ids[i];
        }
        f << q.query_text << '\t' << joined << '\n';
    }
    detail::finish_out(f, path);
}

// ---- verse-per-line files ----------------------------------------------------

inline std::vector<std::string> read_verse_lines(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(line);
    }
    return out;
}

inline void write_verse_lines(const std::string& path, const std::vector<std::string>& verses) {
    std::ofstream f = detail::open_out(path);
    for (const std::string& v : verses) {
        detail::check_field(v, "verse");
        f << v << '\n';
    }
    detail::finish_out(f, path);
}

// ---- bilingual dictionary -----------------------------------------------------

inline constexpr std::string_view kDictionaryHeader = "source\ttarget";

inline BilingualDictionary read_dictionary_tsv(const std::string& path) {
    BilingualDictionary dict;
    for (const auto& row : detail::read_tsv(path, kDictionaryHeader)) dict.add(row[0], row[1]);
    return dict;
}

inline void write_dictionary_tsv(const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream f = detail::open_out(path);
    f << kDictionaryHeader << '\n';
    for (const auto& [s, t] : entries) {
        detail::check_field(s, "dictionary source");
        detail::check_field(t, "dictionary target");
        f << s << '\t' << t << '\n';
    }
    detail::finish_out(f, path);
}

// ---- training log --------------------------------------------------------------

inline constexpr std::string_view kTrainLogHeader =
    "step\tepoch\tloss\tlr\tholdout_mse\tholdout_acc\tsts_rho\tcomposite";

inline void write_train_log(std::ostream& os, const std::vector<TrainLogRow>& rows, bool with_header = true) {
    auto opt = [](const std::optional<double>& v) { return v ? format_float(*v) : std::string("-"); };
    if (with_header) os << kTrainLogHeader << '\n';
    for (const TrainLogRow& r : rows) {
        os << r.step << '\t' << r.epoch << '\t' << opt(r.loss) << '\t' << format_float(r.lr) << '\t'
           << opt(r.holdout_mse) << '\t' << opt(r.holdout_acc) << '\t' << opt(r.sts_rho) << '\t'
           << opt(r.composite) << '\n';
    }
}

// ---- evaluation reports ----------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["model_id"] = report.model_id;
    j["dataset_hash"] = report.dataset_hash;
    j["timestamp"] = report.timestamp;
    nlohmann::ordered_json values;
    for (const auto& [name, value] : report.values) {
        if (!std::isfinite(value)) throw data_error("report value not finite: " + name);
        values[name] = value;
    }
    j["values"] = values;
    return j;
}

inline void write_report_json(const std::string& path, const EvalReport& report) {
    std::ofstream f = detail::open_out(path);
    f << report_to_json(report).dump(2) << '\n';
    detail::finish_out(f, path);
}

} // namespace logos
