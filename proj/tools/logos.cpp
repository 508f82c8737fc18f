// Command-line front end: segment -> align -> build-pairs -> train -> eval ->
// search, driven by a JSON config with per-flag overrides (flags win).
// Exit codes: 0 success, 1 data invariant violation, 2 I/O or config error.
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "logos/logos.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TeacherSpec {
    std::string type = "hash-bag"; // or "checkpoint"
    int dim = 64;
    std::uint64_t seed = 7;
    std::string path;
};

struct Phase {
    std::string pairs_path;
    int epochs = 1;
};

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    logos::SegmentationConfig segmentation;
    logos::AlignConfig align;
    logos::TrainConfig train;
    int d_in = 64;
    int d_out = 64;
    int vocab_size = 10000;
    int oov_buckets = 64;
    std::size_t holdout_pairs = 5000;
    TeacherSpec teacher;
    std::vector<Phase> phases;
    std::string sts_path;
    bool allow_sts_overlap = false;
    std::vector<std::size_t> retrieval_k = {1, 5, 10};
    std::size_t min_pair_chars = 5;
    std::size_t min_pair_chars_el = 10;
    std::string config_hash = "0000000000000000";
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw logos::io_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    if (!f && !f.eof()) throw logos::io_error("read failed: " + path);
    return ss.str();
}

std::string file_hash(const std::string& path) { return hex64(logos::fnv1a64(read_file(path))); }

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

PipelineConfig load_config(const std::string& path) {
    PipelineConfig cfg;
    json j = json::object();
    if (!path.empty()) {
        json parsed;
        try {
            parsed = json::parse(read_file(path));
        } catch (const json::exception& e) {
            throw logos::io_error("config " + path + ": " + e.what());
        }
        if (!parsed.is_object()) throw logos::io_error("config " + path + ": top level must be an object");
        j = std::move(parsed);
    }
    try {
        get_if_present(j, "seed", cfg.seed);
        get_if_present(j, "out_dir", cfg.out_dir);
        if (j.contains("segmentation")) {
            const json& s = j.at("segmentation");
            get_if_present(s, "colon_as_raised_dot", cfg.segmentation.colon_as_raised_dot);
            get_if_present(s, "english_abbreviations", cfg.segmentation.english_abbreviations);
        }
        if (j.contains("align")) {
            const json& a = j.at("align");
            get_if_present(a, "max_bead", cfg.align.max_bead);
            get_if_present(a, "score_threshold", cfg.align.score_threshold);
            get_if_present(a, "dict_weight", cfg.align.dict_weight);
            get_if_present(a, "gap_penalty", cfg.align.gap_penalty);
            get_if_present(a, "anchor_threshold", cfg.align.anchor_threshold);
            get_if_present(a, "gc_mean_ratio", cfg.align.gc_mean_ratio);
            get_if_present(a, "gc_variance", cfg.align.gc_variance);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            get_if_present(t, "batch_size", cfg.train.batch_size);
            get_if_present(t, "learning_rate", cfg.train.learning_rate);
            get_if_present(t, "warmup_steps", cfg.train.warmup_steps);
            get_if_present(t, "epochs", cfg.train.epochs);
            get_if_present(t, "max_seq_tokens", cfg.train.max_seq_tokens);
            get_if_present(t, "eval_every_steps", cfg.train.eval_every_steps);
            get_if_present(t, "simcse_temperature", cfg.train.simcse_temperature);
            if (t.contains("objective")) cfg.train.objective = logos::parse_objective(t.at("objective").get<std::string>());
            get_if_present(t, "d_in", cfg.d_in);
            get_if_present(t, "d_out", cfg.d_out);
            get_if_present(t, "vocab_size", cfg.vocab_size);
            get_if_present(t, "oov_buckets", cfg.oov_buckets);
            get_if_present(t, "holdout_pairs", cfg.holdout_pairs);
            get_if_present(t, "sts_path", cfg.sts_path);
            get_if_present(t, "allow_sts_overlap", cfg.allow_sts_overlap);
            if (t.contains("teacher")) {
                const json& te = t.at("teacher");
                get_if_present(te, "type", cfg.teacher.type);
                get_if_present(te, "dim", cfg.teacher.dim);
                get_if_present(te, "seed", cfg.teacher.seed);
                get_if_present(te, "path", cfg.teacher.path);
                if (cfg.teacher.type != "hash-bag" && cfg.teacher.type != "checkpoint")
                    throw logos::io_error("config: teacher.type must be hash-bag or checkpoint");
            }
            if (t.contains("phases")) {
                for (const json& p : t.at("phases")) {
                    Phase ph;
                    ph.pairs_path = p.at("pairs").get<std::string>();
                    get_if_present(p, "epochs", ph.epochs);
                    cfg.phases.push_back(std::move(ph));
                }
            }
        }
        get_if_present(j, "retrieval_k", cfg.retrieval_k);
        get_if_present(j, "min_pair_chars", cfg.min_pair_chars);
        get_if_present(j, "min_pair_chars_el", cfg.min_pair_chars_el);
    } catch (const json::exception& e) {
        throw logos::io_error("config " + path + ": " + e.what());
    }
    cfg.config_hash = hex64(logos::fnv1a64(j.dump() + "#" + std::to_string(cfg.seed)));
    return cfg;
}

fs::path out_path(const PipelineConfig& cfg, const std::string& explicit_path, const std::string& default_name) {
    if (!explicit_path.empty()) return explicit_path;
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / default_name;
}

logos::SegmentedDocument load_segmented(const std::string& sentences_path) {
    logos::SegmentedDocument doc;
    doc.sentences = logos::read_sentences_tsv(sentences_path);
    const std::string sidecar = sentences_path + ".sections";
    if (fs::exists(sidecar)) {
        doc.section_starts = logos::read_section_lines(sidecar);
        for (std::size_t s : doc.section_starts) {
            if (s > doc.sentences.size())
                throw logos::data_error(sidecar + ": section start beyond sentence count");
        }
    } else {
        doc.section_starts = {0};
    }
    return doc;
}

std::unique_ptr<logos::Encoder> make_teacher(const PipelineConfig& cfg) {
    if (cfg.teacher.type == "hash-bag")
        return std::make_unique<logos::HashBagEncoder>(cfg.teacher.dim, cfg.teacher.seed);
    if (cfg.teacher.path.empty())
        throw logos::io_error("teacher.type is checkpoint but teacher.path is empty");
    return std::make_unique<logos::StudentEncoder>(logos::load_student(cfg.teacher.path),
                                                   cfg.train.max_seq_tokens);
}

// ---- segment ----------------------------------------------------------------

int cmd_segment(const PipelineConfig& cfg, const std::string& input, const std::string& language,
                std::string doc_id, const std::string& out_file, bool verbose) {
    if (doc_id.empty()) doc_id = fs::path(input).stem().string();
    logos::RawDocument doc;
    doc.id = doc_id;
    doc.language = logos::parse_language(language);
    doc.text = read_file(input);
    const std::string sidecar = input + ".sections";
    if (fs::exists(sidecar)) doc.section_breaks = logos::read_section_lines(sidecar);
    logos::validate_document(doc);

    const logos::SegmentedDocument seg = logos::segment_document(doc, cfg.segmentation);
    const fs::path out = out_path(cfg, out_file, doc_id + ".sentences.tsv");
    logos::write_sentences_tsv(out.string(), seg.sentences);
    if (seg.section_starts.size() > 1 || !doc.section_breaks.empty())
        logos::write_section_lines(out.string() + ".sections", seg.section_starts);

    if (verbose) {
        for (std::size_t s = 0; s < seg.section_starts.size(); ++s) {
            const std::size_t end =
                s + 1 < seg.section_starts.size() ? seg.section_starts[s + 1] : seg.sentences.size();
            std::cout << "section " << s << ": " << end - seg.section_starts[s] << " sentences\n";
        }
    }
    std::cout << seg.sentences.size() << " sentences -> " << out.string() << "\n";
    return 0;
}

// ---- align ------------------------------------------------------------------

int cmd_align(const PipelineConfig& cfg, const std::string& src_path, const std::string& tgt_path,
              const std::string& method, const std::string& dict_path, const std::string& checkpoint,
              const std::string& out_alignment, const std::string& out_pairs, bool verbose) {
    const logos::SegmentedDocument src = load_segmented(src_path);
    const logos::SegmentedDocument tgt = load_segmented(tgt_path);
    if (src.sentences.empty() || tgt.sentences.empty())
        throw logos::data_error("alignment needs nonempty sentence lists on both sides");

    logos::BilingualDictionary dict;
    if (!dict_path.empty()) dict = logos::read_dictionary_tsv(dict_path);

    std::unique_ptr<logos::Encoder> encoder;
    std::function<std::vector<logos::AlignmentLink>(const std::vector<logos::Sentence>&,
                                                    const std::vector<logos::Sentence>&)>
        aligner;
    if (method == "length-dict") {
        aligner = [&](const std::vector<logos::Sentence>& s, const std::vector<logos::Sentence>& t) {
            return logos::length_dict_align(s, t, dict, cfg.align);
        };
    } else if (method == "embed") {
        if (checkpoint.empty())
            throw logos::io_error("method embed needs --checkpoint (a trained student checkpoint)");
        encoder = std::make_unique<logos::StudentEncoder>(logos::load_student(checkpoint),
                                                          cfg.train.max_seq_tokens);
        aligner = [&](const std::vector<logos::Sentence>& s, const std::vector<logos::Sentence>& t) {
            return logos::embed_align(s, t, *encoder, cfg.align);
        };
    } else {
        throw logos::io_error("unknown alignment method: " + method + " (use length-dict or embed)");
    }

    const bool per_section = src.section_starts.size() > 1 && tgt.section_starts.size() > 1;
    if (verbose) {
        if (per_section)
            std::cout << "per-section alignment: " << src.section_starts.size() << " sections\n";
        else
            std::cout << "whole-document alignment\n";
    }
    const std::vector<logos::AlignmentLink> links = logos::align_sections(src, tgt, aligner);

    const std::string src_doc = src.sentences.front().doc_id;
    const std::string tgt_doc = tgt.sentences.front().doc_id;
    const fs::path apath = out_path(cfg, out_alignment, "alignment.tsv");
    logos::write_alignment_tsv(apath.string(), links, src_doc, tgt_doc);

    const std::vector<logos::AlignmentLink> kept = logos::filter_links(links, cfg.align.score_threshold);
    const std::vector<logos::ParallelPair> pairs = logos::links_to_pairs(kept, src.sentences, tgt.sentences);
    const fs::path ppath = out_path(cfg, out_pairs, "pairs.tsv");
    logos::write_pairs_tsv(ppath.string(), pairs);

    double mean = 0.0;
    for (const logos::AlignmentLink& l : links) mean += l.score;
    if (!links.empty()) mean /= static_cast<double>(links.size());
    std::cout << links.size() << " links, mean score " << logos::format_float(mean) << "; " << pairs.size()
              << " pairs at threshold " << logos::format_float(cfg.align.score_threshold) << "\n";
    if (pairs.empty()) std::cout << "warning: no links pass the score threshold\n";
    return 0;
}

// ---- build-pairs ------------------------------------------------------------

int cmd_build_pairs(const PipelineConfig& cfg, const std::string& alignment_path, const std::string& src_path,
                    const std::string& tgt_path, const std::string& out_file) {
    const std::vector<logos::AlignmentLink> links = logos::read_alignment_tsv(alignment_path);
    const logos::SegmentedDocument src = load_segmented(src_path);
    const logos::SegmentedDocument tgt = load_segmented(tgt_path);

    const std::vector<logos::AlignmentLink> kept = logos::filter_links(links, cfg.align.score_threshold);
    std::vector<logos::ParallelPair> pairs = logos::links_to_pairs(kept, src.sentences, tgt.sentences);

    auto has_el = [](const std::vector<logos::Sentence>& ss) {
        for (const logos::Sentence& s : ss)
            if (s.language == logos::Language::EL) return true;
        return false;
    };
    const std::size_t min_chars =
        has_el(src.sentences) || has_el(tgt.sentences) ? cfg.min_pair_chars_el : cfg.min_pair_chars;
    const std::size_t before = pairs.size();
    pairs = logos::dedup_and_filter(pairs, min_chars);

    const fs::path out = out_path(cfg, out_file, "pairs.tsv");
    logos::write_pairs_tsv(out.string(), pairs);
    std::cout << before << " -> " << pairs.size() << " pairs (dedup + min length " << min_chars << ") -> "
              << out.string() << "\n";
    return 0;
}

// ---- train ------------------------------------------------------------------

int cmd_train(PipelineConfig cfg, const std::string& pairs_flag, const std::string& out_checkpoint,
              const std::string& out_log, bool verbose) {
    std::vector<Phase> phases = cfg.phases;
    if (!pairs_flag.empty()) phases = {Phase{pairs_flag, cfg.train.epochs}};
    if (phases.empty()) throw logos::io_error("no training data: set train.phases in the config or --pairs");

    std::vector<std::vector<logos::ParallelPair>> phase_data;
    for (const Phase& ph : phases) {
        phase_data.push_back(logos::read_pairs_tsv(ph.pairs_path));
        if (phase_data.back().empty()) throw logos::data_error("empty pair file: " + ph.pairs_path);
    }

    // Leak guard: training text must not appear in the STS evaluation set.
    std::vector<logos::StsItem> sts;
    if (!cfg.sts_path.empty()) {
        sts = logos::read_sts_tsv(cfg.sts_path);
        if (!cfg.allow_sts_overlap) {
            std::unordered_set<std::string> sts_texts;
            for (const logos::StsItem& it : sts) {
                sts_texts.insert(it.a_grc);
                sts_texts.insert(it.a_en);
                sts_texts.insert(it.b_grc);
                sts_texts.insert(it.b_en);
            }
            for (std::size_t p = 0; p < phase_data.size(); ++p) {
                for (const logos::ParallelPair& pair : phase_data[p]) {
                    if (sts_texts.count(pair.source) > 0 || sts_texts.count(pair.target) > 0)
                        throw logos::data_error("training pair appears in the STS set (" +
                                                phases[p].pairs_path +
                                                "); rerun with --allow-sts-overlap to proceed");
                }
            }
        }
    }

    // Holdout comes from the final phase's data; its pairs are removed from
    // every phase so no phase trains on them.
    std::vector<logos::ParallelPair>& final_data = phase_data.back();
    if (cfg.holdout_pairs == 0) throw logos::data_error("holdout_pairs must be positive");
    if (cfg.holdout_pairs >= final_data.size())
        throw logos::data_error("holdout_pairs (" + std::to_string(cfg.holdout_pairs) +
                                ") must be smaller than the final phase pair count (" +
                                std::to_string(final_data.size()) + ")");
    std::vector<std::size_t> order(final_data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    logos::Rng split_rng(cfg.seed ^ logos::fnv1a64("holdout-split"));
    split_rng.shuffle(order);
    std::vector<logos::ParallelPair> holdout;
    std::unordered_set<std::string> holdout_keys;
    for (std::size_t i = 0; i < cfg.holdout_pairs; ++i) {
        holdout.push_back(final_data[order[i]]);
        holdout_keys.insert(holdout.back().source + '\x1f' + holdout.back().target);
    }
    for (std::vector<logos::ParallelPair>& data : phase_data) {
        std::vector<logos::ParallelPair> kept;
        kept.reserve(data.size());
        for (logos::ParallelPair& p : data) {
            if (holdout_keys.count(p.source + '\x1f' + p.target) == 0) kept.push_back(std::move(p));
        }
        data = std::move(kept);
        if (data.empty()) throw logos::data_error("a training phase is empty after the holdout split");
    }

    std::vector<logos::Sentence> vocab_corpus;
    for (const auto& data : phase_data) {
        for (const logos::ParallelPair& p : data) {
            vocab_corpus.push_back({"", 0, p.source, logos::Language::GRC});
            vocab_corpus.push_back({"", 0, p.target, logos::Language::EN});
        }
    }
    const logos::Vocabulary vocab =
        logos::build_vocab(vocab_corpus, static_cast<std::size_t>(cfg.vocab_size), cfg.oov_buckets);
    logos::StudentParams<float> params =
        logos::init_student<float>(vocab.total_ids(), cfg.d_in, cfg.d_out, cfg.seed);

    std::unique_ptr<logos::Encoder> teacher;
    if (cfg.train.objective == logos::Objective::Distill) {
        teacher = make_teacher(cfg);
        if (teacher->dim() != cfg.d_out)
            throw logos::data_error("teacher dimension " + std::to_string(teacher->dim()) +
                                    " does not match student output dimension " + std::to_string(cfg.d_out));
    }

    std::ostringstream log;
    log << "# objective=" << logos::objective_name(cfg.train.objective) << " seed=" << cfg.seed
        << " config_hash=" << cfg.config_hash << "\n";
    log << logos::kTrainLogHeader << '\n';
    for (std::size_t p = 0; p < phase_data.size(); ++p) {
        logos::TrainConfig tc = cfg.train;
        tc.seed = cfg.seed + p;
        tc.epochs = phases.size() == 1 && !pairs_flag.empty() ? cfg.train.epochs : phases[p].epochs;
        log << "# phase " << p << " pairs=" << phases[p].pairs_path << " epochs=" << tc.epochs << "\n";
        const logos::TrainResult res = logos::train(tc, phase_data[p], teacher.get(), params, vocab, holdout,
                                                    sts.empty() ? nullptr : &sts);
        logos::write_train_log(log, res.log, false);
        if (verbose)
            std::cout << "phase " << p << ": best step " << res.best_step << " composite "
                      << logos::format_float(res.best_composite) << "\n";
    }

    const fs::path cpath = out_path(cfg, out_checkpoint, "checkpoint.bin");
    logos::save_student(cpath.string(), params, vocab, cfg.config_hash);
    const fs::path lpath = out_path(cfg, out_log, "train_log.tsv");
    std::ofstream lf(lpath.string(), std::ios::binary | std::ios::trunc);
    if (!lf) throw logos::io_error("cannot open for writing: " + lpath.string());
    lf << log.str();
    lf.flush();
    if (!lf) throw logos::io_error("write failed: " + lpath.string());

    std::cout << "checkpoint -> " << cpath.string() << "\nlog -> " << lpath.string() << "\n";
    return 0;
}

// ---- eval ---------------------------------------------------------------------

int cmd_eval(const PipelineConfig& cfg, const std::string& checkpoint, const std::string& kind,
             const std::string& data_path, const std::string& passages_path, const std::string& queries_path,
             const std::string& greek_path, const std::vector<std::string>& translation_specs,
             const std::string& out_file, bool stamp_time) {
    const logos::StudentCheckpoint cp = logos::load_student(checkpoint);
    const logos::StudentEncoder encoder(cp, cfg.train.max_seq_tokens);

    logos::EvalReport report;
    report.model_id = fs::path(checkpoint).filename().string() + ":" + cp.config_hash;
    if (stamp_time) {
        char buf[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        report.timestamp = buf;
    }

    if (kind == "sts") {
        if (data_path.empty()) throw logos::io_error("eval sts needs --data <sts.tsv>");
        report.dataset_hash = file_hash(data_path);
        const std::vector<logos::StsItem> items = logos::read_sts_tsv(data_path);
        const logos::StsResult r = logos::sts_eval(items, encoder);
        report.values = {{"sts_grc_grc", r.rho_grc_grc},
                         {"sts_en_en", r.rho_en_en},
                         {"sts_grc_en", r.rho_cross},
                         {"sts_mean", r.mean},
                         {"n_grc_grc", static_cast<double>(r.n_grc_grc)},
                         {"n_en_en", static_cast<double>(r.n_en_en)},
                         {"n_grc_en", static_cast<double>(r.n_cross)}};
    } else if (kind == "translation") {
        if (data_path.empty()) throw logos::io_error("eval translation needs --data <pairs.tsv>");
        report.dataset_hash = file_hash(data_path);
        const std::vector<logos::ParallelPair> pairs = logos::read_pairs_tsv(data_path);
        if (pairs.empty()) throw logos::data_error("empty pair file: " + data_path);
        logos::MatF src(static_cast<Eigen::Index>(pairs.size()), encoder.dim());
        logos::MatF tgt(static_cast<Eigen::Index>(pairs.size()), encoder.dim());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            src.row(static_cast<Eigen::Index>(i)) = encoder.encode(pairs[i].source).transpose();
            tgt.row(static_cast<Eigen::Index>(i)) = encoder.encode(pairs[i].target).transpose();
        }
        report.values = {{"translation_search_accuracy", 100.0 * logos::translation_search_accuracy(src, tgt)},
                         {"n_pairs", static_cast<double>(pairs.size())}};
    } else if (kind == "retrieval") {
        if (passages_path.empty() || queries_path.empty())
            throw logos::io_error("eval retrieval needs --passages and --queries");
        report.dataset_hash = hex64(logos::fnv1a64(file_hash(passages_path) + file_hash(queries_path)));
        const auto passages = logos::read_passages_tsv(passages_path);
        if (passages.empty()) throw logos::data_error("empty passage file: " + passages_path);
        const auto queries = logos::read_queries_tsv(queries_path);
        if (queries.empty()) throw logos::data_error("empty query file: " + queries_path);
        logos::EmbeddingStore store(encoder.dim());
        for (const auto& [id, text] : passages) store.add(id, encoder.encode(text));
        for (const logos::RetrievalQuery& q : queries)
            for (const std::string& id : q.relevant_ids)
                if (store.find(id) == nullptr)
                    throw logos::data_error("query references unknown passage id: " + id);
        for (std::size_t k : cfg.retrieval_k) {
            double recall = 0.0, ap = 0.0;
            for (const logos::RetrievalQuery& q : queries) {
                const std::vector<logos::Neighbor> top =
                    logos::nearest_neighbors(encoder.encode(q.query_text), store, store.size());
                std::vector<std::string> ranked;
                ranked.reserve(top.size());
                for (const logos::Neighbor& nb : top) ranked.push_back(nb.id);
                recall += logos::recall_at_k(ranked, q.relevant_ids, k);
                ap += logos::map_at_k(ranked, q.relevant_ids, k);
            }
            recall = 100.0 * recall / static_cast<double>(queries.size());
            ap = 100.0 * ap / static_cast<double>(queries.size());
            report.values.emplace_back("recall_at_" + std::to_string(k), recall);
            report.values.emplace_back("map_at_" + std::to_string(k), ap);
        }
        report.values.emplace_back("n_passages", static_cast<double>(passages.size()));
        report.values.emplace_back("n_queries", static_cast<double>(queries.size()));
    } else if (kind == "bias") {
        if (greek_path.empty() || translation_specs.empty())
            throw logos::io_error("eval bias needs --greek and at least one --translation name=path");
        logos::BiasCorpus corpus;
        corpus.greek_verses = logos::read_verse_lines(greek_path);
        std::string combined = file_hash(greek_path);
        for (const std::string& spec : translation_specs) {
            const std::size_t eq = spec.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
                throw logos::io_error("--translation must be name=path, got: " + spec);
            const std::string name = spec.substr(0, eq), path = spec.substr(eq + 1);
            corpus.translations.emplace_back(name, logos::read_verse_lines(path));
            combined += file_hash(path);
        }
        report.dataset_hash = hex64(logos::fnv1a64(combined));
        for (const auto& [name, mrr] : logos::mrr_bias(corpus, encoder))
            report.values.emplace_back("mrr_" + name, mrr);
    } else {
        throw logos::io_error("unknown eval kind: " + kind + " (use sts, translation, retrieval or bias)");
    }

    const fs::path out = out_path(cfg, out_file, "report_" + kind + ".json");
    logos::write_report_json(out.string(), report);
    std::cout << logos::report_to_json(report).dump(2) << "\n";
    return 0;
}

// ---- search --------------------------------------------------------------------

int cmd_search(const PipelineConfig& cfg, const std::string& checkpoint, const std::string& passages_path,
               const std::string& query, std::size_t k) {
    const logos::StudentCheckpoint cp = logos::load_student(checkpoint);
    const logos::StudentEncoder encoder(cp, cfg.train.max_seq_tokens);
    if (query.empty()) throw logos::data_error("empty query");
    const auto passages = logos::read_passages_tsv(passages_path);
    if (passages.empty()) throw logos::data_error("empty passage file: " + passages_path);

    logos::EmbeddingStore store(encoder.dim());
    std::unordered_map<std::string, const std::string*> text_by_id;
    for (const auto& [id, text] : passages) {
        store.add(id, encoder.encode(text));
        text_by_id[id] = &text;
    }
    const std::vector<logos::Neighbor> top = logos::nearest_neighbors(encoder.encode(query), store, k);
    std::cout << "rank\tscore\tid\ttext\n";
    for (std::size_t r = 0; r < top.size(); ++r) {
        std::cout << r + 1 << '\t' << logos::format_float(top[r].score) << '\t' << top[r].id << '\t'
                  << *text_by_id[top[r].id] << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Greek/English sentence embedding toolkit: segmentation, alignment, training, evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "override config seed");
    app.add_option("--out", out_dir, "override output directory");
    app.add_flag("--verbose", verbose, "per-stage progress details");

    auto* seg = app.add_subcommand("segment", "split a raw document into sentences");
    std::string seg_input, seg_language = "grc", seg_doc_id, seg_out_file;
    seg->add_option("--input", seg_input, "raw UTF-8 document")->required();
    seg->add_option("--language", seg_language, "grc, en or el");
    seg->add_option("--doc-id", seg_doc_id, "document id (default: input stem)");
    seg->add_option("--out-file", seg_out_file, "output sentence TSV path");

    auto* aln = app.add_subcommand("align", "align two sentence TSVs");
    std::string aln_src, aln_tgt, aln_method = "length-dict", aln_dict, aln_ckpt, aln_out_a, aln_out_p;
    aln->add_option("--src", aln_src, "source sentence TSV")->required();
    aln->add_option("--tgt", aln_tgt, "target sentence TSV")->required();
    aln->add_option("--method", aln_method, "length-dict or embed");
    aln->add_option("--dict", aln_dict, "bilingual dictionary TSV (length-dict)");
    aln->add_option("--checkpoint", aln_ckpt, "student checkpoint (embed)");
    aln->add_option("--out-alignment", aln_out_a, "alignment TSV path");
    aln->add_option("--out-pairs", aln_out_p, "pair TSV path");

    auto* bp = app.add_subcommand("build-pairs", "filter an alignment into training pairs");
    std::string bp_alignment, bp_src, bp_tgt, bp_out;
    bp->add_option("--alignment", bp_alignment, "alignment TSV")->required();
    bp->add_option("--src", bp_src, "source sentence TSV")->required();
    bp->add_option("--tgt", bp_tgt, "target sentence TSV")->required();
    bp->add_option("--out-file", bp_out, "output pair TSV path");

    auto* tr = app.add_subcommand("train", "train the student encoder");
    std::string tr_pairs, tr_out_ckpt, tr_out_log, tr_objective;
    bool tr_allow_overlap = false;
    tr->add_option("--pairs", tr_pairs, "single pair TSV (overrides config phases)");
    tr->add_option("--objective", tr_objective, "distill or simcse (overrides config)");
    tr->add_option("--out-checkpoint", tr_out_ckpt, "checkpoint path");
    tr->add_option("--out-log", tr_out_log, "training log TSV path");
    tr->add_flag("--allow-sts-overlap", tr_allow_overlap, "skip the STS leak guard");

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ev_ckpt, ev_kind, ev_data, ev_passages, ev_queries, ev_greek, ev_out;
    std::vector<std::string> ev_translations;
    bool ev_timestamp = false;
    ev->add_option("--checkpoint", ev_ckpt, "student checkpoint")->required();
    ev->add_option("--kind", ev_kind, "sts, translation, retrieval or bias")->required();
    ev->add_option("--data", ev_data, "dataset TSV (sts / translation)");
    ev->add_option("--passages", ev_passages, "passage TSV (retrieval)");
    ev->add_option("--queries", ev_queries, "query TSV (retrieval)");
    ev->add_option("--greek", ev_greek, "Greek verse file (bias)");
    ev->add_option("--translation", ev_translations, "name=path verse file (bias, repeatable)");
    ev->add_option("--out-file", ev_out, "report JSON path");
    ev->add_flag("--timestamp", ev_timestamp, "stamp the report with wall-clock time");

    auto* se = app.add_subcommand("search", "rank passages against a query");
    std::string se_ckpt, se_passages, se_query;
    std::size_t se_k = 10;
    se->add_option("--checkpoint", se_ckpt, "student checkpoint")->required();
    se->add_option("--passages", se_passages, "passage TSV")->required();
    se->add_option("--query", se_query, "query text")->required();
    se->add_option("--k", se_k, "results to return");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        PipelineConfig cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (tr_allow_overlap) cfg.allow_sts_overlap = true;
        if (!tr_objective.empty()) cfg.train.objective = logos::parse_objective(tr_objective);

        if (seg->parsed()) return cmd_segment(cfg, seg_input, seg_language, seg_doc_id, seg_out_file, verbose);
        if (aln->parsed())
            return cmd_align(cfg, aln_src, aln_tgt, aln_method, aln_dict, aln_ckpt, aln_out_a, aln_out_p,
                             verbose);
        if (bp->parsed()) return cmd_build_pairs(cfg, bp_alignment, bp_src, bp_tgt, bp_out);
        if (tr->parsed()) return cmd_train(cfg, tr_pairs, tr_out_ckpt, tr_out_log, verbose);
        if (ev->parsed())
            return cmd_eval(cfg, ev_ckpt, ev_kind, ev_data, ev_passages, ev_queries, ev_greek,
                            ev_translations, ev_out, ev_timestamp);
        if (se->parsed()) return cmd_search(cfg, se_ckpt, se_passages, se_query, se_k);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const logos::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const logos::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
