#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "logos/embedding.hpp"
#include "logos/error.hpp"
#include "logos/rng.hpp"
#include "logos/text.hpp"

namespace logos {

/// Splits on ASCII whitespace runs. Normalized text already has single
/// spaces, but raw tabs/newlines are handled too.
inline std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Token -> dense id map with hash buckets for unseen tokens. Known tokens
/// occupy [0, vocab_size); OOV tokens map into
/// [vocab_size, vocab_size + oov_buckets) via FNV-1a.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> tokens, int oov_buckets)
        : tokens_(std::move(tokens)), oov_buckets_(oov_buckets) {
        if (oov_buckets_ <= 0) throw data_error("vocabulary: oov_buckets must be positive");
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
                throw data_error("vocabulary: duplicate token " + tokens_[i]);
        }
    }

    int vocab_size() const { return static_cast<int>(tokens_.size()); }
    int oov_buckets() const { return oov_buckets_; }
    int total_ids() const { return vocab_size() + oov_buckets_; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    int token_id(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it != index_.end()) return it->second;
        return vocab_size() + static_cast<int>(fnv1a64(token) % static_cast<std::uint64_t>(oov_buckets_));
    }

private:
    std::vector<std::string> tokens_;
    int oov_buckets_ = 1;
    std::unordered_map<std::string, int> index_;
};

/// Most frequent whitespace tokens up to max_size; frequency ties break
/// lexicographically. Deterministic by construction.
inline Vocabulary build_vocab(const std::vector<Sentence>& corpus, std::size_t max_size, int oov_buckets) {
    if (corpus.empty()) throw data_error("build_vocab: empty corpus");
    if (max_size == 0) throw data_error("build_vocab: max_size must be positive");
    std::map<std::string, std::size_t> freq;
    for (const Sentence& s : corpus) {
        for (std::string& t : whitespace_tokens(s.text)) ++freq[std::move(t)];
    }
    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (items.size() > max_size) items.resize(max_size);
    std::vector<std::string> tokens;
    tokens.reserve(items.size());
    for (auto& [tok, n] : items) tokens.push_back(std::move(tok));
    return Vocabulary(std::move(tokens), oov_buckets);
}

/// Bag-of-tokens encoder parameters: token embeddings, linear projection,
/// bias. Scalar type is templated so gradient checks can run in double while
/// training and storage use float.
template <typename S>
struct StudentParams {
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

    Mat embedding;  // (vocab_size + oov_buckets) x d_in
    Mat projection; // d_in x d_out
    Vec bias;       // d_out

    int d_in() const { return static_cast<int>(projection.rows()); }
    int d_out() const { return static_cast<int>(projection.cols()); }

    template <typename U>
    StudentParams<U> cast() const {
        StudentParams<U> p;
        p.embedding = embedding.template cast<U>();
        p.projection = projection.template cast<U>();
        p.bias = bias.template cast<U>();
        return p;
    }
};

template <typename S>
struct StudentGrads {
    typename StudentParams<S>::Mat embedding;
    typename StudentParams<S>::Mat projection;
    typename StudentParams<S>::Vec bias;

    static StudentGrads zero_like(const StudentParams<S>& p) {
        StudentGrads g;
        g.embedding = StudentParams<S>::Mat::Zero(p.embedding.rows(), p.embedding.cols());
        g.projection = StudentParams<S>::Mat::Zero(p.projection.rows(), p.projection.cols());
        g.bias = StudentParams<S>::Vec::Zero(p.bias.size());
        return g;
    }

    void set_zero() {
        embedding.setZero();
        projection.setZero();
        bias.setZero();
    }

    void add_scaled(const StudentGrads& other, S scale) {
        embedding += scale * other.embedding;
        projection += scale * other.projection;
        bias += scale * other.bias;
    }
};

/// Seeded initialization: embeddings ~ U(-0.05, 0.05), projection ~
/// U(-a, a) with a = sqrt(6 / (d_in + d_out)), bias zero. Draw order is
/// row-major over the embedding table, then row-major over the projection.
template <typename S>
StudentParams<S> init_student(int total_token_ids, int d_in, int d_out, std::uint64_t seed) {
    if (total_token_ids <= 0 || d_in <= 0 || d_out <= 0)
        throw data_error("init_student: dimensions must be positive");
    Rng rng(seed);
    StudentParams<S> p;
    p.embedding.resize(total_token_ids, d_in);
    for (int i = 0; i < total_token_ids; ++i)
        for (int j = 0; j < d_in; ++j) p.embedding(i, j) = static_cast<S>(rng.uniform(-0.05, 0.05));
    const double a = std::sqrt(6.0 / (d_in + d_out));
    p.projection.resize(d_in, d_out);
    for (int i = 0; i < d_in; ++i)
        for (int j = 0; j < d_out; ++j) p.projection(i, j) = static_cast<S>(rng.uniform(-a, a));
    p.bias = StudentParams<S>::Vec::Zero(d_out);
    return p;
}

namespace detail {

/// Token ids for an encode call; truncates to max_tokens when positive.
inline std::vector<int> encode_token_ids(const Vocabulary& vocab, std::string_view text, int max_tokens) {
    std::vector<std::string> toks = whitespace_tokens(text);
    if (toks.empty()) throw data_error("empty token sequence");
    if (max_tokens > 0 && toks.size() > static_cast<std::size_t>(max_tokens))
        toks.resize(static_cast<std::size_t>(max_tokens));
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const std::string& t : toks) ids.push_back(vocab.token_id(t));
    return ids;
}

} // namespace detail

/// out = projection^T * mean(embedding rows of the tokens) + bias.
template <typename S>
typename StudentParams<S>::Vec student_encode(const StudentParams<S>& params, const Vocabulary& vocab,
                                              std::string_view text, int max_tokens = 0) {
    if (params.embedding.rows() != vocab.total_ids())
        throw data_error("student_encode: embedding table does not match vocabulary");
    const std::vector<int> ids = detail::encode_token_ids(vocab, text, max_tokens);
    typename StudentParams<S>::Vec mean = StudentParams<S>::Vec::Zero(params.d_in());
    for (int id : ids) mean += params.embedding.row(id).transpose();
    mean /= static_cast<S>(ids.size());
    return params.projection.transpose() * mean + params.bias;
}

/// Exact gradients of upstream . encode(text) accumulated into grads:
/// d bias += upstream; d projection += mean (outer) upstream;
/// d embedding[row of each token occurrence] += (projection * upstream) / L.
/// Rows for absent tokens are untouched, so their gradient stays exactly
/// zero; a token occurring twice receives twice the single-occurrence row.
template <typename S>
void student_encode_backward(const StudentParams<S>& params, const Vocabulary& vocab, std::string_view text,
                             const typename StudentParams<S>::Vec& upstream, StudentGrads<S>& grads,
                             int max_tokens = 0) {
    if (upstream.size() != params.d_out()) throw data_error("student_encode_backward: upstream dimension mismatch");
    const std::vector<int> ids = detail::encode_token_ids(vocab, text, max_tokens);
    typename StudentParams<S>::Vec mean = StudentParams<S>::Vec::Zero(params.d_in());
    for (int id : ids) mean += params.embedding.row(id).transpose();
    mean /= static_cast<S>(ids.size());

    grads.bias += upstream;
    grads.projection += mean * upstream.transpose();
    const typename StudentParams<S>::Vec d_mean = params.projection * upstream;
    const typename StudentParams<S>::Vec d_row = d_mean / static_cast<S>(ids.size());
    for (int id : ids) grads.embedding.row(id) += d_row.transpose();
}

/// Checkpoint layout: u32 header length, JSON header (matrix names and
/// shapes, vocabulary tokens in id order, oov bucket count, config hash,
/// format version), then one embedding-store binary block per matrix in
/// header order. All bytes are deterministic for fixed inputs.
struct StudentCheckpoint {
    StudentParams<float> params;
    Vocabulary vocab;
    std::string config_hash;
};

namespace detail {

inline void write_u32_stream(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64_stream(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t read_u32_stream(std::istream& is, const std::string& what) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw io_error("truncated checkpoint header in " + what);
    return v;
}

inline std::uint64_t read_u64_stream(std::istream& is, const std::string& what) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw io_error("truncated checkpoint header in " + what);
    return v;
}

/// One matrix as an embedding-store block: magic, version, dim (= cols),
/// count (= rows), row-major float32 payload.
inline void write_matrix_block(std::ostream& os, const Eigen::MatrixXf& m) {
    os.write("EMBS", 4);
    write_u32_stream(os, 1u);
    write_u32_stream(os, static_cast<std::uint32_t>(m.cols()));
    write_u64_stream(os, static_cast<std::uint64_t>(m.rows()));
    std::vector<float> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(sizeof(float) * row.size()));
    }
}

inline Eigen::MatrixXf read_matrix_block(std::istream& is, const std::string& path, Eigen::Index rows,
                                         Eigen::Index cols) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "EMBS", 4) != 0) throw io_error("bad matrix block magic in " + path);
    if (read_u32_stream(is, path) != 1u) throw io_error("unsupported matrix block version in " + path);
    const std::uint32_t dim = read_u32_stream(is, path);
    const std::uint64_t count = read_u64_stream(is, path);
    if (static_cast<Eigen::Index>(dim) != cols || static_cast<Eigen::Index>(count) != rows)
        throw io_error("matrix shape mismatch in " + path);
    Eigen::MatrixXf m(rows, cols);
    std::vector<float> row(static_cast<std::size_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(sizeof(float) * row.size()));
        if (!is) throw io_error("truncated matrix payload in " + path);
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

} // namespace detail

inline void save_student(const std::string& path, const StudentParams<float>& params, const Vocabulary& vocab,
                         const std::string& config_hash) {
    if (!params.embedding.allFinite() || !params.projection.allFinite() || !params.bias.allFinite())
        throw data_error("save_student: non-finite parameter value");
    if (params.embedding.rows() != vocab.total_ids())
        throw data_error("save_student: embedding table does not match vocabulary");

    nlohmann::json header;
    header["format_version"] = 1;
    header["config_hash"] = config_hash;
    header["oov_buckets"] = vocab.oov_buckets();
    header["vocab"] = vocab.tokens();
    header["matrices"] = nlohmann::json::array(
        {nlohmann::json{{"name", "embedding"},
                        {"rows", params.embedding.rows()},
                        {"cols", params.embedding.cols()}},
         nlohmann::json{{"name", "projection"},
                        {"rows", params.projection.rows()},
                        {"cols", params.projection.cols()}},
         nlohmann::json{{"name", "bias"}, {"rows", 1}, {"cols", params.bias.size()}}});
    const std::string header_bytes = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    detail::write_u32_stream(f, static_cast<std::uint32_t>(header_bytes.size()));
    f.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    detail::write_matrix_block(f, params.embedding);
    detail::write_matrix_block(f, params.projection);
    detail::write_matrix_block(f, Eigen::MatrixXf(params.bias.transpose()));
    if (!f) throw io_error("write failed: " + path);
}

inline StudentCheckpoint load_student(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    const std::uint32_t header_len = detail::read_u32_stream(f, path);
    std::string header_bytes(header_len, '\0');
    f.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
    if (!f) throw io_error("truncated checkpoint header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes);
    } catch (const nlohmann::json::exception&) {
        throw io_error("malformed checkpoint header in " + path);
    }

    StudentCheckpoint cp;
    try {
        if (header.at("format_version").get<int>() != 1)
            throw io_error("unsupported checkpoint version in " + path);
        cp.config_hash = header.at("config_hash").get<std::string>();
        cp.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>(),
                              header.at("oov_buckets").get<int>());

        const nlohmann::json& mats = header.at("matrices");
        if (!mats.is_array() || mats.size() != 3) throw io_error("malformed checkpoint header in " + path);
        auto shape = [&](std::size_t i, const char* name) {
            if (mats[i].at("name").get<std::string>() != name)
                throw io_error("malformed checkpoint header in " + path);
            return std::pair<Eigen::Index, Eigen::Index>(mats[i].at("rows").get<Eigen::Index>(),
                                                         mats[i].at("cols").get<Eigen::Index>());
        };
        const auto [er, ec] = shape(0, "embedding");
        const auto [pr, pc] = shape(1, "projection");
        const auto [br, bc] = shape(2, "bias");
        if (er != cp.vocab.total_ids() || ec != pr || br != 1 || bc != pc)
            throw io_error("inconsistent checkpoint shapes in " + path);

        cp.params.embedding = detail::read_matrix_block(f, path, er, ec);
        cp.params.projection = detail::read_matrix_block(f, path, pr, pc);
        cp.params.bias = detail::read_matrix_block(f, path, br, bc).row(0).transpose();
    } catch (const nlohmann::json::exception&) {
        throw io_error("malformed checkpoint header in " + path);
    }
    return cp;
}

/// Encoder adapter over frozen student parameters. max_tokens mirrors the
/// truncation used during training (0 = unlimited).
class StudentEncoder : public Encoder {
public:
    StudentEncoder(StudentParams<float> params, Vocabulary vocab, int max_tokens = 0)
        : params_(std::move(params)), vocab_(std::move(vocab)), max_tokens_(max_tokens) {}

    explicit StudentEncoder(StudentCheckpoint cp, int max_tokens = 0)
        : StudentEncoder(std::move(cp.params), std::move(cp.vocab), max_tokens) {}

    int dim() const override { return params_.d_out(); }

    VecF encode(std::string_view text) const override {
        return student_encode(params_, vocab_, text, max_tokens_);
    }

    const StudentParams<float>& params() const { return params_; }
    const Vocabulary& vocab() const { return vocab_; }

private:
    StudentParams<float> params_;
    Vocabulary vocab_;
    int max_tokens_;
};

} // namespace logos
