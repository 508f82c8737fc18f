#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "logos/error.hpp"
#include "logos/rng.hpp"

namespace logos {

using VecF = Eigen::VectorXf;
using MatF = Eigen::MatrixXf;

static_assert(std::endian::native == std::endian::little,
              "embedding store format assumes a little-endian host");

/// Cosine similarity, computed in double precision. Inputs must have equal
/// dimension and nonzero norm.
inline double cosine_similarity(const Eigen::Ref<const VecF>& u, const Eigen::Ref<const VecF>& v) {
    if (u.size() != v.size()) throw data_error("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double a = u[i], b = v[i];
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0) throw data_error("cosine: zero-norm vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

/// Elementwise arithmetic mean of a nonempty list of equal-dimension vectors.
inline VecF mean_pool(const std::vector<VecF>& vectors) {
    if (vectors.empty()) throw data_error("mean_pool: empty input");
    VecF acc = VecF::Zero(vectors.front().size());
    for (const VecF& v : vectors) {
        if (v.size() != acc.size()) throw data_error("mean_pool: dimension mismatch");
        acc += v;
    }
    return acc / static_cast<float>(vectors.size());
}

/// Abstract sentence encoder: deterministic text -> fixed-dimension vector.
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual int dim() const = 0;
    virtual VecF encode(std::string_view text) const = 0;
};

/// A persisted, id-addressed collection of embedding vectors. Immutable once
/// built; all reads are thread-safe.
class EmbeddingStore {
public:
    explicit EmbeddingStore(int dim) : dim_(dim) {
        if (dim <= 0) throw data_error("store dimension must be positive");
    }

    void add(std::string id, const VecF& v) {
        if (v.size() != dim_) throw data_error("store add: dimension mismatch");
        if (!index_.emplace(id, ids_.size()).second) throw data_error("duplicate store id: " + id);
        ids_.push_back(std::move(id));
        rows_.push_back(v);
    }

    int dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t i) const { return ids_.at(i); }
    const VecF& vector(std::size_t i) const { return rows_.at(i); }
    const std::vector<std::string>& ids() const { return ids_; }

    const VecF* find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &rows_[it->second];
    }

    /// Binary layout (little-endian): "EMBS", u32 version, u32 dim, u64 count,
    /// then count rows of dim float32. Ids go to a sidecar text file at
    /// path + ".ids", one id per line, same order. Non-finite values are
    /// rejected so a stored file is always NaN-free.
    void write(const std::string& path) const {
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (!rows_[r].allFinite()) throw data_error("store write: non-finite value in row for id " + ids_[r]);
        }
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot open for writing: " + path);
        f.write("EMBS", 4);
        write_u32(f, kFormatVersion);
        write_u32(f, static_cast<std::uint32_t>(dim_));
        write_u64(f, static_cast<std::uint64_t>(rows_.size()));
        for (const VecF& row : rows_) {
            f.write(reinterpret_cast<const char*>(row.data()),
                    static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(dim_)));
        }
        if (!f) throw io_error("write failed: " + path);
        std::ofstream idf(path + ".ids", std::ios::binary | std::ios::trunc);
        if (!idf) throw io_error("cannot open for writing: " + path + ".ids");
        for (const std::string& id : ids_) idf << id << '\n';
        if (!idf) throw io_error("write failed: " + path + ".ids");
    }

    static EmbeddingStore read(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw io_error("cannot open: " + path);
        char magic[4] = {};
        f.read(magic, 4);
        if (!f || std::memcmp(magic, "EMBS", 4) != 0) throw io_error("bad magic in " + path);
        const std::uint32_t version = read_u32(f, path);
        if (version != kFormatVersion) throw io_error("unsupported store version in " + path);
        const std::uint32_t dim = read_u32(f, path);
        const std::uint64_t count = read_u64(f, path);
        if (dim == 0) throw io_error("zero dimension in " + path);

        EmbeddingStore store(static_cast<int>(dim));
        std::vector<std::string> ids = read_id_lines(path + ".ids");
        if (ids.size() != count) throw io_error("id count mismatch for " + path);

        VecF row(static_cast<Eigen::Index>(dim));
        for (std::uint64_t r = 0; r < count; ++r) {
            f.read(reinterpret_cast<char*>(row.data()),
                   static_cast<std::streamsize>(sizeof(float) * dim));
            if (!f) throw io_error("truncated payload in " + path);
            store.add(ids[r], row);
        }
        return store;
    }

private:
    static constexpr std::uint32_t kFormatVersion = 1;

    static void write_u32(std::ofstream& f, std::uint32_t v) {
        f.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    static void write_u64(std::ofstream& f, std::uint64_t v) {
        f.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    static std::uint32_t read_u32(std::ifstream& f, const std::string& path) {
        std::uint32_t v = 0;
        f.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!f) throw io_error("truncated header in " + path);
        return v;
    }
    static std::uint64_t read_u64(std::ifstream& f, const std::string& path) {
        std::uint64_t v = 0;
        f.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!f) throw io_error("truncated header in " + path);
        return v;
    }
    static std::vector<std::string> read_id_lines(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw io_error("cannot open: " + path);
        std::vector<std::string> ids;
        std::string line;
        while (std::getline(f, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            ids.push_back(line);
        }
        return ids;
    }

    int dim_;
    std::vector<std::string> ids_;
    std::vector<VecF> rows_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Neighbor {
    std::string id;
    double score;
};

/// Exhaustive top-k scan by descending cosine similarity. Exact ties keep
/// store insertion order, so results are deterministic.
inline std::vector<Neighbor> nearest_neighbors(const VecF& query, const EmbeddingStore& store,
                                               std::size_t k) {
    if (k == 0) throw data_error("nearest_neighbors: k must be >= 1");
    if (query.size() != store.dim()) throw data_error("nearest_neighbors: dimension mismatch");
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        scored.emplace_back(cosine_similarity(query, store.vector(i)), i);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Neighbor> out;
    const std::size_t n = std::min(k, scored.size());
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(Neighbor{store.id(scored[i].second), scored[i].first});
    }
    return out;
}

/// Fixture/oracle encoder: a fixed text -> vector table.
class LookupEncoder : public Encoder {
public:
    explicit LookupEncoder(int dim) : dim_(dim) {}

    void set(std::string text, VecF v) {
        if (v.size() != dim_) throw data_error("lookup encoder: dimension mismatch");
        table_[std::move(text)] = std::move(v);
    }

    int dim() const override { return dim_; }

    VecF encode(std::string_view text) const override {
        auto it = table_.find(std::string(text));
        if (it == table_.end()) throw data_error("lookup encoder: unknown text: " + std::string(text));
        return it->second;
    }

private:
    int dim_;
    std::unordered_map<std::string, VecF> table_;
};

/// Frozen random bag-of-tokens encoder: each whitespace token maps to a
/// pseudo-random vector derived from (seed, token hash); the sentence vector
/// is the token mean. Deterministic, parameter-free; serves as a stand-in
/// teacher at desk scale.
class HashBagEncoder : public Encoder {
public:
    HashBagEncoder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
        if (dim <= 0) throw data_error("encoder dimension must be positive");
    }

    int dim() const override { return dim_; }

    VecF encode(std::string_view text) const override {
        VecF acc = VecF::Zero(dim_);
        int count = 0;
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            if (i == start) break;
            acc += token_vector(text.substr(start, i - start));
            ++count;
        }
        if (count == 0) throw data_error("empty token sequence");
        return acc / static_cast<float>(count);
    }

private:
    VecF token_vector(std::string_view token) const {
        Rng rng(fnv1a64(token) ^ seed_);
        VecF v(dim_);
        for (int i = 0; i < dim_; ++i) v[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        return v;
    }

    int dim_;
    std::uint64_t seed_;
};

} // namespace logos
