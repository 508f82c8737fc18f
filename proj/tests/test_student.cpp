#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "logos/student.hpp"

using namespace logos;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// A fixed tiny model: 2 vocab tokens + 1 oov bucket, d_in = 2, d_out = 2.
StudentParams<double> tiny_params() {
    StudentParams<double> p;
    p.embedding.resize(3, 2);
    p.embedding << 1.0, 2.0, //
        3.0, -1.0,           //
        0.5, 0.5;
    p.projection.resize(2, 2);
    p.projection << 1.0, 0.0, //
        0.0, 2.0;
    p.bias.resize(2);
    p.bias << 0.25, -0.5;
    return p;
}

Vocabulary tiny_vocab() { return Vocabulary({"alpha", "beta"}, 1); }

} // namespace

TEST_CASE("whitespace_tokens splits on blanks only", "[student]") {
    CHECK(whitespace_tokens("a b  c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(whitespace_tokens("  x\t y\n") == std::vector<std::string>{"x", "y"});
    CHECK(whitespace_tokens("").empty());
    CHECK(whitespace_tokens("αβ γδ") == std::vector<std::string>{"αβ", "γδ"});
}

TEST_CASE("Vocabulary ids and OOV hashing", "[student]") {
    const Vocabulary v({"the", "of", "and"}, 8);
    CHECK(v.vocab_size() == 3);
    CHECK(v.total_ids() == 11);
    CHECK(v.token_id("the") == 0);
    CHECK(v.token_id("and") == 2);

    const int oov = v.token_id("zebra");
    CHECK(oov >= 3);
    CHECK(oov < 11);
    CHECK(oov == 3 + static_cast<int>(fnv1a64("zebra") % 8)); // stable hash bucket
    CHECK(v.token_id("zebra") == oov);

    CHECK_THROWS_AS(Vocabulary({"dup", "dup"}, 4), data_error);
    CHECK_THROWS_AS(Vocabulary({"x"}, 0), data_error);
}

TEST_CASE("build_vocab orders by frequency then lexicographically", "[student]") {
    std::vector<Sentence> corpus = {
        {"d", 0, "b a b", Language::EN},
        {"d", 1, "c a b c", Language::EN},
    };
    // counts: b=3, c=2, a=2
    const Vocabulary v = build_vocab(corpus, 10, 2);
    REQUIRE(v.tokens() == std::vector<std::string>{"b", "a", "c"});

    const Vocabulary top2 = build_vocab(corpus, 2, 2);
    CHECK(top2.tokens() == std::vector<std::string>{"b", "a"});

    CHECK_THROWS_AS(build_vocab({}, 10, 2), data_error);
    CHECK_THROWS_AS(build_vocab(corpus, 0, 2), data_error);
}

TEST_CASE("init_student is deterministic with zero bias", "[student]") {
    const auto p1 = init_student<float>(7, 4, 3, 99);
    const auto p2 = init_student<float>(7, 4, 3, 99);
    const auto p3 = init_student<float>(7, 4, 3, 100);
    CHECK(p1.embedding == p2.embedding);
    CHECK(p1.projection == p2.projection);
    CHECK(p1.embedding != p3.embedding);
    CHECK(p1.bias.isZero());
    CHECK(p1.d_in() == 4);
    CHECK(p1.d_out() == 3);
    CHECK(p1.embedding.cwiseAbs().maxCoeff() <= 0.05f);
    const float bound = std::sqrt(6.0f / (4 + 3));
    CHECK(p1.projection.cwiseAbs().maxCoeff() <= bound);
    CHECK_THROWS_AS(init_student<float>(0, 4, 3, 1), data_error);
}

TEST_CASE("student_encode computes projection^T * mean + bias", "[student]") {
    const auto p = tiny_params();
    const auto v = tiny_vocab();
    // tokens alpha beta: mean = ((1,2)+(3,-1))/2 = (2, 0.5)
    // out = P^T mean + b = (2*1 + 0.5*0 + 0.25, 2*0 + 0.5*2 - 0.5) = (2.25, 0.5)
    const auto out = student_encode(p, v, "alpha beta");
    REQUIRE(out.size() == 2);
    CHECK(out[0] == Approx(2.25));
    CHECK(out[1] == Approx(0.5));

    // single token: mean is the row itself
    const auto single = student_encode(p, v, "beta");
    CHECK(single[0] == Approx(3.0 + 0.25));
    CHECK(single[1] == Approx(-2.0 - 0.5));

    // oov token hits the bucket row (0.5, 0.5)
    const auto oov = student_encode(p, v, "unknown");
    CHECK(oov[0] == Approx(0.75));
    CHECK(oov[1] == Approx(0.5));

    CHECK_THROWS_AS(student_encode(p, v, "   "), data_error);
}

TEST_CASE("student_encode honors max_tokens truncation", "[student]") {
    const auto p = tiny_params();
    const auto v = tiny_vocab();
    const auto truncated = student_encode(p, v, "alpha beta", 1);
    const auto direct = student_encode(p, v, "alpha");
    CHECK(truncated[0] == Approx(direct[0]));
    CHECK(truncated[1] == Approx(direct[1]));
}

TEST_CASE("student_encode rejects mismatched embedding table", "[student]") {
    auto p = tiny_params();
    p.embedding.conservativeResize(5, 2);
    CHECK_THROWS_AS(student_encode(p, tiny_vocab(), "alpha"), data_error);
}

TEST_CASE("student_encode_backward matches finite differences", "[student]") {
    auto p = tiny_params();
    const auto v = tiny_vocab();
    const std::string text = "alpha beta alpha"; // repeated token doubles its row gradient
    StudentParams<double>::Vec upstream(2);
    upstream << 0.7, -0.3;

    auto scalar_loss = [&](const StudentParams<double>& q) {
        return upstream.dot(student_encode(q, v, text));
    };

    StudentGrads<double> grads = StudentGrads<double>::zero_like(p);
    student_encode_backward(p, v, text, upstream, grads);

    const double eps = 1e-6;
    auto check_entry = [&](auto& mat, const auto& gmat, int r, int c) {
        const double saved = mat(r, c);
        mat(r, c) = saved + eps;
        const double up = scalar_loss(p);
        mat(r, c) = saved - eps;
        const double down = scalar_loss(p);
        mat(r, c) = saved;
        const double fd = (up - down) / (2 * eps);
        CHECK(gmat(r, c) == Approx(fd).margin(1e-8));
    };
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) check_entry(p.embedding, grads.embedding, r, c);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) check_entry(p.projection, grads.projection, r, c);

    // bias gradient is the upstream itself
    CHECK(grads.bias[0] == Approx(0.7));
    CHECK(grads.bias[1] == Approx(-0.3));

    // alpha occurs twice: its row gradient is exactly twice beta's
    for (int c = 0; c < 2; ++c) CHECK(grads.embedding(0, c) == Approx(2.0 * grads.embedding(1, c)));
}

TEST_CASE("StudentGrads add_scaled and set_zero", "[student]") {
    const auto p = tiny_params();
    auto a = StudentGrads<double>::zero_like(p);
    auto b = StudentGrads<double>::zero_like(p);
    b.bias[0] = 2.0;
    b.projection(1, 1) = -4.0;
    a.add_scaled(b, 0.5);
    CHECK(a.bias[0] == 1.0);
    CHECK(a.projection(1, 1) == -2.0);
    a.set_zero();
    CHECK(a.bias.isZero());
    CHECK(a.projection.isZero());
}

TEST_CASE("checkpoint round trip preserves everything", "[student]") {
    const auto path = temp_file("student_roundtrip.ckpt");
    const auto params = init_student<float>(6, 3, 2, 5);
    const Vocabulary vocab({"alpha", "beta", "gamma", "delta"}, 2);
    save_student(path.string(), params, vocab, "cafe0123deadbeef");

    const StudentCheckpoint cp = load_student(path.string());
    CHECK(cp.config_hash == "cafe0123deadbeef");
    CHECK(cp.vocab.tokens() == vocab.tokens());
    CHECK(cp.vocab.oov_buckets() == 2);
    CHECK(cp.params.embedding == params.embedding);
    CHECK(cp.params.projection == params.projection);
    CHECK(cp.params.bias == params.bias);
}

TEST_CASE("checkpoint bytes are deterministic", "[student]") {
    const auto p1 = temp_file("student_det1.ckpt");
    const auto p2 = temp_file("student_det2.ckpt");
    const auto params = init_student<float>(5, 2, 2, 11);
    const Vocabulary vocab({"a", "b", "c"}, 2);
    save_student(p1.string(), params, vocab, "00ff");
    save_student(p2.string(), params, vocab, "00ff");
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("checkpoint loading failure modes", "[student]") {
    CHECK_THROWS_AS(load_student("/nonexistent/model.ckpt"), io_error);

    const auto path = temp_file("student_bad.ckpt");
    const auto params = init_student<float>(4, 2, 2, 3);
    const Vocabulary vocab({"a", "b"}, 2);
    save_student(path.string(), params, vocab, "beef");

    SECTION("truncated payload") {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 6);
        CHECK_THROWS_AS(load_student(path.string()), io_error);
    }
    SECTION("corrupted header json") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4); // inside the json header, after the length prefix
        f.write("####", 4);
        f.close();
        CHECK_THROWS_AS(load_student(path.string()), io_error);
    }
    SECTION("vocabulary size disagreeing with the embedding matrix") {
        CHECK_THROWS_AS(save_student(path.string(), params, Vocabulary({"a", "b", "c"}, 2), "beef"),
                        data_error);
    }
    SECTION("non-finite parameters are rejected at save") {
        auto bad = params;
        bad.projection(0, 0) = std::numeric_limits<float>::infinity();
        CHECK_THROWS_AS(save_student(path.string(), bad, vocab, "beef"), data_error);
    }
}

TEST_CASE("StudentEncoder wraps encode with the stored vocabulary", "[student]") {
    const auto params = init_student<float>(6, 3, 4, 21);
    const Vocabulary vocab({"alpha", "beta", "gamma", "delta"}, 2);
    const StudentEncoder enc(params, vocab);
    CHECK(enc.dim() == 4);
    const VecF direct = student_encode(params, vocab, "alpha gamma");
    const VecF via = enc.encode("alpha gamma");
    REQUIRE(via.size() == direct.size());
    for (Eigen::Index i = 0; i < via.size(); ++i) CHECK(via[i] == direct[i]);
}
