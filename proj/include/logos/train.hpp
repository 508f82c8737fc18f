#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "logos/embedding.hpp"
#include "logos/error.hpp"
#include "logos/eval.hpp"
#include "logos/rng.hpp"
#include "logos/student.hpp"
#include "logos/text.hpp"

namespace logos {

enum class Objective { Distill, Simcse };

inline const char* objective_name(Objective o) { return o == Objective::Distill ? "distill" : "simcse"; }

inline Objective parse_objective(std::string_view s) {
    if (s == "distill") return Objective::Distill;
    if (s == "simcse") return Objective::Simcse;
    throw data_error("unknown objective: " + std::string(s));
}

struct TrainConfig {
    int batch_size = 128;
    double learning_rate = 2e-5;
    std::uint64_t warmup_steps = 2000;
    int epochs = 1;
    int max_seq_tokens = 128;
    std::uint64_t eval_every_steps = 500;
    std::uint64_t seed = 0;
    Objective objective = Objective::Distill;
    double simcse_temperature = 0.05;
};

inline void validate(const TrainConfig& cfg) {
    if (cfg.batch_size <= 0) throw data_error("train config: batch_size must be positive");
    if (!(cfg.learning_rate > 0.0)) throw data_error("train config: learning_rate must be positive");
    if (cfg.epochs <= 0) throw data_error("train config: epochs must be positive");
    if (cfg.max_seq_tokens <= 0) throw data_error("train config: max_seq_tokens must be positive");
    if (cfg.eval_every_steps == 0) throw data_error("train config: eval_every_steps must be positive");
    if (!(cfg.simcse_temperature > 0.0)) throw data_error("train config: simcse_temperature must be positive");
}

/// Linear warmup 0 -> lr over warmup_steps, then linear decay to 0 at
/// total_steps. Step 0 is always 0.
inline double lr_at(std::uint64_t step, double lr, std::uint64_t warmup_steps, std::uint64_t total_steps) {
    if (total_steps == 0) throw data_error("lr_at: total_steps must be positive");
    if (total_steps < warmup_steps) throw data_error("lr_at: total_steps below warmup_steps");
    if (step == 0) return 0.0;
    if (step <= warmup_steps)
        return lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    if (step >= total_steps) return 0.0;
    return lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup_steps);
}

inline double lr_at(std::uint64_t step, const TrainConfig& cfg, std::uint64_t total_steps) {
    return lr_at(step, cfg.learning_rate, cfg.warmup_steps, total_steps);
}

template <typename S>
struct LossGrad {
    double loss = 0.0;
    StudentGrads<S> grads;
};

/// Distillation loss over a batch: mean over pairs of
/// msd(teacher, student(source)) + msd(teacher, student(target)), where msd
/// is the squared difference averaged over vector dimensions. Gradients are
/// exact and accumulated over the whole batch.
template <typename S>
LossGrad<S> distill_loss(const std::vector<ParallelPair>& batch,
                         const std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>>& teacher_vectors,
                         const StudentParams<S>& params, const Vocabulary& vocab, int max_tokens = 0) {
    using Vec = typename StudentParams<S>::Vec;
    if (batch.empty()) throw data_error("distill_loss: empty batch");
    if (teacher_vectors.size() != batch.size()) throw data_error("distill_loss: teacher vector count mismatch");
    const int d = params.d_out();
    for (const auto& t : teacher_vectors) {
        if (t.size() != d) throw data_error("distill_loss: teacher dimension mismatch");
    }

    LossGrad<S> out;
    out.grads = StudentGrads<S>::zero_like(params);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const double up_scale = 2.0 * inv_b / static_cast<double>(d);

    double loss = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const Vec& teacher = teacher_vectors[j];
        for (const std::string* text : {&batch[j].source, &batch[j].target}) {
            const Vec pred = student_encode(params, vocab, *text, max_tokens);
            double sq = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = static_cast<double>(pred[k]) - static_cast<double>(teacher[k]);
                sq += diff * diff;
            }
            loss += inv_b * sq / static_cast<double>(d);
            const Vec upstream = static_cast<S>(up_scale) * (pred - teacher);
            student_encode_backward(params, vocab, *text, upstream, out.grads, max_tokens);
        }
    }
    out.loss = loss;
    return out;
}

/// Loss-only distillation objective (used for holdout MSE).
template <typename S>
double distill_mse(const std::vector<ParallelPair>& pairs,
                   const std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>>& teacher_vectors,
                   const StudentParams<S>& params, const Vocabulary& vocab, int max_tokens = 0) {
    if (pairs.empty()) throw data_error("distill_mse: empty pair list");
    if (teacher_vectors.size() != pairs.size()) throw data_error("distill_mse: teacher vector count mismatch");
    const int d = params.d_out();
    double loss = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        for (const std::string* text : {&pairs[j].source, &pairs[j].target}) {
            const auto pred = student_encode(params, vocab, *text, max_tokens);
            for (int k = 0; k < d; ++k) {
                const double diff = static_cast<double>(pred[k]) - static_cast<double>(teacher_vectors[j][k]);
                loss += diff * diff / static_cast<double>(d);
            }
        }
    }
    return loss / static_cast<double>(pairs.size());
}

/// Symmetric in-batch contrastive loss computed from a precomputed cosine
/// similarity matrix (rows: sources, cols: targets, diagonal: positives).
/// Logits are sims / temperature; both softmax directions are averaged.
inline double simcse_loss_from_similarity(const Eigen::MatrixXd& sims, double temperature) {
    const Eigen::Index n = sims.rows();
    if (n < 2) throw data_error("simcse: need at least 2 pairs for in-batch negatives");
    if (sims.cols() != n) throw data_error("simcse: similarity matrix must be square");
    if (!(temperature > 0.0)) throw data_error("simcse: temperature must be positive");

    const Eigen::MatrixXd logits = sims / temperature;
    auto log_softmax_nll = [](const Eigen::VectorXd& row, Eigen::Index label) {
        const double mx = row.maxCoeff();
        double sum = 0.0;
        for (Eigen::Index k = 0; k < row.size(); ++k) sum += std::exp(row[k] - mx);
        return std::log(sum) + mx - row[label];
    };

    double fwd = 0.0, bwd = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        fwd += log_softmax_nll(logits.row(i).transpose(), i);
        bwd += log_softmax_nll(logits.col(i), i);
    }
    return 0.5 * (fwd + bwd) / static_cast<double>(n);
}

/// In-batch contrastive loss over encoded pair texts, with exact gradients
/// through the cosine similarities back to all student parameters.
template <typename S>
LossGrad<S> simcse_loss(const std::vector<ParallelPair>& batch, const StudentParams<S>& params,
                        const Vocabulary& vocab, double temperature, int max_tokens = 0) {
    using Vec = typename StudentParams<S>::Vec;
    const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
    if (n < 2) throw data_error("simcse: need at least 2 pairs for in-batch negatives");
    if (!(temperature > 0.0)) throw data_error("simcse: temperature must be positive");

    std::vector<Eigen::VectorXd> u(batch.size()), v(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        u[i] = student_encode(params, vocab, batch[i].source, max_tokens).template cast<double>();
        v[i] = student_encode(params, vocab, batch[i].target, max_tokens).template cast<double>();
        if (u[i].norm() == 0.0 || v[i].norm() == 0.0)
            throw data_error("simcse: zero-norm embedding in batch");
    }

    Eigen::MatrixXd sims(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) sims(i, j) = u[i].dot(v[j]) / (u[i].norm() * v[j].norm());

    LossGrad<S> out;
    out.loss = simcse_loss_from_similarity(sims, temperature);
    out.grads = StudentGrads<S>::zero_like(params);

    const Eigen::MatrixXd logits = sims / temperature;
    auto softmax = [](Eigen::VectorXd row) {
        const double mx = row.maxCoeff();
        row = (row.array() - mx).exp();
        return Eigen::VectorXd(row / row.sum());
    };

    // dL/dsims(i,j) = [(p_ij - delta_ij) + (q_ij - delta_ij)] / (2 n tau),
    // p: row softmax (source -> target), q: column softmax.
    Eigen::MatrixXd dsims(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd p = softmax(logits.row(i).transpose());
        for (Eigen::Index j = 0; j < n; ++j) dsims(i, j) = p[j] - (i == j ? 1.0 : 0.0);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd q = softmax(logits.col(j));
        for (Eigen::Index i = 0; i < n; ++i) dsims(i, j) += q[i] - (i == j ? 1.0 : 0.0);
    }
    dsims /= 2.0 * static_cast<double>(n) * temperature;

    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd du = Eigen::VectorXd::Zero(u[i].size());
        for (Eigen::Index j = 0; j < n; ++j) {
            const double nu = u[i].norm(), nv = v[j].norm();
            du += dsims(i, j) * (v[j] / (nu * nv) - sims(i, j) * u[i] / (nu * nu));
        }
        const Vec upstream = du.cast<S>();
        student_encode_backward(params, vocab, batch[static_cast<std::size_t>(i)].source, upstream, out.grads,
                                max_tokens);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd dv = Eigen::VectorXd::Zero(v[j].size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double nu = u[i].norm(), nv = v[j].norm();
            dv += dsims(i, j) * (u[i] / (nu * nv) - sims(i, j) * v[j] / (nv * nv));
        }
        const Vec upstream = dv.cast<S>();
        student_encode_backward(params, vocab, batch[static_cast<std::size_t>(j)].target, upstream, out.grads,
                                max_tokens);
    }
    return out;
}

/// Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
template <typename S>
struct AdamState {
    StudentGrads<S> m;
    StudentGrads<S> v;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState zero_like(const StudentParams<S>& p) {
        AdamState st;
        st.m = StudentGrads<S>::zero_like(p);
        st.v = StudentGrads<S>::zero_like(p);
        return st;
    }
};

template <typename S>
void adam_step(StudentParams<S>& params, const StudentGrads<S>& grads, AdamState<S>& state, double lr) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto update = [&](auto& p, const auto& g, auto& m, auto& v, const char* name) {
        if (!g.allFinite()) throw data_error(std::string("adam: non-finite gradient in ") + name);
        m = static_cast<S>(state.beta1) * m + static_cast<S>(1.0 - state.beta1) * g;
        v = static_cast<S>(state.beta2) * v.eval() + static_cast<S>(1.0 - state.beta2) * g.cwiseProduct(g);
        p.array() -= static_cast<S>(lr) * (m.array() / static_cast<S>(bc1)) /
                     ((v.array() / static_cast<S>(bc2)).sqrt() + static_cast<S>(state.epsilon));
    };
    update(params.embedding, grads.embedding, state.m.embedding, state.v.embedding, "embedding");
    update(params.projection, grads.projection, state.m.projection, state.v.projection, "projection");
    update(params.bias, grads.bias, state.m.bias, state.v.bias, "bias");
}

struct TrainLogRow {
    std::uint64_t step = 0;
    int epoch = 0;
    std::optional<double> loss;
    double lr = 0.0;
    std::optional<double> holdout_mse;
    std::optional<double> holdout_acc;
    std::optional<double> sts_rho;
    std::optional<double> composite;
};

struct TrainResult {
    StudentParams<float> best_params;
    std::uint64_t best_step = 0;
    double best_composite = -std::numeric_limits<double>::infinity();
    std::optional<double> step0_mse;
    std::optional<double> best_mse;
    std::uint64_t total_steps = 0;
    std::vector<TrainLogRow> log;
};

namespace detail {

/// Encoder view over borrowed parameters (no copy); used for holdout/STS
/// evaluation against the in-training state.
class ParamsViewEncoder : public Encoder {
public:
    ParamsViewEncoder(const StudentParams<float>& p, const Vocabulary& v, int max_tokens)
        : p_(p), v_(v), max_tokens_(max_tokens) {}
    int dim() const override { return p_.d_out(); }
    VecF encode(std::string_view text) const override { return student_encode(p_, v_, text, max_tokens_); }

private:
    const StudentParams<float>& p_;
    const Vocabulary& v_;
    int max_tokens_;
};

inline std::string pair_key(const ParallelPair& p) { return p.source + '\x1f' + p.target; }

} // namespace detail

/// Distillation / contrastive training loop: per-epoch seeded shuffle, Adam
/// with the linear warmup/decay schedule (global step t = 1..total), one log
/// row per step, and a full evaluation at step 0, every eval_every_steps,
/// and at the final step. The composite score is the mean of the available
/// metrics: holdout translation-search accuracy, 1/(1 + holdout MSE)
/// (distillation only), and the unscaled mean STS Spearman when an STS set
/// is given. On return params hold the best-composite snapshot (strictly
/// greater wins; earliest step kept on ties), which is also returned.
inline TrainResult train(const TrainConfig& cfg, const std::vector<ParallelPair>& data, const Encoder* teacher,
                         StudentParams<float>& params, const Vocabulary& vocab,
                         const std::vector<ParallelPair>& holdout, const std::vector<StsItem>* sts = nullptr) {
    validate(cfg);
    if (data.empty()) throw data_error("train: empty dataset");
    if (holdout.empty()) throw data_error("train: empty holdout");
    const bool distill = cfg.objective == Objective::Distill;
    if (distill && teacher == nullptr) throw data_error("train: distillation requires a teacher encoder");
    if (distill && teacher->dim() != params.d_out())
        throw data_error("train: teacher/student dimension mismatch");

    {
        std::unordered_set<std::string> train_keys;
        train_keys.reserve(data.size());
        for (const ParallelPair& p : data) train_keys.insert(detail::pair_key(p));
        for (const ParallelPair& p : holdout) {
            if (train_keys.count(detail::pair_key(p)) > 0)
                throw data_error("train: holdout pair also present in training data: " + p.source);
        }
    }

    // Batch sizes are fixed by (n, batch_size) alone, so every epoch has the
    // same step count. Contrastive batches need >= 2 pairs; a trailing
    // singleton batch is dropped for that objective.
    const std::size_t n = data.size();
    std::size_t steps_per_epoch = (n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                  static_cast<std::size_t>(cfg.batch_size);
    const bool drop_tail = !distill && cfg.batch_size > 1 &&
                           n % static_cast<std::size_t>(cfg.batch_size) == 1 && steps_per_epoch > 1;
    if (drop_tail) --steps_per_epoch;
    if (!distill && n < 2) throw data_error("train: contrastive objective needs at least 2 pairs");
    const std::uint64_t total_steps = steps_per_epoch * static_cast<std::uint64_t>(cfg.epochs);
    if (total_steps == 0) throw data_error("train: zero training steps");
    if (total_steps < cfg.warmup_steps)
        throw data_error("train: warmup_steps exceeds total training steps");

    // Teacher outputs are frozen; encode each distinct source text once.
    std::unordered_map<std::string, VecF> teacher_cache;
    auto teach = [&](const std::string& text) -> const VecF& {
        auto it = teacher_cache.find(text);
        if (it == teacher_cache.end()) it = teacher_cache.emplace(text, teacher->encode(text)).first;
        return it->second;
    };

    std::vector<VecF> holdout_teacher;
    if (distill) {
        holdout_teacher.reserve(holdout.size());
        for (const ParallelPair& p : holdout) holdout_teacher.push_back(teach(p.source));
    }

    TrainResult result;
    result.total_steps = total_steps;

    auto evaluate = [&](TrainLogRow& row) {
        MatF src(static_cast<Eigen::Index>(holdout.size()), params.d_out());
        MatF tgt(static_cast<Eigen::Index>(holdout.size()), params.d_out());
        for (std::size_t i = 0; i < holdout.size(); ++i) {
            src.row(static_cast<Eigen::Index>(i)) =
                student_encode(params, vocab, holdout[i].source, cfg.max_seq_tokens).transpose();
            tgt.row(static_cast<Eigen::Index>(i)) =
                student_encode(params, vocab, holdout[i].target, cfg.max_seq_tokens).transpose();
        }
        row.holdout_acc = translation_search_accuracy(src, tgt);

        double sum = *row.holdout_acc;
        int count = 1;
        if (distill) {
            row.holdout_mse = distill_mse<float>(holdout, holdout_teacher, params, vocab, cfg.max_seq_tokens);
            sum += 1.0 / (1.0 + *row.holdout_mse);
            ++count;
        }
        if (sts != nullptr) {
            detail::ParamsViewEncoder enc(params, vocab, cfg.max_seq_tokens);
            row.sts_rho = sts_eval(*sts, enc).mean;
            sum += *row.sts_rho / 100.0;
            ++count;
        }
        row.composite = sum / count;

        if (*row.composite > result.best_composite) {
            result.best_composite = *row.composite;
            result.best_step = row.step;
            result.best_params = params;
            result.best_mse = row.holdout_mse;
        }
    };

    {
        TrainLogRow row;
        row.step = 0;
        row.epoch = 0;
        row.lr = lr_at(0, cfg, total_steps);
        evaluate(row);
        result.step0_mse = row.holdout_mse;
        result.log.push_back(row);
    }

    Rng rng(cfg.seed);
    AdamState<float> adam = AdamState<float>::zero_like(params);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::uint64_t step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t b = 0; b < steps_per_epoch; ++b) {
            const std::size_t lo = b * static_cast<std::size_t>(cfg.batch_size);
            const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(cfg.batch_size));
            std::vector<ParallelPair> batch;
            batch.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) batch.push_back(data[order[i]]);

            LossGrad<float> lg;
            if (distill) {
                std::vector<Eigen::VectorXf> tv;
                tv.reserve(batch.size());
                for (const ParallelPair& p : batch) tv.push_back(teach(p.source));
                lg = distill_loss<float>(batch, tv, params, vocab, cfg.max_seq_tokens);
            } else {
                lg = simcse_loss<float>(batch, params, vocab, cfg.simcse_temperature, cfg.max_seq_tokens);
            }

            ++step;
            const double lr = lr_at(step, cfg, total_steps);
            adam_step(params, lg.grads, adam, lr);

            TrainLogRow row;
            row.step = step;
            row.epoch = epoch;
            row.loss = lg.loss;
            row.lr = lr;
            if (step % cfg.eval_every_steps == 0 || step == total_steps) evaluate(row);
            result.log.push_back(row);
        }
    }

    params = result.best_params;
    return result;
}

} // namespace logos
