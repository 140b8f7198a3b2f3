#include <chrono>
#include <cmath>
#include <string>

#include "v2v/rng.hpp"
#include "v2v/training.hpp"

namespace v2v::training {
namespace {

constexpr std::uint64_t kShuffleStream = 0x7a11;
constexpr std::uint64_t kMaskStream = 0x7a12;
constexpr std::size_t kEvalChunk = 256;

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); }

void gather(const data::PairDataset& pairs, std::span<const std::size_t> rows, Matrix& sources, Matrix& targets) {
    const std::size_t n = rows.size();
    if (sources.rows() != n || sources.cols() != pairs.d_in()) sources = Matrix(n, pairs.d_in());
    if (targets.rows() != n || targets.cols() != pairs.d_out()) targets = Matrix(n, pairs.d_out());
    for (std::size_t b = 0; b < n; ++b) {
        const auto s = pairs.source(rows[b]);
        const auto t = pairs.target(rows[b]);
        std::copy(s.begin(), s.end(), sources.row(b).begin());
        std::copy(t.begin(), t.end(), targets.row(b).begin());
    }
}

std::vector<std::size_t> rows_for(const data::PairDataset& pairs, std::span<const std::uint64_t> ids) {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (auto id : ids) rows.push_back(pairs.row_of(id));
    return rows;
}

struct ValidationScore {
    double loss = 0.0;
    double mean_cosine = 0.0;
};

ValidationScore score_rows(const nn::MlpModel& model, const data::PairDataset& pairs, std::span<const std::size_t> rows) {
    Matrix sources;
    Matrix targets;
    nn::ForwardTrace trace;
    double loss_sum = 0.0;
    double cos_sum = 0.0;
    for (std::size_t start = 0; start < rows.size(); start += kEvalChunk) {
        const auto chunk = rows.subspan(start, std::min(kEvalChunk, rows.size() - start));
        gather(pairs, chunk, sources, targets);
        nn::forward_batch(model, sources, nn::InferMode{}, trace);
        const Matrix& pred = trace.output();
        for (std::size_t b = 0; b < chunk.size(); ++b) {
            loss_sum += objective::cosine_loss(targets.row(b), pred.row(b)).value;
            cos_sum += cosine_similarity(targets.row(b), pred.row(b));
        }
    }
    const double n = static_cast<double>(rows.size());
    return {loss_sum / n, cos_sum / n};
}

}  // namespace

void validate_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) invalid("epochs must be at least 1");
    if (cfg.batch_size < 1) invalid("batch size must be at least 1");
    if (!(cfg.val_frac >= 0.0 && cfg.val_frac < 1.0)) invalid("validation fraction must be in [0, 1)");
    const auto& a = cfg.adam;
    if (!(std::isfinite(a.learning_rate) && a.learning_rate >= 0.0)) invalid("learning rate must be finite and >= 0");
    if (!(a.beta1 >= 0.0 && a.beta1 < 1.0) || !(a.beta2 >= 0.0 && a.beta2 < 1.0)) invalid("betas must be in [0, 1)");
    if (!(a.epsilon > 0.0 && std::isfinite(a.epsilon))) invalid("epsilon must be positive");
    if (!(cfg.dropout >= 0.0F && cfg.dropout < 1.0F)) invalid("dropout must be in [0, 1)");
    for (auto w : cfg.hidden_widths) {
        if (w == 0) invalid("hidden widths must be positive");
    }
}

std::vector<std::uint64_t> epoch_order(std::span<const std::uint64_t> train_ids, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::uint64_t> order(train_ids.begin(), train_ids.end());
    Xoshiro256 rng(counter_hash(seed, kShuffleStream, epoch));
    rng.shuffle(std::span<std::uint64_t>(order));
    return order;
}

TrainResult train(nn::MlpModel model, const data::PairDataset& pairs, const data::SplitIndices& split,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
    validate_config(cfg);
    if (model.input_dim() != pairs.d_in() || model.output_dim() != pairs.d_out()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "model is " + std::to_string(model.input_dim()) + "->" + std::to_string(model.output_dim()) +
                        ", dataset is " + std::to_string(pairs.d_in()) + "->" + std::to_string(pairs.d_out()));
    }
    if (split.train.empty()) invalid("training split is empty");
    if (split.validation.empty()) invalid("validation split is empty");
    if (cfg.batch_size > split.train.size()) {
        invalid("batch size " + std::to_string(cfg.batch_size) + " exceeds the training set (" +
                std::to_string(split.train.size()) + ")");
    }
    const auto val_rows = rows_for(pairs, split.validation);
    (void)rows_for(pairs, split.train);

    objective::AdamState adam{cfg.adam, 0, {}};
    const std::uint64_t mask_seed = counter_hash(cfg.seed, kMaskStream);
    const double n_train = static_cast<double>(split.train.size());

    nn::ForwardTrace trace;
    nn::Gradients grads = nn::Gradients::zeros_like(model);
    Matrix sources;
    Matrix targets;
    Matrix grad_out;
    std::vector<std::size_t> batch_rows;
    std::uint64_t step = 0;

    TrainResult result;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const auto order = epoch_order(split.train, cfg.seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            batch_rows.clear();
            for (std::size_t b = 0; b < count; ++b) batch_rows.push_back(pairs.row_of(order[start + b]));
            gather(pairs, batch_rows, sources, targets);

            nn::forward_batch(model, sources, nn::TrainMode{mask_seed, step}, trace);
            const double loss = objective::batch_loss_and_grad(targets, trace.output(), &grad_out);
            if (!std::isfinite(loss)) {
                throw Error(ErrorCode::NumericFailure, "non-finite loss at epoch " + std::to_string(epoch));
            }
            nn::backward_batch(model, trace, grad_out, grads);
            const auto slots = objective::parameter_slots(model, grads);
            objective::adam_step<float>(adam, slots);

            loss_sum += loss * static_cast<double>(count);
            ++step;
        }

        const auto val = score_rows(model, pairs, val_rows);
        if (!std::isfinite(val.loss)) {
            throw Error(ErrorCode::NumericFailure, "non-finite validation loss at epoch " + std::to_string(epoch));
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
        EpochMetrics metrics{epoch, loss_sum / n_train, val.loss, val.mean_cosine, elapsed.count()};
        result.history.push_back(metrics);
        if (on_epoch) on_epoch(metrics);
    }
    result.model = std::move(model);
    return result;
}

Matrix predict_batch(const nn::MlpModel& model, const Matrix& sources) {
    Matrix out(sources.rows(), model.output_dim());
    nn::ForwardTrace trace;
    for (std::size_t start = 0; start < sources.rows(); start += kEvalChunk) {
        const std::size_t count = std::min(kEvalChunk, sources.rows() - start);
        Matrix chunk(count, sources.cols());
        for (std::size_t b = 0; b < count; ++b) {
            const auto src = sources.row(start + b);
            std::copy(src.begin(), src.end(), chunk.row(b).begin());
        }
        nn::forward_batch(model, chunk, nn::InferMode{}, trace);
        for (std::size_t b = 0; b < count; ++b) {
            const auto row = trace.output().row(b);
            std::copy(row.begin(), row.end(), out.row(start + b).begin());
        }
    }
    return out;
}

Evaluation evaluate(const nn::MlpModel& model, const data::PairDataset& pairs, std::span<const std::uint64_t> ids,
                    std::size_t bins) {
    if (model.input_dim() != pairs.d_in() || model.output_dim() != pairs.d_out()) {
        throw Error(ErrorCode::DimensionMismatch, "model and dataset dimensions differ");
    }
    const auto rows = rows_for(pairs, ids);
    Evaluation eval;
    eval.per_id.reserve(ids.size());
    Matrix sources;
    Matrix targets;
    nn::ForwardTrace trace;
    for (std::size_t start = 0; start < rows.size(); start += kEvalChunk) {
        const auto chunk = std::span<const std::size_t>(rows).subspan(start, std::min(kEvalChunk, rows.size() - start));
        gather(pairs, chunk, sources, targets);
        nn::forward_batch(model, sources, nn::InferMode{}, trace);
        for (std::size_t b = 0; b < chunk.size(); ++b) {
            eval.per_id.emplace_back(ids[start + b], cosine_similarity(targets.row(b), trace.output().row(b)));
        }
    }
    std::vector<double> values;
    values.reserve(eval.per_id.size());
    for (const auto& [id, c] : eval.per_id) values.push_back(c);
    eval.stats = cos_stats(values, bins);
    return eval;
}

CosStats cos_stats(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "no cosine values to summarize");
    if (bins == 0) throw Error(ErrorCode::ConfigInvalid, "histogram needs at least one bin");
    CosStats s;
    s.n = values.size();
    s.min = values.front();
    s.max = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.n);
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.n));

    const double width = 2.0 / static_cast<double>(bins);
    s.histogram.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        s.histogram[b].lower = -1.0 + width * static_cast<double>(b);
        s.histogram[b].upper = b + 1 == bins ? 1.0 : -1.0 + width * static_cast<double>(b + 1);
    }
    for (double v : values) {
        const double pos = (std::clamp(v, -1.0, 1.0) + 1.0) / width;
        const auto bin = std::min(bins - 1, static_cast<std::size_t>(pos));
        s.histogram[bin].count += 1;
    }
    return s;
}

}  // namespace v2v::training
