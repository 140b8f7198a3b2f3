#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "v2v/data/pairs.hpp"
#include "v2v/data/split.hpp"
#include "v2v/nn.hpp"
#include "v2v/objective.hpp"

namespace v2v::training {

struct TrainConfig {
    std::size_t epochs = 75;
    std::size_t batch_size = 32;
    double val_frac = data::kDefaultValidationFraction;
    std::uint64_t seed = 0;
    objective::AdamConfig adam;
    std::vector<std::size_t> hidden_widths{nn::kDefaultHiddenWidth, nn::kDefaultHiddenWidth, nn::kDefaultHiddenWidth};
    float dropout = nn::kDefaultDropout;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws ConfigInvalid when a field is out of range.
void validate_config(const TrainConfig& cfg);

struct EpochMetrics {
    std::size_t epoch = 0;      // 1-based
    double train_loss = 0.0;    // mean per-example loss over the epoch, dropout active
    double val_loss = 0.0;      // mean per-example loss on the validation split, inference mode
    double val_mean_cosine = 0.0;
    double seconds = 0.0;

    friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
    nn::MlpModel model;
    std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch Adam on the cosine loss. Each epoch shuffles the training ids
/// from (seed, epoch), walks them in batches (the final short batch is kept),
/// then scores the validation split in inference mode. Bit-reproducible for a
/// fixed kernel set. Throws ConfigInvalid, DimensionMismatch, UnknownId,
/// NumericFailure.
TrainResult train(nn::MlpModel model, const data::PairDataset& pairs, const data::SplitIndices& split,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// The order in which an epoch visits the training ids.
std::vector<std::uint64_t> epoch_order(std::span<const std::uint64_t> train_ids, std::uint64_t seed, std::size_t epoch);

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;

    friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct CosStats {
    double mean = 0.0;
    double std = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
    std::vector<HistogramBin> histogram;
    std::size_t n = 0;

    friend bool operator==(const CosStats&, const CosStats&) = default;
};

inline constexpr std::size_t kDefaultHistogramBins = 50;

/// Summary of cosine values in [-1, 1] with uniform bins over [-1, 1].
/// Throws EmptyInput.
CosStats cos_stats(std::span<const double> values, std::size_t bins = kDefaultHistogramBins);

struct Evaluation {
    CosStats stats;
    std::vector<std::pair<std::uint64_t, double>> per_id;  // in the order of `ids`
};

/// Cosine similarity between each target and the model's inference-mode
/// prediction. Throws UnknownId, DimensionMismatch.
Evaluation evaluate(const nn::MlpModel& model, const data::PairDataset& pairs, std::span<const std::uint64_t> ids,
                    std::size_t bins = kDefaultHistogramBins);

/// Inference-mode predictions for every row of `sources` (rows x input_dim).
Matrix predict_batch(const nn::MlpModel& model, const Matrix& sources);

struct Report {
    std::optional<TrainConfig> config;  // absent for evaluation-only reports
    std::vector<EpochMetrics> history;
    std::optional<CosStats> stats;
    std::string stats_split;  // which ids `stats` covers
    std::vector<std::pair<std::uint64_t, double>> per_id;
    std::map<std::string, std::string> input_checksums;  // file name -> CRC-64 hex
    std::size_t output_dim = 0;
    std::string kernel_set;

    friend bool operator==(const Report&, const Report&) = default;
};

/// JSON report. Wall-clock times are left out so identical runs give
/// identical bytes; they go to the CSV history instead.
std::string report_to_json(const Report& report);
Report report_from_json(std::string_view text);
void write_report(const Report& report, const std::filesystem::path& path);
Report read_report(const std::filesystem::path& path);

/// "epoch,train_loss,val_loss,seconds" rows.
std::string history_to_csv(std::span<const EpochMetrics> history);
void write_history_csv(std::span<const EpochMetrics> history, const std::filesystem::path& path);

std::string checksum_hex(std::uint64_t crc);

}  // namespace v2v::training
