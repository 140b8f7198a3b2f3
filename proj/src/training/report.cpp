#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "v2v/binary_io.hpp"
#include "v2v/rng.hpp"
#include "v2v/training.hpp"

namespace v2v::training {
namespace {

using nlohmann::json;

json stats_to_json(const CosStats& s) {
    json bins = json::array();
    for (const auto& b : s.histogram) bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
    return {{"n", s.n}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"histogram", bins}};
}

CosStats stats_from_json(const json& j) {
    CosStats s;
    s.n = j.at("n").get<std::size_t>();
    s.mean = j.at("mean").get<double>();
    s.std = j.at("std").get<double>();
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
    for (const auto& b : j.at("histogram")) {
        s.histogram.push_back({b.at("lower").get<double>(), b.at("upper").get<double>(), b.at("count").get<std::size_t>()});
    }
    return s;
}

json config_to_json(const TrainConfig& c) {
    return {
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"val_frac", c.val_frac},
        {"seed", c.seed},
        {"learning_rate", c.adam.learning_rate},
        {"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"epsilon", c.adam.epsilon},
        {"hidden_widths", c.hidden_widths},
        {"dropout", c.dropout},
    };
}

TrainConfig config_from_json(const json& c) {
    TrainConfig cfg;
    cfg.epochs = c.at("epochs").get<std::size_t>();
    cfg.batch_size = c.at("batch_size").get<std::size_t>();
    cfg.val_frac = c.at("val_frac").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.adam.learning_rate = c.at("learning_rate").get<double>();
    cfg.adam.beta1 = c.at("beta1").get<double>();
    cfg.adam.beta2 = c.at("beta2").get<double>();
    cfg.adam.epsilon = c.at("epsilon").get<double>();
    cfg.hidden_widths = c.at("hidden_widths").get<std::vector<std::size_t>>();
    cfg.dropout = c.at("dropout").get<float>();
    return cfg;
}

}  // namespace

std::string checksum_hex(std::uint64_t crc) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(crc));
    return buf;
}

std::string report_to_json(const Report& report) {
    json epochs = json::array();
    for (const auto& m : report.history) {
        epochs.push_back({{"epoch", m.epoch},
                          {"train_loss", m.train_loss},
                          {"val_loss", m.val_loss},
                          {"val_mean_cosine", m.val_mean_cosine}});
    }
    json per_id = json::array();
    for (const auto& [id, cos] : report.per_id) per_id.push_back({{"id", id}, {"cosine", cos}});

    json j = {
        {"config", report.config ? config_to_json(*report.config) : json(nullptr)},
        {"prng", kPrngDescription},
        {"kernel_set", report.kernel_set},
        {"output_dim", report.output_dim},
        {"input_checksums", report.input_checksums},
        {"epochs", epochs},
        {"stats_split", report.stats_split},
        {"stats", report.stats ? stats_to_json(*report.stats) : json(nullptr)},
        {"per_id", per_id},
    };
    return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::HeaderMismatch, std::string("report is not valid JSON: ") + e.what());
    }
    try {
        Report r;
        if (!j.at("config").is_null()) r.config = config_from_json(j.at("config"));
        r.kernel_set = j.at("kernel_set").get<std::string>();
        r.output_dim = j.at("output_dim").get<std::size_t>();
        r.input_checksums = j.at("input_checksums").get<std::map<std::string, std::string>>();
        for (const auto& e : j.at("epochs")) {
            r.history.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                                 e.at("val_loss").get<double>(), e.at("val_mean_cosine").get<double>(), 0.0});
        }
        r.stats_split = j.at("stats_split").get<std::string>();
        if (!j.at("stats").is_null()) r.stats = stats_from_json(j.at("stats"));
        for (const auto& e : j.at("per_id")) {
            r.per_id.emplace_back(e.at("id").get<std::uint64_t>(), e.at("cosine").get<double>());
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::HeaderMismatch, std::string("report is missing fields: ") + e.what());
    }
}

void write_report(const Report& report, const std::filesystem::path& path) {
    io::write_file_atomic(path, report_to_json(report));
}

Report read_report(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return report_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string history_to_csv(std::span<const EpochMetrics> history) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,train_loss,val_loss,seconds\n";
    for (const auto& m : history) out << m.epoch << ',' << m.train_loss << ',' << m.val_loss << ',' << m.seconds << '\n';
    return out.str();
}

void write_history_csv(std::span<const EpochMetrics> history, const std::filesystem::path& path) {
    io::write_file_atomic(path, history_to_csv(history));
}

}  // namespace v2v::training
