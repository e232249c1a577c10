#include "coe/records.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coe/error.hpp"

namespace coe {

using nlohmann::json;

namespace {

std::string noise_kind_id(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::NoStrategy: return "no_strategy";
    case NoiseKind::UnknownStrategy: return "unknown_strategy";
    case NoiseKind::Unparseable: return "unparseable";
    }
    return "unparseable";
}

NoiseKind noise_kind_from_id(const std::string& id) {
    if (id == "no_strategy") return NoiseKind::NoStrategy;
    if (id == "unknown_strategy") return NoiseKind::UnknownStrategy;
    if (id == "unparseable") return NoiseKind::Unparseable;
    throw Error("unknown noise kind '" + id + "'");
}

json prediction_to_json(const EvalRecord& r) {
    if (!r.prediction) {
        return json{{"outcome", "backend_failure"}, {"error", r.backend_error}};
    }
    if (const ValidPrediction* v = r.prediction->valid()) {
        json j{{"outcome", "valid"},
               {"strategy", std::string(strategy_id(v->strategy))},
               {"response_text", v->response_text}};
        if (v->level) j["level"] = std::string(level_id(*v->level));
        else j["level"] = nullptr;
        return j;
    }
    const NoisePrediction* n = r.prediction->noise();
    return json{{"outcome", "noise"},
                {"kind", noise_kind_id(n->kind)},
                {"label", n->label},
                {"raw_excerpt", n->raw_excerpt}};
}

void prediction_from_json(const json& j, EvalRecord& r) {
    const std::string outcome = j.at("outcome").get<std::string>();
    if (outcome == "backend_failure") {
        r.prediction = std::nullopt;
        r.backend_error = j.at("error").get<std::string>();
        return;
    }
    if (outcome == "valid") {
        ValidPrediction v;
        auto strategy = strategy_from_id(j.at("strategy").get<std::string>());
        if (!strategy) throw Error("invalid strategy id in record");
        v.strategy = *strategy;
        if (!j.at("level").is_null()) {
            auto level = level_from_id(j.at("level").get<std::string>());
            if (!level) throw Error("invalid level id in record");
            v.level = *level;
        }
        v.response_text = j.at("response_text").get<std::string>();
        r.prediction = ParsedPrediction{std::move(v)};
        return;
    }
    if (outcome == "noise") {
        NoisePrediction n;
        n.kind = noise_kind_from_id(j.at("kind").get<std::string>());
        n.label = j.at("label").get<std::string>();
        n.raw_excerpt = j.at("raw_excerpt").get<std::string>();
        r.prediction = ParsedPrediction{std::move(n)};
        return;
    }
    throw Error("unknown prediction outcome '" + outcome + "'");
}

} // namespace

std::string records_header_line(const RecordsFile& file) {
    json conditions = json::array();
    for (CoECondition c : file.conditions) conditions.push_back(std::string(condition_id(c)));
    json j{{"v", 1},
           {"type", "header"},
           {"manifest_digest", file.manifest_digest},
           {"sampler", file.sampler_id},
           {"template_version", file.template_version},
           {"conditions", conditions},
           {"n_pairs", file.n_pairs}};
    return j.dump();
}

std::string record_line(const EvalRecord& r) {
    json j{{"v", 1},
           {"type", "record"},
           {"pair_id", r.pair_id},
           {"condition", std::string(condition_id(r.condition))},
           {"gold_strategy", std::string(strategy_id(r.gold_strategy))},
           {"gold_level", std::string(level_id(r.gold_level))},
           {"completion_key", r.completion_key},
           {"prediction", prediction_to_json(r)}};
    return j.dump();
}

void write_records(const RecordsFile& file, const std::string& path) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot open for writing");
    out << records_header_line(file) << '\n';
    for (const EvalRecord& r : file.records) out << record_line(r) << '\n';
    out.flush();
    if (!out) throw Error(path + ": write failed");
}

RecordsFile read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path + ": cannot open records file");

    RecordsFile file;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        try {
            if (j.at("v").get<int>() != 1) {
                throw Error("unsupported records schema version");
            }
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                if (have_header) throw Error("duplicate header line");
                file.manifest_digest = j.at("manifest_digest").get<std::string>();
                file.sampler_id = j.at("sampler").get<std::string>();
                file.template_version = j.at("template_version").get<std::string>();
                for (const auto& id : j.at("conditions")) {
                    auto c = condition_from_id(id.get<std::string>());
                    if (!c) throw Error("unknown condition '" + id.get<std::string>() + "'");
                    file.conditions.push_back(*c);
                }
                file.n_pairs = j.at("n_pairs").get<std::size_t>();
                have_header = true;
            } else if (type == "record") {
                if (!have_header) throw Error("record line before header");
                EvalRecord r;
                r.pair_id = j.at("pair_id").get<std::string>();
                auto condition = condition_from_id(j.at("condition").get<std::string>());
                if (!condition) throw Error("unknown condition in record");
                r.condition = *condition;
                auto gold = strategy_from_id(j.at("gold_strategy").get<std::string>());
                if (!gold) throw Error("unknown gold_strategy in record");
                r.gold_strategy = *gold;
                auto gold_level = level_from_id(j.at("gold_level").get<std::string>());
                if (!gold_level) throw Error("unknown gold_level in record");
                r.gold_level = *gold_level;
                r.completion_key = j.at("completion_key").get<std::string>();
                prediction_from_json(j.at("prediction"), r);
                file.records.push_back(std::move(r));
            } else {
                throw Error("unknown line type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw Error(path + ":" + std::to_string(line_no) +
                        ": missing or mistyped field: " + e.what());
        } catch (const Error& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw Error(path + ": missing header line");
    return file;
}

} // namespace coe
