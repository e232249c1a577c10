#include "coe/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coe/error.hpp"
#include "coe/hash.hpp"

namespace coe {

using nlohmann::json;

namespace {

json targets_to_json(const SamplingPlan& plan) {
    json j = json::object();
    for (EmpathyStrategy s : kAllStrategies) {
        auto it = plan.target_per_strategy.find(s);
        if (it == plan.target_per_strategy.end() || it->second.all) {
            j[std::string(strategy_id(s))] = "all";
        } else {
            j[std::string(strategy_id(s))] = it->second.count;
        }
    }
    return j;
}

SampleTarget target_from_json(const json& value, const std::string& key) {
    if (value.is_string()) {
        if (value.get<std::string>() == "all") return SampleTarget::take_all();
        throw Error("sampling target for '" + key + "' must be a count or \"all\"");
    }
    if (value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0)) {
        return SampleTarget::take(value.get<std::size_t>());
    }
    throw Error("sampling target for '" + key + "' must be a non-negative count or \"all\"");
}

} // namespace

void RunManifest::validate() const {
    for (EmpathyStrategy s : kAllStrategies) {
        auto it = dataset_files.find(s);
        if (it == dataset_files.end() || it->second.empty()) {
            throw Error(std::string("manifest: no dataset file for strategy '") +
                        std::string(strategy_id(s)) + "'");
        }
    }
    if (conditions.empty()) throw Error("manifest: conditions list is empty");
    std::set<CoECondition> seen;
    for (CoECondition c : conditions) {
        if (!seen.insert(c).second) {
            throw Error(std::string("manifest: duplicate condition '") +
                        std::string(condition_id(c)) + "'");
        }
    }
    generation.validate();
    if (backend.kind != "live" && backend.kind != "replay" && backend.kind != "mock") {
        throw Error("manifest: backend kind must be live, replay or mock");
    }
    if (backend.kind == "live" && backend.base_url.empty()) {
        throw Error("manifest: live backend requires base_url");
    }
    if (backend.kind == "replay" && backend.cache_path.empty()) {
        throw Error("manifest: replay backend requires cache_path");
    }
    if (backend.max_in_flight < 1) throw Error("manifest: max_in_flight must be >= 1");
    if (backend.retry_max_attempts < 1) throw Error("manifest: retry_max_attempts must be >= 1");
    if (output_dir.empty()) throw Error("manifest: output_dir is empty");
}

RunManifest manifest_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(std::string("manifest: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("v").get<int>() != 1) throw Error("manifest: unsupported schema version");
        RunManifest m;

        const json& dataset = j.at("dataset");
        for (EmpathyStrategy s : kAllStrategies) {
            const std::string key(strategy_id(s));
            m.dataset_files[s] = dataset.at(key).get<std::string>();
        }

        const json& sampling = j.at("sampling");
        m.sampling.rng_seed = sampling.at("seed").get<std::uint64_t>();
        const json& targets = sampling.at("targets");
        for (EmpathyStrategy s : kAllStrategies) {
            const std::string key(strategy_id(s));
            if (targets.contains(key)) {
                m.sampling.target_per_strategy[s] = target_from_json(targets.at(key), key);
            } else {
                m.sampling.target_per_strategy[s] = SampleTarget::take_all();
            }
        }

        m.conditions.clear();
        for (const json& c : j.at("conditions")) {
            auto condition = condition_from_id(c.get<std::string>());
            if (!condition) {
                throw Error("manifest: unknown condition '" + c.get<std::string>() + "'");
            }
            m.conditions.push_back(*condition);
        }

        if (j.contains("generation")) {
            const json& g = j.at("generation");
            if (g.contains("model_id")) m.generation.model_id = g.at("model_id").get<std::string>();
            if (g.contains("temperature")) m.generation.temperature = g.at("temperature").get<double>();
            if (g.contains("top_p")) m.generation.top_p = g.at("top_p").get<double>();
            if (g.contains("frequency_penalty")) {
                m.generation.frequency_penalty = g.at("frequency_penalty").get<double>();
            }
            if (g.contains("presence_penalty")) {
                m.generation.presence_penalty = g.at("presence_penalty").get<double>();
            }
            if (g.contains("max_tokens")) m.generation.max_tokens = g.at("max_tokens").get<int>();
        }

        const json& b = j.at("backend");
        m.backend.kind = b.at("kind").get<std::string>();
        if (b.contains("base_url")) m.backend.base_url = b.at("base_url").get<std::string>();
        if (b.contains("cache_path")) m.backend.cache_path = b.at("cache_path").get<std::string>();
        if (b.contains("strict_replay")) m.backend.strict_replay = b.at("strict_replay").get<bool>();
        if (b.contains("max_in_flight")) m.backend.max_in_flight = b.at("max_in_flight").get<int>();
        if (b.contains("retry_max_attempts")) {
            m.backend.retry_max_attempts = b.at("retry_max_attempts").get<int>();
        }
        if (b.contains("retry_initial_backoff_ms")) {
            m.backend.retry_initial_backoff_ms = b.at("retry_initial_backoff_ms").get<int>();
        }
        if (b.contains("retry_max_backoff_ms")) {
            m.backend.retry_max_backoff_ms = b.at("retry_max_backoff_ms").get<int>();
        }
        if (b.contains("timeout_ms")) m.backend.timeout_ms = b.at("timeout_ms").get<int>();
        if (b.contains("mock_script")) {
            const json& script = b.at("mock_script");
            if (script.is_object()) {
                for (const auto& [tag, text] : script.items()) {
                    m.backend.mock_script[tag] = text.get<std::string>();
                }
            } else {
                throw Error("manifest: mock_script must be an object of tag -> completion");
            }
        }
        if (b.contains("mock_script_file")) {
            // Merged into mock_script by load_manifest after path resolution.
            m.backend.mock_script_file = b.at("mock_script_file").get<std::string>();
        }
        if (b.contains("mock_default")) {
            m.backend.mock_default = b.at("mock_default").get<std::string>();
        }

        m.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("template_version") && !j.at("template_version").is_null()) {
            m.template_version_pin = j.at("template_version").get<std::string>();
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw Error(std::string("manifest: missing or mistyped field: ") + e.what());
    }
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path + ": cannot open manifest");
    std::ostringstream buf;
    buf << in.rdbuf();
    RunManifest m = manifest_from_json(buf.str());

    const auto base = std::filesystem::path(path).parent_path();
    auto rebase = [&](std::string& p) {
        if (p.empty()) return;
        std::filesystem::path fp(p);
        if (fp.is_relative()) p = (base / fp).lexically_normal().string();
    };
    for (EmpathyStrategy s : kAllStrategies) rebase(m.dataset_files[s]);
    rebase(m.backend.cache_path);
    rebase(m.output_dir);
    if (!m.backend.mock_script_file.empty()) {
        rebase(m.backend.mock_script_file);
        std::ifstream script_in(m.backend.mock_script_file, std::ios::binary);
        if (!script_in) throw Error(m.backend.mock_script_file + ": cannot open mock script");
        json script;
        try {
            script = json::parse(script_in);
        } catch (const json::exception& e) {
            throw Error(m.backend.mock_script_file + ": invalid JSON: " + e.what());
        }
        for (const auto& [tag, text] : script.items()) {
            m.backend.mock_script[tag] = text.get<std::string>();
        }
    }
    return m;
}

std::string manifest_canonical_json(const RunManifest& m) {
    json conditions = json::array();
    for (CoECondition c : m.conditions) conditions.push_back(std::string(condition_id(c)));

    json dataset = json::object();
    for (EmpathyStrategy s : kAllStrategies) {
        dataset[std::string(strategy_id(s))] = m.dataset_files.at(s);
    }

    json backend{{"kind", m.backend.kind},
                 {"base_url", m.backend.base_url},
                 {"cache_path", m.backend.cache_path},
                 {"strict_replay", m.backend.strict_replay},
                 {"max_in_flight", m.backend.max_in_flight},
                 {"retry_max_attempts", m.backend.retry_max_attempts},
                 {"retry_initial_backoff_ms", m.backend.retry_initial_backoff_ms},
                 {"retry_max_backoff_ms", m.backend.retry_max_backoff_ms},
                 {"timeout_ms", m.backend.timeout_ms}};
    if (!m.backend.mock_script.empty()) {
        json script = json::object();
        for (const auto& [tag, text] : m.backend.mock_script) script[tag] = text;
        backend["mock_script"] = script;
    }
    if (m.backend.mock_default) backend["mock_default"] = *m.backend.mock_default;

    // Reals in fixed decimal so the digest never depends on a float
    // printer.
    char temp[32], top_p[32], freq[32], pres[32];
    std::snprintf(temp, sizeof(temp), "%.6f", m.generation.temperature);
    std::snprintf(top_p, sizeof(top_p), "%.6f", m.generation.top_p);
    std::snprintf(freq, sizeof(freq), "%.6f", m.generation.frequency_penalty);
    std::snprintf(pres, sizeof(pres), "%.6f", m.generation.presence_penalty);

    json j{{"v", 1},
           {"dataset", dataset},
           {"sampling", {{"seed", m.sampling.rng_seed},
                         {"targets", targets_to_json(m.sampling)},
                         {"sampler", kSamplerId}}},
           {"conditions", conditions},
           {"generation", {{"model_id", m.generation.model_id},
                           {"temperature", temp},
                           {"top_p", top_p},
                           {"frequency_penalty", freq},
                           {"presence_penalty", pres},
                           {"max_tokens", m.generation.max_tokens}}},
           {"backend", backend},
           {"output_dir", m.output_dir},
           {"template_version", m.template_version_pin ? json(*m.template_version_pin) : json()}};
    return j.dump();
}

std::string manifest_digest(const RunManifest& m) {
    return sha256_hex(manifest_canonical_json(m));
}

} // namespace coe
