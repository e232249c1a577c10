#include "coe/completion.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "coe/error.hpp"
#include "coe/hash.hpp"

namespace coe {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string json_escaped(const std::string& s) {
    return nlohmann::json(s).dump();
}

} // namespace

void GenerationParams::validate() const {
    if (model_id.empty()) throw Error("generation params: model_id is empty");
    if (temperature < 0.0 || temperature > 2.0) {
        throw Error("generation params: temperature must be in [0, 2]");
    }
    if (top_p <= 0.0 || top_p > 1.0) {
        throw Error("generation params: top_p must be in (0, 1]");
    }
    if (max_tokens <= 0) throw Error("generation params: max_tokens must be positive");
}

std::string canonical_request_json(const std::string& prompt, const GenerationParams& params) {
    std::string out = "{";
    out += "\"frequency_penalty\":" + fixed6(params.frequency_penalty);
    out += ",\"max_tokens\":" + std::to_string(params.max_tokens);
    out += ",\"model_id\":" + json_escaped(params.model_id);
    out += ",\"presence_penalty\":" + fixed6(params.presence_penalty);
    out += ",\"prompt\":" + json_escaped(prompt);
    out += ",\"temperature\":" + fixed6(params.temperature);
    out += ",\"top_p\":" + fixed6(params.top_p);
    out += "}";
    return out;
}

std::string request_key(const std::string& prompt, const GenerationParams& params) {
    return sha256_hex(canonical_request_json(prompt, params));
}

} // namespace coe
