#include "coe/cache.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coe/error.hpp"

namespace coe {

using nlohmann::json;

namespace {

json params_to_json(const GenerationParams& p) {
    return json{{"model_id", p.model_id},
                {"temperature", p.temperature},
                {"top_p", p.top_p},
                {"frequency_penalty", p.frequency_penalty},
                {"presence_penalty", p.presence_penalty},
                {"max_tokens", p.max_tokens}};
}

GenerationParams params_from_json(const json& j) {
    GenerationParams p;
    p.model_id = j.at("model_id").get<std::string>();
    p.temperature = j.at("temperature").get<double>();
    p.top_p = j.at("top_p").get<double>();
    p.frequency_penalty = j.at("frequency_penalty").get<double>();
    p.presence_penalty = j.at("presence_penalty").get<double>();
    p.max_tokens = j.at("max_tokens").get<int>();
    return p;
}

} // namespace

std::string cache_line(const RawCompletion& c) {
    json j{{"v", 1},
           {"request_key", c.request_key},
           {"prompt", c.prompt},
           {"params", params_to_json(c.params)},
           {"completion_text", c.completion_text},
           {"backend_kind", c.backend_kind},
           {"latency_ms", c.latency_ms},
           {"created_at", c.created_at}};
    // replace ill-formed UTF-8 rather than refusing to record the entry
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

RawCompletion parse_cache_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw CacheError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (j.at("v").get<int>() != 1) {
            throw CacheError("unsupported cache schema version");
        }
        RawCompletion c;
        c.request_key = j.at("request_key").get<std::string>();
        c.prompt = j.at("prompt").get<std::string>();
        c.params = params_from_json(j.at("params"));
        c.completion_text = j.at("completion_text").get<std::string>();
        c.backend_kind = j.at("backend_kind").get<std::string>();
        c.latency_ms = j.at("latency_ms").get<std::int64_t>();
        c.created_at = j.at("created_at").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw CacheError(std::string("missing or mistyped field: ") + e.what());
    }
}

CacheIndex CacheIndex::load(const std::string& path, bool allow_missing) {
    CacheIndex index;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (allow_missing && !std::filesystem::exists(path)) return index;
        throw CacheError(path + ": cannot open cache file");
    }

    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.emplace_back(line_no, line);
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            RawCompletion c = parse_cache_line(lines[i].second);
            auto [it, inserted] = index.by_key_.insert_or_assign(c.request_key, std::move(c));
            if (inserted) {
                index.key_order_.push_back(it->first);
            } else {
                ++index.stats_.duplicate_keys;
            }
            ++index.stats_.entries_read;
        } catch (const CacheError& e) {
            if (i + 1 == lines.size()) {
                // Torn write: tolerate, report.
                index.stats_.torn_tail = true;
                std::ostringstream detail;
                detail << path << ":" << lines[i].first << ": " << e.what();
                index.stats_.torn_tail_detail = detail.str();
            } else {
                std::ostringstream msg;
                msg << path << ":" << lines[i].first << ": " << e.what();
                throw CacheError(msg.str());
            }
        }
    }
    index.stats_.unique_keys = index.by_key_.size();
    return index;
}

CacheIndex CacheIndex::from_entries(std::vector<RawCompletion> entries) {
    CacheIndex index;
    for (auto& c : entries) {
        auto [it, inserted] = index.by_key_.insert_or_assign(c.request_key, std::move(c));
        if (inserted) index.key_order_.push_back(it->first);
        else ++index.stats_.duplicate_keys;
        ++index.stats_.entries_read;
    }
    index.stats_.unique_keys = index.by_key_.size();
    return index;
}

std::optional<RawCompletion> CacheIndex::lookup(const std::string& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

std::vector<RawCompletion> CacheIndex::entries() const {
    std::vector<RawCompletion> out;
    out.reserve(key_order_.size());
    for (const auto& key : key_order_) out.push_back(by_key_.at(key));
    return out;
}

struct CacheWriter::Impl {
    std::ofstream out;
};

CacheWriter::CacheWriter(const std::string& path) : path_(path), impl_(std::make_unique<Impl>()) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    impl_->out.open(path, std::ios::binary | std::ios::app);
    if (!impl_->out) throw CacheError(path + ": cannot open cache file for append");
}

CacheWriter::~CacheWriter() = default;

void CacheWriter::append(const RawCompletion& completion) {
    std::lock_guard<std::mutex> lock(mutex_);
    impl_->out << cache_line(completion) << '\n';
    impl_->out.flush();
    if (!impl_->out) throw CacheError(path_ + ": write failed");
}

} // namespace coe
