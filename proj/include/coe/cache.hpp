#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "coe/completion.hpp"

namespace coe {

/// Load-time diagnostics for a cache file.
struct CacheStats {
    std::size_t entries_read = 0;   // well-formed lines
    std::size_t unique_keys = 0;    // after last-write-wins resolution
    std::size_t duplicate_keys = 0; // lines superseded by a later write
    bool torn_tail = false;         // trailing line failed to parse
    std::string torn_tail_detail;
};

/// Read-only view of an append-only JSONL cache. Duplicate keys resolve to
/// the last-written entry. A corrupted trailing line is tolerated and
/// reported; a malformed non-trailing line is a hard error with its line
/// number. Lookups are const and safe to share across threads.
class CacheIndex {
public:
    /// Loads the file at `path`. A missing file yields an empty index
    /// when `allow_missing` is set, otherwise throws CacheError.
    static CacheIndex load(const std::string& path, bool allow_missing = false);

    /// Builds an index over an already-parsed entry list (tests).
    static CacheIndex from_entries(std::vector<RawCompletion> entries);

    std::optional<RawCompletion> lookup(const std::string& key) const;
    std::size_t size() const { return by_key_.size(); }
    const CacheStats& stats() const { return stats_; }

    /// Entries in last-write-wins, first-seen key order (for `cache ls`).
    std::vector<RawCompletion> entries() const;

private:
    std::map<std::string, RawCompletion> by_key_;
    std::vector<std::string> key_order_;
    CacheStats stats_;
};

/// Serialized appender; a single writer guards the file so concurrent
/// completions never interleave records. Each append is flushed before
/// returning.
class CacheWriter {
public:
    explicit CacheWriter(const std::string& path);
    ~CacheWriter();

    CacheWriter(const CacheWriter&) = delete;
    CacheWriter& operator=(const CacheWriter&) = delete;

    void append(const RawCompletion& completion);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::mutex mutex_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// JSONL serialization of one cache entry (schema v1).
std::string cache_line(const RawCompletion& completion);
/// Parses one line; throws CacheError on malformed input.
RawCompletion parse_cache_line(const std::string& line);

} // namespace coe
