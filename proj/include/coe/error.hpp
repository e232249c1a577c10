#pragma once

#include <stdexcept>
#include <string>

namespace coe {

/// Base error for all harness failures surfaced to the CLI.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dataset ingestion failure; message carries file + line context.
class DatasetError : public Error {
public:
    using Error::Error;
};

/// Cache file failure (unreadable file, malformed non-trailing line).
class CacheError : public Error {
public:
    using Error::Error;
};

enum class BackendErrorKind {
    CredentialMissing,
    NonRetryableHttp,
    RetriesExhausted,
    ReplayMiss,
    ScriptMiss,
    BadResponse,
};

/// Backend completion failure, distinguishable by kind so the orchestrator
/// can record per-pair failures separately from hard configuration errors.
class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& what)
        : Error(what), kind_(kind) {}

    BackendErrorKind kind() const { return kind_; }

private:
    BackendErrorKind kind_;
};

} // namespace coe
