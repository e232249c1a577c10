#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coe/backend.hpp"
#include "coe/completion.hpp"
#include "coe/dataset.hpp"
#include "coe/prompt.hpp"

namespace coe {

/// Full run configuration (schema v1). Serializable; the digest of the
/// resolved manifest uniquely identifies a run's configuration.
struct RunManifest {
    std::map<EmpathyStrategy, std::string> dataset_files;
    SamplingPlan sampling;
    std::vector<CoECondition> conditions; // run order, subset of the five
    GenerationParams generation;
    BackendConfig backend;
    std::string output_dir = "out";
    std::optional<std::string> template_version_pin;

    /// Throws Error on invalid fields (bad condition set, params out of
    /// range, unsatisfiable backend combination).
    void validate() const;
};

/// Parses a manifest JSON document. Relative dataset/cache/script/output
/// paths are kept as written; resolve_paths() rebases them.
RunManifest manifest_from_json(const std::string& json_text);

/// Loads from file and rebases relative paths against the manifest's
/// directory.
RunManifest load_manifest(const std::string& path);

/// Canonical serialization of the resolved manifest (sorted keys, defaults
/// applied). Basis of manifest_digest().
std::string manifest_canonical_json(const RunManifest& manifest);

/// SHA-256 of manifest_canonical_json.
std::string manifest_digest(const RunManifest& manifest);

} // namespace coe
