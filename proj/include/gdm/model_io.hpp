#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gdm/gdm.hpp"
#include "gdm/synth.hpp"

namespace gdm::io {

inline constexpr const char* kModelVersion = "gdm-model/1";
inline constexpr const char* kTruthVersion = "gdm-truth/1";

using Json = nlohmann::ordered_json;

// Feature indices are 1-based in every document written here.

Json to_json(const GdmConfig& config);
GdmConfig config_from_json(const Json& j);

Json to_json(const solver::SvmModel& svm);
solver::SvmModel svm_from_json(const Json& j);

/// Model document. With include_timing = false the trace carries no wall
/// times, which makes the output a pure function of data and config.
Json to_json(const SelectionModel& model, bool include_timing = true);
SelectionModel model_from_json(const Json& j);

Json to_json(const crm::MatchTrace& trace);

Json to_json(const synth::GroundTruth& truth);
synth::GroundTruth truth_from_json(const Json& j);

Json to_json(const synth::RecoveryReport& report);

/// Parses a file; throws DataError on I/O or syntax problems.
Json read_json_file(const std::filesystem::path& path);

}  // namespace gdm::io
