#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "crp/bench.hpp"
#include "crp/evalharness.hpp"
#include "crp/pipeline.hpp"
#include "crp/synthgen.hpp"

namespace crp {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// --- CSV -------------------------------------------------------------------
// Comma separated, header row, names restricted to [A-Za-z0-9_], finite
// decimal values only.

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

std::string format_csv(const SampleMatrix& data);
SampleMatrix parse_csv(std::string_view text);
SampleMatrix read_csv(const std::filesystem::path& path);

// --- canonical JSON -----------------------------------------------------------

/// Sorted keys, 2-space indent, shortest round-trip floats, non-finite -> null.
std::string canonical_json(const json& value);

json read_json(const std::filesystem::path& path);

// --- files -------------------------------------------------------------------

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

// --- schemas -----------------------------------------------------------------

json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const json& j);

json to_json(const SemModel& model);
SemModel sem_from_json(const json& j);

json to_json(const BnModel& model);
BnModel bn_from_json(const json& j);

json to_json(const CrpReport& report);
/// Reads back the fields needed for evaluation and inspection.
CrpReport report_from_json(const json& j);

json to_json(const EvalSummary& summary);
json to_json(const AggregateSummary& summary);
json to_json(const BenchResult& result);

}  // namespace crp
