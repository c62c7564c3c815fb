#pragma once

#include "spv/scoring.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace spv {

/// Session logs matching a shell glob, parsed into per-subject record sets.
std::vector<SessionRecords> load_sessions(const std::string& pattern);

nlohmann::json to_json(const ScoreReport& report);

/// Aligned text table, one row per group: object
/// present/missing %C %I, % correct identification (with CI when available),
/// % room recognized, and the five confidence levels.
std::string format_table(const ScoreReport& report);

/// Actual x predicted room matrix with recall column and precision row, cells
/// to two decimals.
std::string format_confusion(const GroupReport& group);
std::string confusion_csv(const GroupReport& group);

/// Writes report.json, report.txt and confusion_<group>.csv into `dir`.
void write_report(const ScoreReport& report, const std::filesystem::path& dir);

} // namespace spv
