#pragma once

#include "spv/study.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spv {

/// Four-way split of every (trial, object class) judgment.
///
/// present_correct   truth present, marked      (hit)
/// present_incorrect truth absent, marked       (false alarm)
/// missing_correct   truth absent, unmarked     (correct rejection)
/// missing_incorrect truth present, unmarked    (miss)
struct ObjectScore {
    long long opportunities = 0;
    long long present_correct = 0;
    long long present_incorrect = 0;
    long long missing_correct = 0;
    long long missing_incorrect = 0;

    double pct_present_correct() const { return pct(present_correct); }
    double pct_present_incorrect() const { return pct(present_incorrect); }
    double pct_missing_correct() const { return pct(missing_correct); }
    double pct_missing_incorrect() const { return pct(missing_incorrect); }
    double pct_correct_identification() const { return pct(present_correct + missing_correct); }

private:
    double pct(long long n) const
    {
        return opportunities == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(opportunities);
    }
};

inline constexpr std::size_t kRoomCount = kAllRooms.size();
inline constexpr std::size_t kLikertCount = kAllLikert.size();

struct RoomScore {
    std::array<std::array<long long, kRoomCount>, kRoomCount> counts{};  // [actual][predicted]
    long long trials = 0;
    long long correct = 0;

    /// Row-normalized; rows without trials are nullopt.
    std::optional<std::array<double, kRoomCount>> confusion_row(Room actual) const;
    /// Percent; nullopt when the room never occurs (recall) or is never
    /// answered (precision).
    std::optional<double> recall(Room actual) const;
    std::optional<double> precision(Room predicted) const;
    double pct_room_recognized() const;
};

/// Truth is looked up in the catalog by stimulus id. Throws
/// InsufficientDataError on an empty record set and ConsistencyError for
/// records naming a stimulus the catalog lacks.
ObjectScore score_objects(const std::vector<TrialRecord>& records, const Catalog& catalog);
RoomScore score_rooms(const std::vector<TrialRecord>& records, const Catalog& catalog);

/// Percent of records at each level, in DY, PY, M, PN, DN order.
std::array<double, kLikertCount> likert_distribution(const std::vector<TrialRecord>& records);

/// 1.96 * s / sqrt(n) with the n-1 sample deviation. InsufficientDataError
/// for fewer than two scores.
double ci95(const std::vector<double>& per_subject_scores);

enum class GroupBy {
    MethodKindView,  // OM Cent, OM Rand, OM Vid, ...
    MethodKind,      // OM Ima, OM Vid, ...
    Method,
};
GroupBy parse_group_by(std::string_view s);

struct SessionRecords {
    std::string subject_id;
    std::map<std::string, std::string> metadata;
    std::vector<TrialRecord> records;
};

struct ScoreOptions {
    GroupBy group_by = GroupBy::MethodKindView;
    bool include_late = true;
    /// Only sessions whose metadata matches every pair are scored.
    std::map<std::string, std::string> metadata_filter;
};

struct GroupReport {
    std::string name;
    int subjects = 0;
    long long trials = 0;
    ObjectScore objects;
    RoomScore rooms;
    std::array<double, kLikertCount> likert{};
    std::optional<double> ci95_identification;
    std::optional<double> ci95_room;
};

struct ScoreReport {
    std::vector<GroupReport> groups;
    int sessions = 0;
    long long excluded_late = 0;
};

/// Group label of a record, e.g. "SIE-OM Cent" or "OM Vid".
std::string group_name(const TrialRecord& record, GroupBy group_by);

/// InsufficientDataError when the filter leaves nothing to score.
ScoreReport score_sessions(const std::vector<SessionRecords>& sessions, const Catalog& catalog,
                           const ScoreOptions& options = {});

/// Half-up rounding to `digits` decimals, as used in every table.
double round_half_up(double value, int digits = 0);

} // namespace spv
