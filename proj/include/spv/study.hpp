#pragma once

#include "spv/error.hpp"
#include "spv/saliency.hpp"
#include "spv/video.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace spv {

/// Room types, in confusion-matrix column order.
enum class Room { Bedroom, Kitchen, DiningRoom, LivingRoom };
inline constexpr std::array kAllRooms{Room::Bedroom, Room::Kitchen, Room::DiningRoom, Room::LivingRoom};

enum class Likert { DY, PY, M, PN, DN };
inline constexpr std::array kAllLikert{Likert::DY, Likert::PY, Likert::M, Likert::PN, Likert::DN};

enum class StimulusKind { Image, Video };
enum class View { Cent, Rand };

std::string_view to_string(Room r);
std::string_view to_string(Likert l);
std::string_view to_string(StimulusKind k);
std::string_view to_string(View v);

/// Parsers throw FormatError on unknown names.
Room parse_room(std::string_view s);
Likert parse_likert(std::string_view s);
StimulusKind parse_kind(std::string_view s);
View parse_view(std::string_view s);

inline constexpr double kDefaultTimeLimit = 30.0;

struct GroundTruth {
    Room room = Room::Bedroom;
    std::set<ObjectClass> objects;
    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// One catalog entry: a scene rendered with both study methods.
struct CatalogStimulus {
    std::string id;
    StimulusKind kind = StimulusKind::Image;
    std::optional<View> view;  // images only
    GroundTruth truth;
    std::map<Method, std::filesystem::path> media;  // Om and SieOm, absolute
};

/// Stimulus catalog file:
///
///     { "time_limit": 30,
///       "images": [ { "id": "bed1-cent", "view": "cent", "room": "bedroom",
///                     "objects": ["bed", "chair"],
///                     "media": { "om": "img/bed1_om.png", "sie-om": "img/bed1_sieom.png" } } ],
///       "videos": [ { "id": "bed1-vid", "room": "bedroom", "objects": ["bed"],
///                     "media": { "om": "vid/bed1_om/sequence.json", "sie-om": "..." } } ] }
///
/// Media paths resolve against the catalog's directory.
struct Catalog {
    double time_limit = kDefaultTimeLimit;
    std::vector<CatalogStimulus> stimuli;
    std::filesystem::path source;

    const CatalogStimulus* find(std::string_view id) const;
};

/// Throws CatalogError when an entry lacks a method rendering, an image lacks
/// its view, an id repeats, or a label is unknown.
Catalog parse_catalog(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Catalog load_catalog(const std::filesystem::path& path);

/// Throws CatalogError naming the first media file that does not exist.
void check_media(const Catalog& catalog);

struct Trial {
    int index = 0;
    std::string stimulus_id;
    StimulusKind kind = StimulusKind::Image;
    Method method = Method::Om;
    std::optional<View> view;
    std::filesystem::path media_path;
    GroundTruth truth;
    friend bool operator==(const Trial&, const Trial&) = default;
};

struct StimulusPlan {
    std::vector<Trial> trials;
    double time_limit = kDefaultTimeLimit;
    std::uint64_t seed = 0;
    friend bool operator==(const StimulusPlan&, const StimulusPlan&) = default;
};

/// One trial per (stimulus, method). Image trials come first, then video
/// trials; each block is shuffled with the seed.
StimulusPlan build_plan(const Catalog& catalog, std::uint64_t seed);
StimulusPlan build_plan(const std::filesystem::path& catalog_path, std::uint64_t seed);

struct TrialRecord {
    std::string subject_id;
    int trial_index = 0;
    std::string stimulus_id;
    StimulusKind kind = StimulusKind::Image;
    Method method = Method::Om;
    std::optional<View> view;
    std::set<ObjectClass> objects_marked;
    Room room_choice = Room::Bedroom;
    Likert likert = Likert::M;
    double response_time = 0.0;
    bool late = false;
    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

nlohmann::json to_json(const TrialRecord& r);
/// Throws FormatError on missing or malformed fields.
TrialRecord trial_record_from_json(const nlohmann::json& j);

enum class SessionStatus { Pending, Running, Done };
std::string_view to_string(SessionStatus s);

struct SessionState {
    std::string session_id;
    std::string subject_id;
    std::map<std::string, std::string> metadata;
    StimulusPlan plan;
    std::vector<TrialRecord> records;
    int cursor = 0;
    SessionStatus status = SessionStatus::Pending;
    friend bool operator==(const SessionState&, const SessionState&) = default;
};

SessionState start_session(std::string session_id, std::string subject_id, StimulusPlan plan,
                           std::map<std::string, std::string> metadata = {});

/// Raised for a trial index that already has a record; a retried submission
/// is acknowledged, not re-recorded.
class DuplicateSubmission : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

/// Appends the record for the trial at the cursor and advances. The record's
/// trial fields (stimulus, kind, method, view) are filled from the plan; a
/// response time over the limit sets `late`. Duplicate or out-of-order trial
/// indices, a foreign subject, or a session that is not running raise
/// ProtocolError.
SessionState submit_response(SessionState session, TrialRecord record);

/// Session log: a header line followed by one TrialRecord per line.
nlohmann::json session_header(const SessionState& session);
struct SessionLog {
    nlohmann::json header;
    std::vector<TrialRecord> records;
};
SessionLog read_session_log(const std::filesystem::path& path);

/// Rebuilds the plan from the header's seed and replays every record through
/// submit_response.
SessionState replay_session(const SessionLog& log, const Catalog& catalog);

} // namespace spv
