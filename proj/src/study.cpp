#include "spv/study.hpp"

#include "spv/error.hpp"
#include "spv/rng.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>

namespace spv {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string lowered(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

std::set<ObjectClass> parse_object_set(const json& arr, const std::string& context)
{
    std::set<ObjectClass> out;
    for (const auto& item : arr) {
        const auto label = item.get<std::string>();
        const auto cls = parse_object_class(label);
        if (!cls)
            throw FormatError(context + ": unknown object '" + label + "'");
        out.insert(*cls);
    }
    return out;
}

json object_set_json(const std::set<ObjectClass>& objects)
{
    json arr = json::array();
    for (auto c : objects)
        arr.push_back(std::string(to_string(c)));
    return arr;
}

CatalogStimulus parse_stimulus(const json& entry, StimulusKind kind, const fs::path& base)
{
    CatalogStimulus s;
    s.kind = kind;
    s.id = entry.at("id").get<std::string>();
    if (s.id.empty())
        throw CatalogError("catalog entry with empty id");
    const std::string ctx = "catalog entry '" + s.id + "'";
    try {
        s.truth.room = parse_room(entry.at("room").get<std::string>());
        s.truth.objects = parse_object_set(entry.value("objects", json::array()), ctx);
        if (kind == StimulusKind::Image) {
            if (!entry.contains("view"))
                throw CatalogError(ctx + " is an image without a view (cent or rand)");
            s.view = parse_view(entry.at("view").get<std::string>());
        }
    } catch (const FormatError& e) {
        throw CatalogError(e.what());
    }
    const auto& media = entry.at("media");
    for (Method m : {Method::Om, Method::SieOm}) {
        const auto key = std::string(to_string(m));
        if (!media.contains(key))
            throw CatalogError(ctx + " is missing its " + key + " rendering");
        s.media[m] = fs::absolute(base / media.at(key).get<std::string>()).lexically_normal();
    }
    return s;
}

} // namespace

std::string_view to_string(Room r)
{
    switch (r) {
    case Room::Bedroom: return "bedroom";
    case Room::Kitchen: return "kitchen";
    case Room::DiningRoom: return "dining room";
    case Room::LivingRoom: return "living room";
    }
    return "unknown";
}

std::string_view to_string(Likert l)
{
    switch (l) {
    case Likert::DY: return "DY";
    case Likert::PY: return "PY";
    case Likert::M: return "M";
    case Likert::PN: return "PN";
    case Likert::DN: return "DN";
    }
    return "unknown";
}

std::string_view to_string(StimulusKind k)
{
    return k == StimulusKind::Image ? "image" : "video";
}

std::string_view to_string(View v)
{
    return v == View::Cent ? "cent" : "rand";
}

std::string_view to_string(SessionStatus s)
{
    switch (s) {
    case SessionStatus::Pending: return "pending";
    case SessionStatus::Running: return "running";
    case SessionStatus::Done: return "done";
    }
    return "unknown";
}

Room parse_room(std::string_view s)
{
    auto v = lowered(s);
    std::replace(v.begin(), v.end(), '_', ' ');
    std::replace(v.begin(), v.end(), '-', ' ');
    for (Room r : kAllRooms)
        if (v == to_string(r))
            return r;
    throw FormatError("unknown room '" + std::string(s) + "'");
}

Likert parse_likert(std::string_view s)
{
    const auto v = lowered(s);
    for (Likert l : kAllLikert)
        if (v == lowered(to_string(l)))
            return l;
    throw FormatError("unknown likert level '" + std::string(s) + "'");
}

StimulusKind parse_kind(std::string_view s)
{
    const auto v = lowered(s);
    if (v == "image")
        return StimulusKind::Image;
    if (v == "video")
        return StimulusKind::Video;
    throw FormatError("unknown stimulus kind '" + std::string(s) + "'");
}

View parse_view(std::string_view s)
{
    const auto v = lowered(s);
    if (v == "cent")
        return View::Cent;
    if (v == "rand")
        return View::Rand;
    throw FormatError("unknown view '" + std::string(s) + "'");
}

const CatalogStimulus* Catalog::find(std::string_view id) const
{
    for (const auto& s : stimuli)
        if (s.id == id)
            return &s;
    return nullptr;
}

Catalog parse_catalog(const json& doc, const fs::path& base_dir)
{
    Catalog catalog;
    try {
        catalog.time_limit = doc.value("time_limit", kDefaultTimeLimit);
        if (!(catalog.time_limit > 0.0))
            throw CatalogError("catalog time_limit must be positive");
        for (const auto& e : doc.value("images", json::array()))
            catalog.stimuli.push_back(parse_stimulus(e, StimulusKind::Image, base_dir));
        for (const auto& e : doc.value("videos", json::array()))
            catalog.stimuli.push_back(parse_stimulus(e, StimulusKind::Video, base_dir));
    } catch (const json::exception& e) {
        throw CatalogError(std::string("malformed catalog: ") + e.what());
    }
    std::set<std::string> seen;
    for (const auto& s : catalog.stimuli)
        if (!seen.insert(s.id).second)
            throw CatalogError("duplicate catalog id '" + s.id + "'");
    if (catalog.stimuli.empty())
        throw CatalogError("catalog lists no stimuli");
    return catalog;
}

Catalog load_catalog(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw CatalogError("catalog not found: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw CatalogError("malformed catalog " + path.string() + ": " + e.what());
    }
    auto catalog = parse_catalog(doc, fs::absolute(path).parent_path());
    catalog.source = fs::absolute(path);
    return catalog;
}

void check_media(const Catalog& catalog)
{
    for (const auto& s : catalog.stimuli)
        for (const auto& [method, path] : s.media)
            if (!fs::exists(path))
                throw CatalogError("media for '" + s.id + "' (" + std::string(to_string(method)) +
                                   ") not found: " + path.string());
}

StimulusPlan build_plan(const Catalog& catalog, std::uint64_t seed)
{
    std::vector<Trial> images;
    std::vector<Trial> videos;
    for (const auto& s : catalog.stimuli) {
        for (Method m : {Method::Om, Method::SieOm}) {
            Trial t;
            t.stimulus_id = s.id;
            t.kind = s.kind;
            t.method = m;
            t.view = s.view;
            t.media_path = s.media.at(m);
            t.truth = s.truth;
            (s.kind == StimulusKind::Image ? images : videos).push_back(std::move(t));
        }
    }

    std::mt19937_64 gen(seed);
    seeded_shuffle(std::span(images), gen);
    seeded_shuffle(std::span(videos), gen);

    StimulusPlan plan;
    plan.seed = seed;
    plan.time_limit = catalog.time_limit;
    plan.trials = std::move(images);
    plan.trials.insert(plan.trials.end(), std::make_move_iterator(videos.begin()),
                       std::make_move_iterator(videos.end()));
    for (std::size_t i = 0; i < plan.trials.size(); ++i)
        plan.trials[i].index = static_cast<int>(i);
    return plan;
}

StimulusPlan build_plan(const fs::path& catalog_path, std::uint64_t seed)
{
    return build_plan(load_catalog(catalog_path), seed);
}

json to_json(const TrialRecord& r)
{
    json j = {
        {"type", "trial"},
        {"subject_id", r.subject_id},
        {"trial_index", r.trial_index},
        {"stimulus_id", r.stimulus_id},
        {"kind", std::string(to_string(r.kind))},
        {"method", std::string(to_string(r.method))},
        {"objects_marked", object_set_json(r.objects_marked)},
        {"room_choice", std::string(to_string(r.room_choice))},
        {"likert", std::string(to_string(r.likert))},
        {"response_time", r.response_time},
        {"late", r.late},
    };
    if (r.view)
        j["view"] = std::string(to_string(*r.view));
    return j;
}

TrialRecord trial_record_from_json(const json& j)
{
    try {
        TrialRecord r;
        r.subject_id = j.value("subject_id", "");
        r.trial_index = j.at("trial_index").get<int>();
        r.stimulus_id = j.value("stimulus_id", "");
        if (j.contains("kind"))
            r.kind = parse_kind(j["kind"].get<std::string>());
        if (j.contains("method"))
            r.method = parse_method(j["method"].get<std::string>());
        if (j.contains("view") && !j["view"].is_null())
            r.view = parse_view(j["view"].get<std::string>());
        r.objects_marked = parse_object_set(j.value("objects_marked", json::array()), "record");
        r.room_choice = parse_room(j.at("room_choice").get<std::string>());
        r.likert = parse_likert(j.at("likert").get<std::string>());
        r.response_time = j.value("response_time", 0.0);
        r.late = j.value("late", false);
        if (r.response_time < 0.0)
            throw FormatError("negative response_time");
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed trial record: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(e.what());
    }
}

SessionState start_session(std::string session_id, std::string subject_id, StimulusPlan plan,
                           std::map<std::string, std::string> metadata)
{
    SessionState s;
    s.session_id = std::move(session_id);
    s.subject_id = std::move(subject_id);
    s.metadata = std::move(metadata);
    s.plan = std::move(plan);
    s.status = s.plan.trials.empty() ? SessionStatus::Done : SessionStatus::Running;
    return s;
}

SessionState submit_response(SessionState session, TrialRecord record)
{
    if (session.status == SessionStatus::Pending)
        throw ProtocolError("session " + session.session_id + " has not started");
    if (session.status == SessionStatus::Done)
        throw ProtocolError("session " + session.session_id + " is already complete");
    if (record.trial_index < session.cursor)
        throw DuplicateSubmission("duplicate submission for trial " + std::to_string(record.trial_index));
    if (record.trial_index > session.cursor)
        throw ProtocolError("out-of-order submission: expected trial " +
                            std::to_string(session.cursor) + ", got " +
                            std::to_string(record.trial_index));
    if (!record.subject_id.empty() && record.subject_id != session.subject_id)
        throw ProtocolError("record subject '" + record.subject_id + "' does not own session " +
                            session.session_id);
    if (!(record.response_time >= 0.0))
        throw ProtocolError("response time must be non-negative");

    const Trial& trial = session.plan.trials[static_cast<std::size_t>(session.cursor)];
    if (!record.stimulus_id.empty() && record.stimulus_id != trial.stimulus_id)
        throw ProtocolError("record for trial " + std::to_string(trial.index) +
                            " names stimulus '" + record.stimulus_id + "'");

    record.subject_id = session.subject_id;
    record.stimulus_id = trial.stimulus_id;
    record.kind = trial.kind;
    record.method = trial.method;
    record.view = trial.view;
    record.late = record.late || record.response_time > session.plan.time_limit;

    session.records.push_back(std::move(record));
    ++session.cursor;
    if (session.cursor == static_cast<int>(session.plan.trials.size()))
        session.status = SessionStatus::Done;
    return session;
}

json session_header(const SessionState& session)
{
    return {
        {"type", "session"},
        {"session_id", session.session_id},
        {"subject_id", session.subject_id},
        {"seed", session.plan.seed},
        {"time_limit", session.plan.time_limit},
        {"trial_count", session.plan.trials.size()},
        {"metadata", session.metadata},
    };
}

SessionLog read_session_log(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IngestionError("session log not found: " + path.string());
    SessionLog log;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const auto type = j.value("type", "");
        if (type == "session") {
            if (!log.header.is_null())
                throw FormatError(path.string() + ": more than one session header");
            log.header = std::move(j);
        } else if (type == "trial") {
            log.records.push_back(trial_record_from_json(j));
        } else {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unknown record type");
        }
    }
    if (log.header.is_null())
        throw FormatError(path.string() + ": missing session header");
    return log;
}

SessionState replay_session(const SessionLog& log, const Catalog& catalog)
{
    try {
        const auto seed = log.header.at("seed").get<std::uint64_t>();
        auto plan = build_plan(catalog, seed);
        if (log.header.contains("time_limit"))
            plan.time_limit = log.header["time_limit"].get<double>();
        if (plan.trials.size() != log.header.value("trial_count", plan.trials.size()))
            throw ConsistencyError("session log trial count does not match the catalog");
        auto state = start_session(log.header.at("session_id").get<std::string>(),
                                   log.header.at("subject_id").get<std::string>(), std::move(plan),
                                   log.header.value("metadata", std::map<std::string, std::string>{}));
        for (const auto& r : log.records)
            state = submit_response(std::move(state), r);
        return state;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed session header: ") + e.what());
    }
}

} // namespace spv
