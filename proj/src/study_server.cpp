#include "spv/study_server.hpp"

#include "spv/sequence_io.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <fstream>

namespace spv {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

double steady_seconds()
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

json form_schema()
{
    json objects = json::array();
    for (auto c : kAllObjectClasses)
        objects.push_back(std::string(to_string(c)));
    json rooms = json::array();
    for (auto r : kAllRooms)
        rooms.push_back(std::string(to_string(r)));
    json likert = json::array();
    for (auto l : kAllLikert)
        likert.push_back(std::string(to_string(l)));
    return {{"object_choices", objects}, {"room_choices", rooms}, {"likert_choices", likert}};
}

std::string media_url(const std::string& session_id, int trial)
{
    return "/api/sessions/" + session_id + "/media/" + std::to_string(trial);
}

std::string read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

struct StudyService::Session {
    mutable std::mutex mutex;
    SessionState state;
    std::map<int, double> served_at;
    fs::path log_path;
};

StudyService::StudyService(Catalog catalog, std::uint64_t base_seed, fs::path log_dir, Clock clock)
    : catalog_(std::move(catalog)),
      base_seed_(base_seed),
      log_dir_(std::move(log_dir)),
      clock_(clock ? std::move(clock) : Clock(steady_seconds))
{
    check_media(catalog_);
    fs::create_directories(log_dir_);
}

StudyService::~StudyService() = default;

StudyService::Session& StudyService::find(const std::string& session_id) const
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end())
        throw UnknownSession("unknown session '" + session_id + "'");
    return *it->second;
}

StudyService::Created StudyService::create_session(const std::string& subject_id,
                                                   std::map<std::string, std::string> metadata,
                                                   std::optional<std::uint64_t> seed)
{
    if (subject_id.empty())
        throw ProtocolError("subject_id is required");

    std::lock_guard lock(sessions_mutex_);
    const int ordinal = ++ordinal_;
    const std::uint64_t session_seed = seed.value_or(base_seed_ + static_cast<std::uint64_t>(ordinal));

    std::string id;
    for (int n = ordinal;; ++n) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "session-%04d", n);
        id = buf;
        if (!sessions_.contains(id) && !fs::exists(log_dir_ / (id + ".jsonl")))
            break;
    }

    auto session = std::make_unique<Session>();
    session->state = start_session(id, subject_id, build_plan(catalog_, session_seed), std::move(metadata));
    session->log_path = log_dir_ / (id + ".jsonl");
    {
        std::ofstream out(session->log_path, std::ios::trunc);
        out << session_header(session->state).dump() << '\n';
        if (!out)
            throw IngestionError("cannot write session log " + session->log_path.string());
    }

    Created created{id, session_seed, static_cast<int>(session->state.plan.trials.size())};
    sessions_.emplace(id, std::move(session));
    return created;
}

json StudyService::next(const std::string& session_id)
{
    Session& s = find(session_id);
    std::lock_guard lock(s.mutex);
    const auto& state = s.state;
    const int total = static_cast<int>(state.plan.trials.size());
    if (state.status == SessionStatus::Done)
        return {{"done", true}, {"trial_count", total}};

    const Trial& trial = state.plan.trials[static_cast<std::size_t>(state.cursor)];
    const double now = clock_();
    const double started = s.served_at.try_emplace(trial.index, now).first->second;

    json media;
    if (trial.kind == StimulusKind::Image) {
        media = {{"type", "image"}, {"url", media_url(session_id, trial.index)}};
    } else {
        const auto manifest = load_sequence_manifest(trial.media_path);
        json urls = json::array();
        for (int k = 0; k < manifest.frame_count; ++k)
            urls.push_back(media_url(session_id, trial.index) + "/frames/" + std::to_string(k));
        media = {{"type", "video"}, {"fps", manifest.fps}, {"frame_count", manifest.frame_count},
                 {"frame_urls", urls}};
    }

    json descriptor = {
        {"done", false},
        {"session_id", session_id},
        {"trial_index", trial.index},
        {"trial_count", total},
        {"kind", std::string(to_string(trial.kind))},
        {"method", std::string(to_string(trial.method))},
        {"time_limit", state.plan.time_limit},
        {"time_remaining", std::max(0.0, state.plan.time_limit - (now - started))},
        {"media", media},
        {"form", form_schema()},
    };
    if (trial.view)
        descriptor["view"] = std::string(to_string(*trial.view));
    return descriptor;
}

json StudyService::submit(const std::string& session_id, const json& body)
{
    Session& s = find(session_id);
    std::lock_guard lock(s.mutex);

    TrialRecord record;
    try {
        if (!body.is_object())
            throw FormatError("response body must be a JSON object");
        json normalized = body;
        normalized.erase("stimulus_id");
        normalized.erase("late");
        normalized.erase("response_time");
        normalized.erase("subject_id");
        record = trial_record_from_json(normalized);
    } catch (const json::exception& e) {
        throw FormatError(e.what());
    }

    const int cursor = s.state.cursor;
    if (record.trial_index == cursor && s.state.status == SessionStatus::Running) {
        auto it = s.served_at.find(cursor);
        if (it == s.served_at.end())
            throw ProtocolError("trial " + std::to_string(cursor) + " has not been served");
        record.response_time = std::max(0.0, clock_() - it->second);
    }

    SessionState updated = submit_response(s.state, std::move(record));
    const TrialRecord& stored = updated.records.back();
    {
        std::ofstream out(s.log_path, std::ios::app);
        out << to_json(stored).dump() << '\n';
        out.flush();
        if (!out)
            throw IngestionError("cannot append to session log " + s.log_path.string());
    }
    s.state = std::move(updated);

    return {
        {"accepted", true},
        {"trial_index", stored.trial_index},
        {"late", stored.late},
        {"response_time", stored.response_time},
        {"cursor", s.state.cursor},
        {"status", std::string(to_string(s.state.status))},
    };
}

json StudyService::status(const std::string& session_id) const
{
    Session& s = find(session_id);
    std::lock_guard lock(s.mutex);
    return {
        {"session_id", session_id},
        {"subject_id", s.state.subject_id},
        {"status", std::string(to_string(s.state.status))},
        {"cursor", s.state.cursor},
        {"trial_count", s.state.plan.trials.size()},
        {"records", s.state.records.size()},
    };
}

fs::path StudyService::media_file(const std::string& session_id, int trial_index,
                                  std::optional<int> frame) const
{
    Session& s = find(session_id);
    std::lock_guard lock(s.mutex);
    if (trial_index < 0 || trial_index >= static_cast<int>(s.state.plan.trials.size()) ||
        !s.served_at.contains(trial_index))
        throw ProtocolError("trial " + std::to_string(trial_index) + " has not been served");
    const Trial& trial = s.state.plan.trials[static_cast<std::size_t>(trial_index)];
    if (!frame)
        return trial.media_path;
    if (trial.kind != StimulusKind::Video)
        throw ProtocolError("trial " + std::to_string(trial_index) + " is not a video");
    const auto manifest = load_sequence_manifest(trial.media_path);
    if (*frame < 0 || *frame >= manifest.frame_count)
        throw ProtocolError("frame " + std::to_string(*frame) + " out of range");
    return trial.media_path.parent_path() / manifest.frames[static_cast<std::size_t>(*frame)];
}

SessionState StudyService::snapshot(const std::string& session_id) const
{
    Session& s = find(session_id);
    std::lock_guard lock(s.mutex);
    return s.state;
}

fs::path StudyService::log_path(const std::string& session_id) const
{
    return find(session_id).log_path;
}

// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn)
{
    try {
        fn();
    } catch (const StudyService::UnknownSession& e) {
        send_json(res, 404, {{"error", e.what()}, {"code", "unknown_session"}});
    } catch (const DuplicateSubmission& e) {
        send_json(res, 409, {{"error", e.what()}, {"code", "duplicate"}, {"acknowledged", true}});
    } catch (const ProtocolError& e) {
        send_json(res, 409, {{"error", e.what()}, {"code", "protocol"}});
    } catch (const FormatError& e) {
        send_json(res, 400, {{"error", e.what()}, {"code", "format"}});
    } catch (const json::exception& e) {
        send_json(res, 400, {{"error", e.what()}, {"code", "format"}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}, {"code", "internal"}});
    }
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty())
        return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw FormatError(std::string("request body is not JSON: ") + e.what());
    }
}

} // namespace

StudyServer::StudyServer(StudyService& service, std::optional<fs::path> static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>())
{
    auto& srv = *server_;
    // Without SO_REUSEPORT a second server on a busy port fails to bind.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });

    srv.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            std::map<std::string, std::string> metadata;
            if (body.contains("metadata"))
                for (const auto& [k, v] : body["metadata"].items())
                    metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
            std::optional<std::uint64_t> seed;
            if (body.contains("seed") && !body["seed"].is_null())
                seed = body["seed"].get<std::uint64_t>();
            const auto created =
                service_.create_session(body.value("subject_id", ""), std::move(metadata), seed);
            send_json(res, 201, {{"session_id", created.session_id},
                                 {"seed", created.seed},
                                 {"trial_count", created.trial_count},
                                 {"time_limit", service_.catalog().time_limit}});
        });
    });

    srv.Get(R"(/api/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, service_.next(req.matches[1])); });
    });

    srv.Post(R"(/api/sessions/([^/]+)/responses)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { send_json(res, 200, service_.submit(req.matches[1], parse_body(req))); });
             });

    srv.Get(R"(/api/sessions/([^/]+)/status)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, service_.status(req.matches[1])); });
    });

    srv.Get(R"(/api/sessions/([^/]+)/media/(\d+))",
            [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                    const std::string id = req.matches[1];
                    const int trial = std::stoi(req.matches[2]);
                    const auto path = service_.media_file(id, trial);
                    if (path.extension() == ".json") {
                        const auto manifest = load_sequence_manifest(path);
                        json urls = json::array();
                        for (int k = 0; k < manifest.frame_count; ++k)
                            urls.push_back(media_url(id, trial) + "/frames/" + std::to_string(k));
                        send_json(res, 200, {{"fps", manifest.fps},
                                             {"frame_count", manifest.frame_count},
                                             {"frame_urls", urls}});
                    } else {
                        res.set_content(read_bytes(path), "image/png");
                    }
                });
            });

    srv.Get(R"(/api/sessions/([^/]+)/media/(\d+)/frames/(\d+))",
            [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                    const auto path = service_.media_file(req.matches[1], std::stoi(req.matches[2]),
                                                          std::stoi(req.matches[3]));
                    res.set_content(read_bytes(path), "image/png");
                });
            });

    if (static_dir)
        srv.set_mount_point("/", static_dir->string());
}

StudyServer::~StudyServer()
{
    stop();
}

int StudyServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0)
            throw Error("cannot bind study server on " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port))
        throw Error("cannot bind study server on " + host + ":" + std::to_string(port) +
                    " (port busy?)");
    return port;
}

void StudyServer::listen()
{
    server_->listen_after_bind();
}

void StudyServer::stop()
{
    if (server_)
        server_->stop();
}

} // namespace spv
