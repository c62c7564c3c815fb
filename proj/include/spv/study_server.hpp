#pragma once

#include "spv/error.hpp"
#include "spv/study.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace spv {

/// Hosts study sessions over one catalog. Each session has its own lock and
/// is only mutated through submit(), so concurrent sessions never contend on
/// each other's state. Every accepted record is appended to
/// `<log_dir>/<session_id>.jsonl` before the call returns.
class StudyService {
public:
    using Clock = std::function<double()>;  // seconds, monotonic

    StudyService(Catalog catalog, std::uint64_t base_seed, std::filesystem::path log_dir,
                 Clock clock = {});
    ~StudyService();

    struct Created {
        std::string session_id;
        std::uint64_t seed = 0;
        int trial_count = 0;
    };

    /// Seed defaults to base_seed + the session's ordinal.
    Created create_session(const std::string& subject_id,
                           std::map<std::string, std::string> metadata = {},
                           std::optional<std::uint64_t> seed = std::nullopt);

    /// Descriptor for the trial at the cursor, or {"done": true}. Never carries
    /// ground truth or stimulus ids. Starts the trial's clock on first fetch.
    nlohmann::json next(const std::string& session_id);

    /// Accepts {"trial_index", "objects_marked", "room_choice", "likert"}.
    /// The response time is measured server-side from the first next() of the
    /// trial. Throws ProtocolError for unserved, duplicate, or out-of-order
    /// trials and FormatError for malformed bodies.
    nlohmann::json submit(const std::string& session_id, const nlohmann::json& body);

    nlohmann::json status(const std::string& session_id) const;

    /// File behind a trial's media, restricted to trials already served.
    /// For videos, `frame` selects a frame of the sequence.
    std::filesystem::path media_file(const std::string& session_id, int trial_index,
                                     std::optional<int> frame = std::nullopt) const;

    SessionState snapshot(const std::string& session_id) const;
    std::filesystem::path log_path(const std::string& session_id) const;
    const Catalog& catalog() const noexcept { return catalog_; }

    class UnknownSession : public ProtocolError {
    public:
        using ProtocolError::ProtocolError;
    };

private:
    struct Session;
    Session& find(const std::string& session_id) const;

    Catalog catalog_;
    std::uint64_t base_seed_;
    std::filesystem::path log_dir_;
    Clock clock_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    int ordinal_ = 0;
};

/// HTTP+JSON front end for StudyService:
///
///     POST /api/sessions                               -> create
///     GET  /api/sessions/{id}/next                     -> descriptor | {"done": true}
///     POST /api/sessions/{id}/responses                -> submit
///     GET  /api/sessions/{id}/status
///     GET  /api/sessions/{id}/media/{trial}            -> PNG or video manifest
///     GET  /api/sessions/{id}/media/{trial}/frames/{k} -> PNG
class StudyServer {
public:
    explicit StudyServer(StudyService& service,
                         std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~StudyServer();

    /// Port 0 picks a free port. Throws Error when the port cannot be bound.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();

private:
    StudyService& service_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace spv
