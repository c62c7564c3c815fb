#include "spv/report.hpp"

#include "spv/error.hpp"
#include "spv/image_io.hpp"

#include <glob.h>

#include <cctype>
#include <iomanip>
#include <sstream>

namespace spv {
namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << round_half_up(v, digits);
    return os.str();
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

std::string slug(const std::string& name)
{
    std::string out;
    for (char ch : name)
        out += std::isalnum(static_cast<unsigned char>(ch)) ? static_cast<char>(std::tolower(ch)) : '_';
    return out;
}

std::string room_header(Room r)
{
    std::string s(to_string(r));
    s[0] = static_cast<char>(std::toupper(s[0]));
    return s;
}

} // namespace

std::vector<SessionRecords> load_sessions(const std::string& pattern)
{
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> paths;
    if (rc == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i)
            paths.emplace_back(g.gl_pathv[i]);
    ::globfree(&g);
    if (paths.empty())
        throw IngestionError("no session logs match '" + pattern + "'");

    std::vector<SessionRecords> out;
    for (const auto& p : paths) {
        auto log = read_session_log(p);
        SessionRecords s;
        s.subject_id = log.header.value("subject_id", "");
        s.metadata = log.header.value("metadata", std::map<std::string, std::string>{});
        s.records = std::move(log.records);
        out.push_back(std::move(s));
    }
    return out;
}

json to_json(const ScoreReport& report)
{
    json groups = json::array();
    for (const auto& g : report.groups) {
        json confusion = json::array();
        json recall = json::object();
        json precision = json::object();
        json counts = json::array();
        for (Room a : kAllRooms) {
            const auto row = g.rooms.confusion_row(a);
            confusion.push_back(row ? json(*row) : json(nullptr));
            counts.push_back(g.rooms.counts[static_cast<std::size_t>(a)]);
            recall[std::string(to_string(a))] = optional_number(g.rooms.recall(a));
            precision[std::string(to_string(a))] = optional_number(g.rooms.precision(a));
        }
        json likert = json::object();
        for (std::size_t i = 0; i < kLikertCount; ++i)
            likert[std::string(to_string(kAllLikert[i]))] = g.likert[i];
        json rooms = json::array();
        for (Room r : kAllRooms)
            rooms.push_back(std::string(to_string(r)));

        groups.push_back({
            {"group", g.name},
            {"subjects", g.subjects},
            {"trials", g.trials},
            {"object_opportunities", g.objects.opportunities},
            {"pct_present_correct", g.objects.pct_present_correct()},
            {"pct_present_incorrect", g.objects.pct_present_incorrect()},
            {"pct_missing_correct", g.objects.pct_missing_correct()},
            {"pct_missing_incorrect", g.objects.pct_missing_incorrect()},
            {"pct_correct_identification", g.objects.pct_correct_identification()},
            {"pct_room_recognized", g.rooms.pct_room_recognized()},
            {"likert_distribution", likert},
            {"rooms", rooms},
            {"confusion", confusion},
            {"confusion_counts", counts},
            {"recall", recall},
            {"precision", precision},
            {"ci95_correct_identification", optional_number(g.ci95_identification)},
            {"ci95_room_recognized", optional_number(g.ci95_room)},
        });
    }
    return {{"sessions", report.sessions}, {"excluded_late", report.excluded_late}, {"groups", groups}};
}

std::string format_table(const ScoreReport& report)
{
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"", "Present", "", "Missing", "", "% Correct", "% Room", "Confidence %", "", "", "", ""});
    rows.push_back({"Method", "%C", "%I", "%C", "%I", "identification", "recognized", "DY", "PY", "M", "PN", "DN"});
    for (const auto& g : report.groups) {
        auto ident = fixed(g.objects.pct_correct_identification(), 0);
        auto room = fixed(g.rooms.pct_room_recognized(), 0);
        if (g.ci95_identification)
            ident += " +/- " + fixed(*g.ci95_identification, 2);
        if (g.ci95_room)
            room += " +/- " + fixed(*g.ci95_room, 2);
        std::vector<std::string> row{
            g.name,
            fixed(g.objects.pct_present_correct(), 0),
            fixed(g.objects.pct_present_incorrect(), 0),
            fixed(g.objects.pct_missing_correct(), 0),
            fixed(g.objects.pct_missing_incorrect(), 0),
            ident,
            room,
        };
        for (double v : g.likert)
            row.push_back(fixed(v, 0));
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c)
            width[c] = std::max(width[c], r[c].size());

    std::ostringstream os;
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c == 0)
                os << std::left << std::setw(static_cast<int>(width[c])) << r[c];
            else
                os << " | " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
        }
        os << '\n';
    }
    return os.str();
}

std::string format_confusion(const GroupReport& g)
{
    std::ostringstream os;
    os << g.name << " room confusion (actual \\ predicted)\n";
    os << std::left << std::setw(13) << "";
    for (Room p : kAllRooms)
        os << std::right << std::setw(13) << room_header(p);
    os << std::setw(10) << "Recall" << '\n';
    for (Room a : kAllRooms) {
        os << std::left << std::setw(13) << room_header(a);
        const auto row = g.rooms.confusion_row(a);
        for (std::size_t p = 0; p < kRoomCount; ++p)
            os << std::right << std::setw(13) << (row ? fixed((*row)[p], 2) : "-");
        const auto r = g.rooms.recall(a);
        os << std::setw(10) << (r ? fixed(*r, 2) : "-") << '\n';
    }
    os << std::left << std::setw(13) << "Precision";
    for (Room p : kAllRooms) {
        const auto v = g.rooms.precision(p);
        os << std::right << std::setw(13) << (v ? fixed(*v, 2) : "-");
    }
    os << '\n';
    return os.str();
}

std::string confusion_csv(const GroupReport& g)
{
    std::ostringstream os;
    os << "actual\\predicted";
    for (Room p : kAllRooms)
        os << ',' << to_string(p);
    os << ",recall\n";
    for (Room a : kAllRooms) {
        os << to_string(a);
        const auto row = g.rooms.confusion_row(a);
        for (std::size_t p = 0; p < kRoomCount; ++p)
            os << ',' << (row ? fixed((*row)[p], 2) : "");
        const auto r = g.rooms.recall(a);
        os << ',' << (r ? fixed(*r, 2) : "") << '\n';
    }
    os << "precision";
    for (Room p : kAllRooms) {
        const auto v = g.rooms.precision(p);
        os << ',' << (v ? fixed(*v, 2) : "");
    }
    os << ",\n";
    return os.str();
}

void write_report(const ScoreReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "report.json", to_json(report).dump(2) + "\n");
    std::string text = format_table(report);
    for (const auto& g : report.groups)
        text += "\n" + format_confusion(g);
    write_file_atomic(dir / "report.txt", text);
    for (const auto& g : report.groups)
        write_file_atomic(dir / ("confusion_" + slug(g.name) + ".csv"), confusion_csv(g));
}

} // namespace spv
