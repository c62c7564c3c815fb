#include "spv/scoring.hpp"

#include "spv/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <map>
#include <numeric>

namespace spv {
namespace {

const CatalogStimulus& lookup(const Catalog& catalog, const TrialRecord& r)
{
    const auto* s = catalog.find(r.stimulus_id);
    if (s == nullptr)
        throw ConsistencyError("record for trial " + std::to_string(r.trial_index) +
                               " names unknown stimulus '" + r.stimulus_id + "'");
    return *s;
}

void require_records(const std::vector<TrialRecord>& records)
{
    if (records.empty())
        throw InsufficientDataError("no trial records to score");
}

std::string method_label(Method m)
{
    return m == Method::SieOm ? "SIE-OM" : m == Method::Om ? "OM" : "DIRECT";
}

} // namespace

std::optional<std::array<double, kRoomCount>> RoomScore::confusion_row(Room actual) const
{
    const auto& row = counts[static_cast<std::size_t>(actual)];
    const long long total = std::accumulate(row.begin(), row.end(), 0LL);
    if (total == 0)
        return std::nullopt;
    std::array<double, kRoomCount> out{};
    for (std::size_t p = 0; p < kRoomCount; ++p)
        out[p] = static_cast<double>(row[p]) / static_cast<double>(total);
    return out;
}

std::optional<double> RoomScore::recall(Room actual) const
{
    const auto a = static_cast<std::size_t>(actual);
    const long long total = std::accumulate(counts[a].begin(), counts[a].end(), 0LL);
    if (total == 0)
        return std::nullopt;
    return 100.0 * static_cast<double>(counts[a][a]) / static_cast<double>(total);
}

std::optional<double> RoomScore::precision(Room predicted) const
{
    const auto p = static_cast<std::size_t>(predicted);
    long long total = 0;
    for (std::size_t a = 0; a < kRoomCount; ++a)
        total += counts[a][p];
    if (total == 0)
        return std::nullopt;
    return 100.0 * static_cast<double>(counts[p][p]) / static_cast<double>(total);
}

double RoomScore::pct_room_recognized() const
{
    return trials == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(trials);
}

ObjectScore score_objects(const std::vector<TrialRecord>& records, const Catalog& catalog)
{
    require_records(records);
    ObjectScore score;
    for (const auto& r : records) {
        const auto& truth = lookup(catalog, r).truth.objects;
        for (ObjectClass c : kAllObjectClasses) {
            const bool present = truth.contains(c);
            const bool marked = r.objects_marked.contains(c);
            ++score.opportunities;
            if (present && marked)
                ++score.present_correct;
            else if (!present && marked)
                ++score.present_incorrect;
            else if (!present && !marked)
                ++score.missing_correct;
            else
                ++score.missing_incorrect;
        }
    }
    return score;
}

RoomScore score_rooms(const std::vector<TrialRecord>& records, const Catalog& catalog)
{
    require_records(records);
    RoomScore score;
    for (const auto& r : records) {
        const Room actual = lookup(catalog, r).truth.room;
        ++score.counts[static_cast<std::size_t>(actual)][static_cast<std::size_t>(r.room_choice)];
        ++score.trials;
        if (actual == r.room_choice)
            ++score.correct;
    }
    return score;
}

std::array<double, kLikertCount> likert_distribution(const std::vector<TrialRecord>& records)
{
    require_records(records);
    std::array<long long, kLikertCount> counts{};
    for (const auto& r : records)
        ++counts[static_cast<std::size_t>(r.likert)];
    std::array<double, kLikertCount> out{};
    for (std::size_t i = 0; i < kLikertCount; ++i)
        out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(records.size());
    return out;
}

double ci95(const std::vector<double>& scores)
{
    if (scores.size() < 2)
        throw InsufficientDataError("a confidence interval needs at least two subjects");
    const double n = static_cast<double>(scores.size());
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : scores)
        ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return 1.96 * sd / std::sqrt(n);
}

GroupBy parse_group_by(std::string_view s)
{
    if (s == "method-kind-view")
        return GroupBy::MethodKindView;
    if (s == "method-kind")
        return GroupBy::MethodKind;
    if (s == "method")
        return GroupBy::Method;
    throw ConfigError("unknown grouping '" + std::string(s) +
                      "' (expected method-kind-view, method-kind, method)");
}

std::string group_name(const TrialRecord& r, GroupBy group_by)
{
    std::string name = method_label(r.method);
    if (group_by == GroupBy::Method)
        return name;
    if (r.kind == StimulusKind::Video)
        return name + " Vid";
    if (group_by == GroupBy::MethodKind || !r.view)
        return name + " Ima";
    return name + (*r.view == View::Cent ? " Cent" : " Rand");
}

ScoreReport score_sessions(const std::vector<SessionRecords>& sessions, const Catalog& catalog,
                           const ScoreOptions& options)
{
    ScoreReport report;
    // group -> subject -> records, keeping first-seen group order stable by
    // sorting on a method/kind/view key.
    std::map<std::string, std::map<std::string, std::vector<TrialRecord>>> grouped;
    std::map<std::string, std::tuple<int, int, int>> order;

    for (const auto& session : sessions) {
        bool match = true;
        for (const auto& [k, v] : options.metadata_filter) {
            auto it = session.metadata.find(k);
            match = match && it != session.metadata.end() && it->second == v;
        }
        if (!match)
            continue;
        ++report.sessions;
        for (const auto& r : session.records) {
            (void)lookup(catalog, r);
            if (r.late && !options.include_late) {
                ++report.excluded_late;
                continue;
            }
            const auto name = group_name(r, options.group_by);
            grouped[name][session.subject_id].push_back(r);
            const int view_key = r.kind == StimulusKind::Video ? 2 : r.view ? static_cast<int>(*r.view) : 0;
            order.try_emplace(name, static_cast<int>(r.method), static_cast<int>(r.kind), view_key);
        }
    }

    if (grouped.empty())
        throw InsufficientDataError(report.sessions == 0 ? "no session matches the metadata filter"
                                                         : "no scorable trials");

    std::vector<std::string> names;
    for (const auto& [name, _] : grouped)
        names.push_back(name);
    std::sort(names.begin(), names.end(),
              [&](const std::string& a, const std::string& b) { return order[a] < order[b]; });

    for (const auto& name : names) {
        const auto& by_subject = grouped[name];
        std::vector<TrialRecord> all;
        std::vector<double> ident;
        std::vector<double> room;
        for (const auto& [subject, records] : by_subject) {
            all.insert(all.end(), records.begin(), records.end());
            ident.push_back(score_objects(records, catalog).pct_correct_identification());
            room.push_back(score_rooms(records, catalog).pct_room_recognized());
        }
        GroupReport g;
        g.name = name;
        g.subjects = static_cast<int>(by_subject.size());
        g.trials = static_cast<long long>(all.size());
        g.objects = score_objects(all, catalog);
        g.rooms = score_rooms(all, catalog);
        g.likert = likert_distribution(all);
        if (ident.size() >= 2) {
            g.ci95_identification = ci95(ident);
            g.ci95_room = ci95(room);
        }
        report.groups.push_back(std::move(g));
    }
    return report;
}

double round_half_up(double value, int digits)
{
    const double scale = std::pow(10.0, digits);
    // The small nudge keeps products like 0.625 * 100 = 62.4999... on the
    // intended side.
    return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

} // namespace spv
