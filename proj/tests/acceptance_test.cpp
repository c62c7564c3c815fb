// Acceptance suite: prints one PASS/FAIL line per criterion.

#include "spv/image_io.hpp"
#include "spv/phosphene.hpp"
#include "spv/saliency.hpp"
#include "spv/scoring.hpp"
#include "spv/study_server.hpp"
#include "spv/video.hpp"
#include "study_fixture.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <thread>

using namespace spv;
using spv::testing::TempDir;
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failed = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body)
{
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-20s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    g_failed += o.pass ? 0 : 1;
    CHECK_MESSAGE(o.pass, name << ": " << o.detail);
}

template <typename... Args>
std::string fmt(const char* f, Args... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ElectrodeActivation single_cell(int rows, int cols, int row, int col, int level)
{
    ElectrodeActivation a{rows, cols, 8, std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols, 0)};
    a.levels[static_cast<std::size_t>(row) * cols + col] = static_cast<std::uint8_t>(level);
    return a;
}

Outcome rendering_math()
{
    const auto t0 = Clock::now();
    const auto grid = build_grid(32, 32, 1024, 1024);
    const double sigma = grid.dot_sigma();
    const double cutoff = grid.dot_cutoff_radius();
    double worst = 0.0, at_sigma = 1.0;
    for (int level = 1; level < 8; ++level) {
        const double amp = level / 7.0;
        const auto img = render(single_cell(32, 32, 9, 20, level), grid);
        const auto c = grid.center(9, 20);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                const double d2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
                const double want = d2 <= cutoff * cutoff ? amp * std::exp(-d2 / (2 * sigma * sigma)) : 0.0;
                worst = std::max(worst, std::abs(img.at(x, y) - want));
            }
        at_sigma = std::min(at_sigma, 1e-6 - std::abs(img.at(static_cast<int>(c.x + sigma), static_cast<int>(c.y)) -
                                                       amp * std::exp(-0.5)));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && at_sigma >= 0 && secs < 1.0,
            fmt("max |err| %.2e over 7 levels, |f(sigma) - A e^-1/2| within 1e-6: %s, %.3f s", worst,
                at_sigma >= 0 ? "yes" : "no", secs)};
}

Outcome grid_geometry()
{
    const auto grid = build_grid(32, 32, 512, 512);
    double worst_offset = 0.0, worst_ratio = 0.0;
    for (int r = 0; r + 1 < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            const auto a = grid.center(r, c);
            const auto b = grid.center(r + 1, c);
            worst_offset = std::max(worst_offset, std::abs(std::abs(b.x - a.x) - grid.pitch_x() / 2));
            worst_ratio = std::max(worst_ratio, std::abs((b.y - a.y) - grid.pitch_x() * std::sqrt(3.0) / 2));
        }
    std::set<std::pair<double, double>> unique;
    for (const auto& p : grid.centers())
        unique.insert({p.x, p.y});
    const bool ok = grid.size() == 1024 && unique.size() == 1024 && worst_offset <= 1.0 && worst_ratio <= 1.0;
    return {ok, fmt("%zu distinct centers, row offset dev %.2f px, vertical pitch dev %.2f px", unique.size(),
                    worst_offset, worst_ratio)};
}

Outcome dropout()
{
    const auto base = build_grid(32, 32, 512, 512);
    const auto a = apply_dropout(base, 0.10, 2024);
    const auto b = apply_dropout(base, 0.10, 2024);
    const std::size_t disabled = base.size() - a.alive_count();
    const bool identical = a.alive() == b.alive();

    // A bright sequence lights every living phosphene; the dark centers must
    // be exactly the disabled set in every output frame.
    std::mt19937 gen(5);
    std::uniform_real_distribution<float> bright(0.7f, 1.0f);
    FrameSequence seq;
    for (int i = 0; i < 24; ++i) {
        LumaFrame f(160, 120);
        for (auto& v : f.pixels())
            v = bright(gen);
        seq.frames.push_back(std::move(f));
    }
    const auto out = process_sequence(seq, {}, a, PipelineOptions{});
    bool constant = !out.frames.empty();
    for (const auto& f : out.frames)
        for (int r = 0; r < 32; ++r)
            for (int c = 0; c < 32; ++c) {
                const auto p = base.center(r, c);
                const bool dark = f.at(static_cast<int>(p.x), static_cast<int>(p.y)) == 0.0f;
                constant = constant && dark == !a.is_alive(r, c);
            }
    return {disabled == 102 && identical && constant,
            fmt("%zu of 1024 disabled, same-seed masks identical: %s, mask constant over %zu frames: %s", disabled,
                identical ? "yes" : "no", out.frames.size(), constant ? "yes" : "no")};
}

Outcome quantization()
{
    LumaFrame ramp(1024, 1);
    for (int i = 0; i < 1024; ++i)
        ramp.at(i, 0) = static_cast<float>(i / 1023.0);
    const auto q = quantize(ramp, 8);
    const auto rec = reconstruct(q);
    std::set<float> values(rec.pixels().begin(), rec.pixels().end());
    bool idempotent = true;
    for (int level = 0; level < 8; ++level) {
        const auto one = reconstruct(ElectrodeActivation{1, 1, 8, {static_cast<std::uint8_t>(level)}});
        idempotent = idempotent && quantize(one, 8).levels[0] == level;
    }
    idempotent = idempotent && quantize(rec, 8).levels == q.levels;
    return {values.size() == 8 && idempotent,
            fmt("%zu distinct reconstruction values, quantize(reconstruct(k)) == k for all k: %s", values.size(),
                idempotent ? "yes" : "no")};
}

Outcome temporal_median_criterion()
{
    std::mt19937 gen(50);
    int agree = 0;
    for (int w = 0; w < 50; ++w) {
        FrameSequence seq;
        for (int k = 0; k < 5; ++k)
            seq.frames.push_back(spv::testing::random_frame(31, 17, gen));
        const auto med = temporal_median(seq);
        bool ok = med.frames.size() == 1;
        for (std::size_t i = 0; ok && i < seq.frames[0].size(); ++i) {
            std::array<float, 5> px{};
            for (std::size_t k = 0; k < 5; ++k)
                px[k] = seq.frames[k].pixels()[i];
            std::sort(px.begin(), px.end());
            ok = med.frames[0].pixels()[i] == px[2];
        }
        agree += ok ? 1 : 0;
    }
    FrameSequence long_seq;
    for (int i = 0; i < 200; ++i)
        long_seq.frames.push_back(spv::testing::random_frame(64, 48, gen));
    PipelineOptions opts;
    const auto out = process_sequence(long_seq, {}, build_grid(16, 16, 128, 128), opts);
    return {agree == 50 && out.frames.size() == 196,
            fmt("%d/50 windows match the sort oracle, 200 frames -> %zu", agree, out.frames.size())};
}

SaliencyOverlay random_overlay(std::mt19937& gen, bool with_edges)
{
    const int w = 48 + static_cast<int>(gen() % 64), h = 32 + static_cast<int>(gen() % 48);
    SaliencyOverlay o{w, h, {}, std::nullopt, 0};
    const int n = static_cast<int>(gen() % 4);
    for (int i = 0; i < n; ++i)
        o.objects.push_back({kAllObjectClasses[gen() % 8], "obj", spv::testing::random_mask(w, h, 0.2, gen), 0.9});
    if (with_edges)
        o.edges = EdgeMap{spv::testing::random_frame(w, h, gen), 0.5};
    return o;
}

Outcome compositing()
{
    std::mt19937 gen(100);
    int dominated = 0;
    for (int i = 0; i < 100; ++i) {
        const auto o = random_overlay(gen, true);
        const auto om = compose_om(o);
        const auto sie = compose_sie_om(o);
        bool ok = true;
        for (std::size_t p = 0; p < om.size(); ++p)
            ok = ok && sie.pixels()[p] >= om.pixels()[p];
        dominated += ok ? 1 : 0;
    }
    int equal = 0;
    for (int i = 0; i < 100; ++i) {
        auto o = random_overlay(gen, false);
        o.edges = EdgeMap{LumaFrame(o.width, o.height, 0.0f), 0.5};
        equal += compose_sie_om(o) == compose_om(o) ? 1 : 0;
    }
    return {dominated == 100 && equal == 100,
            fmt("SIE-OM >= OM on %d/100 overlays, empty-edge SIE-OM == OM on %d/100", dominated, equal)};
}

Catalog truth_catalog()
{
    Catalog c;
    for (auto room : kAllRooms) {
        CatalogStimulus s;
        s.id = std::string(to_string(room));
        s.view = View::Cent;
        s.truth.room = room;
        s.truth.objects = {ObjectClass::Bed, ObjectClass::Chair};
        c.stimuli.push_back(s);
    }
    return c;
}

TrialRecord answer(const std::string& id, std::set<ObjectClass> marked, Room room, Likert likert = Likert::M)
{
    TrialRecord r;
    r.stimulus_id = id;
    r.view = View::Cent;
    r.objects_marked = std::move(marked);
    r.room_choice = room;
    r.likert = likert;
    return r;
}

Outcome scoring_identities()
{
    const auto c = truth_catalog();

    // Random records: the four buckets always sum to 100.
    std::mt19937 gen(9);
    double worst_sum = 0.0;
    for (int round = 0; round < 50; ++round) {
        std::vector<TrialRecord> rs;
        for (int i = 0; i < 30; ++i) {
            std::set<ObjectClass> marked;
            for (auto cls : kAllObjectClasses)
                if (gen() % 2)
                    marked.insert(cls);
            rs.push_back(answer(c.stimuli[gen() % 4].id, marked, kAllRooms[gen() % 4]));
        }
        const auto s = score_objects(rs, c);
        worst_sum = std::max(worst_sum, std::abs(s.pct_present_correct() + s.pct_present_incorrect() +
                                                 s.pct_missing_correct() + s.pct_missing_incorrect() - 100.0));
    }

    // 400 judgments: 56 hits (14%) and 264 correct rejections (66%).
    std::vector<TrialRecord> table1;
    for (int i = 0; i < 50; ++i) {
        std::set<ObjectClass> marked;
        if (i < 28)
            marked = {ObjectClass::Bed, ObjectClass::Chair};
        if (i >= 14)
            marked.insert(ObjectClass::Sink);
        table1.push_back(answer("kitchen", marked, Room::Kitchen));
    }
    const auto s1 = score_objects(table1, c);
    const double hits = round_half_up(s1.pct_present_correct());
    const double rejections = round_half_up(s1.pct_missing_correct());
    const double ident = round_half_up(s1.pct_correct_identification());

    std::vector<TrialRecord> bedroom;
    for (int i = 0; i < 8; ++i)
        bedroom.push_back(answer("bedroom", {}, i < 5 ? Room::Bedroom : Room::LivingRoom));
    const auto rooms = score_rooms(bedroom, c);
    const auto row = *rooms.confusion_row(Room::Bedroom);
    const double r_bed = round_half_up(row[0], 2);
    const double r_liv = round_half_up(row[3], 2);
    const double recall = round_half_up(*rooms.recall(Room::Bedroom), 2);

    const bool ok = worst_sum < 1e-9 && hits == 14 && rejections == 66 && ident == 80 &&
                    std::abs(r_bed - 0.63) < 1e-9 && std::abs(r_liv - 0.38) < 1e-9 && row[1] == 0 && row[2] == 0 &&
                    std::abs(recall - 62.50) < 1e-9;
    return {ok, fmt("bucket sum dev %.1e; %g + %g -> %g; bedroom row %.2f/%.2f/%.2f/%.2f recall %.2f", worst_sum,
                    hits, rejections, ident, round_half_up(row[0], 2), row[1], row[2], r_liv, recall)};
}

Outcome likert_split()
{
    const std::array<int, 5> split{2, 4, 3, 2, 1};
    std::vector<TrialRecord> rs;
    for (std::size_t i = 0; i < 5; ++i)
        for (int k = 0; k < split[i]; ++k)
            rs.push_back(answer("bedroom", {}, Room::Bedroom, kAllLikert[i]));
    const auto d = likert_distribution(rs);
    std::array<double, 5> r{};
    for (std::size_t i = 0; i < 5; ++i)
        r[i] = round_half_up(d[i]);
    const bool ok = r == std::array<double, 5>{17, 33, 25, 17, 8};
    return {ok, fmt("DY/PY/M/PN/DN = %g/%g/%g/%g/%g", r[0], r[1], r[2], r[3], r[4])};
}

// Smooth synthetic scene with a drifting bright block; the block is also the
// detected object and its outline the edge map.
void write_video_fixture(const fs::path& dir, int frames, int w, int h)
{
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "overlays");
    for (int i = 0; i < frames; ++i) {
        LumaFrame img(w, h), mask(w, h), edge(w, h);
        const int bx = 40 + (i * 3) % (w - 200), by = 60 + (i * 2) % (h - 180);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool in = x >= bx && x < bx + 140 && y >= by && y < by + 100;
                const bool border = in && (x < bx + 3 || x >= bx + 137 || y < by + 3 || y >= by + 97);
                img.at(x, y) = in ? 0.9f : static_cast<float>(0.2 + 0.3 * x / w);
                mask.at(x, y) = in ? 1.0f : 0.0f;
                edge.at(x, y) = border ? 1.0f : 0.0f;
            }
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.png", i);
        write_png(dir / "frames" / name, img);
        const auto m = "mask_" + std::to_string(i) + ".png";
        const auto e = "edge_" + std::to_string(i) + ".png";
        write_png(dir / "overlays" / m, mask);
        write_png(dir / "overlays" / e, edge);
        std::ofstream(overlay_manifest_path(dir / "overlays", i))
            << json{{"width", w},
                    {"height", h},
                    {"edge_file", e},
                    {"objects", {{{"class", "couch"}, {"score", 0.95}, {"mask_file", m}}}}}
                   .dump();
    }
}

Outcome throughput()
{
    TempDir dir("accept-video");
    write_video_fixture(dir.path(), 200, 640, 480);
    const std::string cmd = std::string("\"") + SPV_CLI_PATH + "\" video --frames \"" + (dir / "frames").string() +
                            "\" --overlays \"" + (dir / "overlays").string() +
                            "\" --method sie-om --canvas 512 --seed 1 -o \"" + (dir / "out").string() +
                            "\" >/dev/null 2>&1";
    const auto t0 = Clock::now();
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    const int produced = static_cast<int>(std::distance(fs::directory_iterator(dir / "out"), {})) - 1;
    const double fps = 200.0 / secs;
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0 && produced == 196 && fps >= 20.0;
    return {ok, fmt("200 frames 640x480 -> %d frames 512x512 in %.2f s (%.1f fps, %u hw threads)", produced, secs,
                    fps, std::thread::hardware_concurrency())};
}

Outcome protocol()
{
    TempDir dir("accept-protocol");
    const auto catalog = load_catalog(spv::testing::write_study_catalog(dir.path()));
    double now = 0.0;
    StudyService svc(catalog, 31, dir / "logs", [&] { return now; });
    std::mt19937 gen(12);
    int scanned = 0, leaks = 0;
    std::string id;
    bool replay_ok = true;
    for (int subject = 0; subject < 3; ++subject) {
        id = svc.create_session("S" + std::to_string(subject), {{"age", "30"}}).session_id;
        for (;;) {
            const json d = svc.next(id);
            const auto state = svc.snapshot(id);
            const std::string stim = d.value("done", false)
                                         ? std::string()
                                         : state.plan.trials[static_cast<std::size_t>(state.cursor)].stimulus_id;
            ++scanned;
            leaks += spv::testing::is_blind(d, stim) ? 0 : 1;
            if (d.value("done", false))
                break;
            now += static_cast<double>(gen() % 40);
            svc.submit(id, {{"trial_index", d["trial_index"]},
                            {"objects_marked", {"bed"}},
                            {"room_choice", std::string(to_string(kAllRooms[gen() % 4]))},
                            {"likert", "M"}});
            if (gen() % 5 == 0)
                replay_ok = replay_ok && replay_session(read_session_log(svc.log_path(id)), catalog) == svc.snapshot(id);
        }
        replay_ok = replay_ok && replay_session(read_session_log(svc.log_path(id)), catalog) == svc.snapshot(id);
    }
    return {replay_ok && leaks == 0,
            fmt("replay identical: %s; %d descriptors scanned, %d leaking ground truth", replay_ok ? "yes" : "no",
                scanned, leaks)};
}

} // namespace

TEST_CASE("acceptance")
{
    criterion("rendering-math", rendering_math);
    criterion("grid-geometry", grid_geometry);
    criterion("dropout", dropout);
    criterion("quantization", quantization);
    criterion("temporal-median", temporal_median_criterion);
    criterion("compositing", compositing);
    criterion("scoring-identities", scoring_identities);
    criterion("likert-split", likert_split);
    criterion("throughput", throughput);
    criterion("protocol", protocol);
    std::printf("%d criteria failed\n", g_failed);
}
