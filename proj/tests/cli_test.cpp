#include "spv/image_io.hpp"
#include "spv/study_server.hpp"
#include "study_fixture.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace spv;
using spv::testing::TempDir;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int run(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string("\"") + SPV_CLI_PATH + "\" " + args + " >\"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string q(const fs::path& p)
{
    return "\"" + p.string() + "\"";
}

void write_overlay(const fs::path& dir, int index, const LumaFrame& mask)
{
    const auto name = "mask_" + std::to_string(index) + ".png";
    write_png(dir / name, mask);
    json m{{"width", mask.width()},
           {"height", mask.height()},
           {"objects", {{{"class", "bed"}, {"score", 0.9}, {"mask_file", name}}}}};
    std::ofstream(overlay_manifest_path(dir, index)) << m.dump();
}

} // namespace

TEST_CASE("render")
{
    TempDir dir("cli-render");
    std::mt19937 gen(5);
    write_png(dir / "in.png", spv::testing::random_frame(320, 240, gen));
    const auto log = dir / "log.txt";

    const std::string common = "render --image " + q(dir / "in.png") + " --dropout 0.10 --seed 7";
    REQUIRE(run(common + " -o " + q(dir / "a.png"), log) == 0);
    REQUIRE(run(common + " -o " + q(dir / "b.png"), log) == 0);
    CHECK(slurp(dir / "a.png") == slurp(dir / "b.png"));
    const auto out = read_luma(dir / "a.png");
    CHECK(out.width() == 512);
    CHECK(out.height() == 512);

    REQUIRE(run("render --image " + q(dir / "in.png") + " -o " + q(dir / "c.png") + " --canvas 256", log) == 0);
    CHECK(slurp(log).find("seed: ") != std::string::npos);
    CHECK(read_luma(dir / "c.png").width() == 256);

    fs::create_directories(dir / "ov");
    write_overlay(dir / "ov", 0, spv::testing::random_mask(320, 240, 0.3, gen));
    REQUIRE(run(common + " --method om --overlay-dir " + q(dir / "ov") + " --frame 0 --debug -o " +
                    q(dir / "d.png"),
                log) == 0);
    CHECK(read_luma(dir / "d.png").width() > 512);

    CHECK(run("render --image " + q(dir / "missing.png") + " -o " + q(dir / "e.png"), log) == 1);
    CHECK(run(common + " --method sie-om --overlay-dir " + q(dir / "ov") + " --frame 3 -o " + q(dir / "e.png"),
              log) == 1);
    CHECK(run(common + " --method nonsense -o " + q(dir / "e.png"), log) != 0);
    CHECK(run(common + " --grid 200x200 -o " + q(dir / "e.png"), log) == 1);
    CHECK_FALSE(fs::exists(dir / "e.png"));
}

TEST_CASE("video")
{
    TempDir dir("cli-video");
    std::mt19937 gen(8);
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "ov");
    for (int i = 0; i < 12; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "f%03d.png", i);
        write_png(dir / "frames" / name, spv::testing::random_frame(96, 72, gen));
        write_overlay(dir / "ov", i, spv::testing::random_mask(96, 72, 0.2, gen));
    }
    const auto log = dir / "log.txt";
    const std::string args = "video --frames " + q(dir / "frames") + " --overlays " + q(dir / "ov") +
                             " --method om --grid 16x16 --canvas 128 --seed 3 --workers 1 -o ";
    REQUIRE(run(args + q(dir / "out"), log) == 0);
    const auto manifest = json::parse(slurp(dir / "out" / "sequence.json"));
    CHECK(manifest.at("frame_count") == 8);
    CHECK(manifest.at("fps") == 20.0);
    CHECK(fs::exists(dir / "out" / "frame_000007.png"));

    CHECK(run(args + q(dir / "out"), log) == 1);  // refuses to overwrite
    fs::remove(overlay_manifest_path(dir / "ov", 4));
    CHECK(run(args + q(dir / "out2"), log) == 1);
    CHECK(slurp(log).find("frame 4") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out2"));
}

TEST_CASE("score")
{
    TempDir dir("cli-score");
    const auto catalog_path = spv::testing::write_study_catalog(dir.path());
    {
        StudyService svc(load_catalog(catalog_path), 1, dir / "logs");
        for (const std::string subject : {"S1", "S2"}) {
            const auto id = svc.create_session(subject, {{"cohort", "x"}}).session_id;
            for (json d = svc.next(id); !d.value("done", false); d = svc.next(id))
                svc.submit(id, {{"trial_index", d["trial_index"]},
                                {"objects_marked", {"bed", "chair"}},
                                {"room_choice", "bedroom"},
                                {"likert", "PY"}});
        }
    }
    const auto log = dir / "log.txt";
    REQUIRE(run("score --sessions " + q(dir / "logs" / "*.jsonl") + " --catalog " + q(catalog_path) + " -o " +
                    q(dir / "report"),
                log) == 0);
    const auto report = json::parse(slurp(dir / "report" / "report.json"));
    CHECK(report.at("groups").size() == 6);
    CHECK(slurp(log).find("OM Cent") != std::string::npos);
    CHECK(fs::exists(dir / "report" / "report.txt"));
    CHECK(fs::exists(dir / "report" / "confusion_om_cent.csv"));

    CHECK(run("score --sessions " + q(dir / "nothing" / "*.jsonl") + " --catalog " + q(catalog_path) + " -o " +
                  q(dir / "r2"),
              log) == 1);
    CHECK(run("score --sessions " + q(dir / "logs" / "*.jsonl") + " --catalog " + q(catalog_path) +
                  " --filter cohort=y -o " + q(dir / "r3"),
              log) == 1);
    CHECK_FALSE(fs::exists(dir / "r2"));
    CHECK_FALSE(fs::exists(dir / "r3"));
}
