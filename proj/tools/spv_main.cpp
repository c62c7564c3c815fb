// spv: simulated prosthetic vision renderer, video pipeline, study server and
// scorer.

#include "spv/error.hpp"
#include "spv/grid_config.hpp"
#include "spv/report.hpp"
#include "spv/sequence_io.hpp"
#include "spv/study_server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <random>

namespace {

using namespace spv;

struct SharedFlags {
    std::string grid_config;
    std::string grid;
    int levels = 0;
    double dropout = -1.0;
    std::optional<std::uint64_t> seed;
    int canvas = 0;
    std::string method = "direct";
    double fov_src = 0.0;
    double fov_dst = 20.0;
    double edge_threshold = 0.5;
    double min_score = 0.7;
    std::vector<std::string> classes;
};

void add_render_flags(CLI::App* cmd, SharedFlags& f)
{
    cmd->add_option("--grid-config", f.grid_config, "key = value grid config providing defaults");
    cmd->add_option("--grid", f.grid, "phosphene lattice, ROWSxCOLS (default 32x32)");
    cmd->add_option("--levels", f.levels, "luminance levels (default 8)");
    cmd->add_option("--dropout", f.dropout, "fraction of phosphenes turned off (default 0.10)");
    cmd->add_option("--seed", f.seed, "dropout seed; drawn and printed when omitted");
    cmd->add_option("--canvas", f.canvas, "square output canvas in pixels (default 512)");
    cmd->add_option("--method", f.method, "direct, om or sie-om")->capture_default_str();
    cmd->add_option("--fov-src", f.fov_src, "source horizontal FOV in degrees; enables the FOV crop");
    cmd->add_option("--fov-dst", f.fov_dst, "target horizontal FOV in degrees")->capture_default_str();
    cmd->add_option("--edge-threshold", f.edge_threshold, "edge probability drawn as structure")
        ->capture_default_str();
    cmd->add_option("--min-score", f.min_score, "detection score floor")->capture_default_str();
    cmd->add_option("--classes", f.classes, "allowed object classes (default: all eight)");
}

std::uint64_t draw_seed()
{
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

GridConfig resolve_grid(const SharedFlags& f)
{
    GridConfig g;
    if (!f.grid_config.empty())
        g = load_grid_config(f.grid_config);
    if (!f.grid.empty()) {
        const auto x = f.grid.find('x');
        if (x == std::string::npos)
            throw ConfigError("--grid expects ROWSxCOLS, got '" + f.grid + "'");
        try {
            g.rows = std::stoi(f.grid.substr(0, x));
            g.cols = std::stoi(f.grid.substr(x + 1));
        } catch (const std::exception&) {
            throw ConfigError("--grid expects ROWSxCOLS, got '" + f.grid + "'");
        }
    }
    if (f.levels != 0)
        g.levels = f.levels;
    if (f.dropout >= 0.0)
        g.dropout_rate = f.dropout;
    if (f.canvas != 0)
        g.canvas_width = g.canvas_height = f.canvas;
    if (f.seed) {
        g.seed = *f.seed;
    } else if (f.grid_config.empty()) {
        g.seed = draw_seed();
        std::cerr << "seed: " << g.seed << '\n';
    }
    validate(g);
    return g;
}

PipelineOptions resolve_pipeline(const SharedFlags& f, int levels)
{
    PipelineOptions p;
    p.method = parse_method(f.method);
    p.levels = levels;
    if (f.fov_src > 0.0) {
        p.fov = FovSpec{f.fov_src, f.fov_dst};
        validate(*p.fov);
    }
    return p;
}

OverlayConfig resolve_overlay(const SharedFlags& f)
{
    OverlayConfig c;
    if (!(f.edge_threshold > 0.0 && f.edge_threshold < 1.0))
        throw ConfigError("--edge-threshold must lie in (0, 1)");
    if (!(f.min_score >= 0.0 && f.min_score <= 1.0))
        throw ConfigError("--min-score must lie in [0, 1]");
    c.edge_threshold = f.edge_threshold;
    c.min_score = f.min_score;
    if (!f.classes.empty()) {
        c.allowed.clear();
        for (const auto& name : f.classes) {
            const auto cls = parse_object_class(name);
            if (!cls)
                throw ConfigError("unknown object class '" + name + "'");
            c.allowed.insert(*cls);
        }
    }
    return c;
}

StudyServer* g_server = nullptr;

extern "C" void handle_signal(int)
{
    if (g_server)
        g_server->stop();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulated prosthetic vision toolkit"};
    app.require_subcommand(1);

    SharedFlags render_flags;
    std::string image, overlay_file, overlay_dir, output;
    int frame_index = 0;
    bool debug = false;
    auto* render = app.add_subcommand("render", "render one image as phosphenes");
    add_render_flags(render, render_flags);
    render->add_option("--image", image, "source image")->required();
    render->add_option("--overlay", overlay_file, "overlay manifest (om / sie-om)");
    render->add_option("--overlay-dir", overlay_dir, "directory of overlay_NNNNNN.json manifests");
    render->add_option("--frame", frame_index, "overlay index within --overlay-dir")->capture_default_str();
    render->add_option("--output,-o", output, "output PNG")->required();
    render->add_flag("--debug", debug, "write source | composed | rendered strip");

    SharedFlags video_flags;
    std::string frames_dir, overlays_dir, video_out;
    double fps = kDisplayFps;
    unsigned workers = 0;
    auto* video = app.add_subcommand("video", "render a numbered frame directory");
    add_render_flags(video, video_flags);
    video->add_option("--frames", frames_dir, "directory of numbered PNG frames")->required();
    video->add_option("--overlays", overlays_dir, "directory of overlay_NNNNNN.json manifests");
    video->add_option("--output,-o", video_out, "output directory")->required();
    video->add_option("--fps", fps, "playback rate recorded in the manifest")->capture_default_str();
    video->add_option("--workers", workers, "render threads (0 = all cores)");

    std::string catalog_path, log_dir = "sessions", host = "127.0.0.1", static_dir;
    std::optional<std::uint64_t> study_seed;
    int port = 8080;
    auto* study = app.add_subcommand("study", "serve study sessions over HTTP");
    study->add_option("--catalog", catalog_path, "stimulus catalog JSON")->required();
    study->add_option("--seed", study_seed, "base seed for per-session trial orders");
    study->add_option("--port", port, "listen port")->capture_default_str();
    study->add_option("--host", host, "listen address")->capture_default_str();
    study->add_option("--log-dir", log_dir, "where session .jsonl logs go")->capture_default_str();
    study->add_option("--static", static_dir, "serve a web client from this directory");

    std::string sessions_glob, score_catalog, group_by = "method-kind-view", score_out = "report";
    bool exclude_late = false;
    std::vector<std::string> filters;
    auto* score = app.add_subcommand("score", "aggregate session logs into result tables");
    score->add_option("--sessions", sessions_glob, "glob of session .jsonl logs")->required();
    score->add_option("--catalog", score_catalog, "stimulus catalog JSON")->required();
    score->add_option("--group-by", group_by, "method-kind-view, method-kind or method")
        ->capture_default_str();
    score->add_flag("--exclude-late", exclude_late, "drop responses past the time limit");
    score->add_option("--filter", filters, "only sessions with metadata KEY=VALUE");
    score->add_option("--output,-o", score_out, "report directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*render) {
            RenderJob job;
            job.grid = resolve_grid(render_flags);
            job.pipeline = resolve_pipeline(render_flags, job.grid.levels);
            job.overlay = resolve_overlay(render_flags);
            job.image = image;
            job.output = output;
            job.debug = debug;
            if (!overlay_file.empty())
                job.overlay_manifest = overlay_file;
            else if (!overlay_dir.empty())
                job.overlay_manifest = overlay_manifest_path(overlay_dir, frame_index);
            run_render(job);
        } else if (*video) {
            VideoJob job;
            job.grid = resolve_grid(video_flags);
            job.pipeline = resolve_pipeline(video_flags, job.grid.levels);
            job.overlay = resolve_overlay(video_flags);
            job.frames_dir = frames_dir;
            if (!overlays_dir.empty())
                job.overlays_dir = overlays_dir;
            job.output_dir = video_out;
            job.fps = fps;
            job.workers = workers;
            const auto result = run_video(job);
            std::cout << result.input_frames << " frames in, " << result.output_frames
                      << " frames out, " << result.throughput_fps << " fps\n";
        } else if (*study) {
            const std::uint64_t seed = study_seed ? *study_seed : draw_seed();
            if (!study_seed)
                std::cerr << "seed: " << seed << '\n';
            StudyService service(load_catalog(catalog_path), seed, log_dir);
            StudyServer server(service, static_dir.empty() ? std::nullopt
                                                            : std::optional<std::filesystem::path>(static_dir));
            const int bound = server.bind(host, port);
            std::cout << "study server on http://" << host << ':' << bound << std::endl;
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            server.listen();
            g_server = nullptr;
        } else if (*score) {
            ScoreOptions options;
            options.group_by = parse_group_by(group_by);
            options.include_late = !exclude_late;
            for (const auto& f : filters) {
                const auto eq = f.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--filter expects KEY=VALUE, got '" + f + "'");
                options.metadata_filter[f.substr(0, eq)] = f.substr(eq + 1);
            }
            const auto report = score_sessions(load_sessions(sessions_glob), load_catalog(score_catalog), options);
            write_report(report, score_out);
            std::cout << format_table(report);
        }
    } catch (const spv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
