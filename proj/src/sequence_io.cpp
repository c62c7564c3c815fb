#include "spv/sequence_io.hpp"

#include "spv/error.hpp"
#include "spv/image_io.hpp"

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unistd.h>

namespace spv {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
/// failure.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn)
{
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(workers, n);
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back(body);
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

unsigned resolve_workers(unsigned requested)
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<unsigned long long> embedded_number(const std::string& stem)
{
    auto end = stem.find_last_of("0123456789");
    if (end == std::string::npos)
        return std::nullopt;
    auto begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1])))
        --begin;
    return std::stoull(stem.substr(begin, end - begin + 1));
}

json grid_json(const GridConfig& g)
{
    return {
        {"rows", g.rows},
        {"cols", g.cols},
        {"canvas_width", g.canvas_width},
        {"canvas_height", g.canvas_height},
        {"levels", g.levels},
        {"sigma_ratio", g.sigma_ratio},
        {"cutoff_ratio", g.cutoff_ratio},
        {"dropout_rate", g.dropout_rate},
        {"seed", g.seed},
    };
}

cv::Mat to_mat8(const LumaFrame& frame)
{
    cv::Mat m(frame.height(), frame.width(), CV_8UC1);
    for (int y = 0; y < frame.height(); ++y) {
        auto src = frame.row(y);
        auto* dst = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < frame.width(); ++x)
            dst[x] = static_cast<std::uint8_t>(src[x] * 255.0f + 0.5f);
    }
    return m;
}

LumaFrame from_mat8(const cv::Mat& m)
{
    LumaFrame frame(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* src = m.ptr<std::uint8_t>(y);
        auto dst = frame.row(y);
        for (int x = 0; x < m.cols; ++x)
            dst[x] = src[x] / 255.0f;
    }
    return frame;
}

cv::Mat scale_to_height(const LumaFrame& frame, int height, int interpolation)
{
    cv::Mat src = to_mat8(frame);
    const int width = std::max(1, static_cast<int>(std::lround(
                                      static_cast<double>(frame.width()) * height / frame.height())));
    cv::Mat dst;
    cv::resize(src, dst, cv::Size(width, height), 0, 0, interpolation);
    return dst;
}

fs::path staging_dir_for(const fs::path& output)
{
    auto name = "." + output.filename().string() + ".partial" + std::to_string(::getpid());
    return output.parent_path() / name;
}

void promote_dir(const fs::path& staging, const fs::path& output)
{
    if (fs::exists(output)) {
        if (!fs::is_directory(output) || !fs::is_empty(output))
            throw PipelineError("output directory " + output.string() + " already exists and is not empty");
        fs::remove(output);
    }
    fs::rename(staging, output);
}

} // namespace

std::vector<fs::path> list_frames(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw IngestionError("frame directory not found: " + dir.string());
    std::vector<fs::path> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (ext == ".png")
            frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end(), [](const fs::path& a, const fs::path& b) {
        const auto na = embedded_number(a.stem().string());
        const auto nb = embedded_number(b.stem().string());
        if (na && nb && *na != *nb)
            return *na < *nb;
        return a.filename() < b.filename();
    });
    return frames;
}

std::string output_frame_name(int index)
{
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.png", index);
    return name;
}

VideoResult run_video(const VideoJob& job)
{
    validate(job.grid);
    if (job.pipeline.fov)
        validate(*job.pipeline.fov);
    if (!(job.fps > 0.0))
        throw ConfigError("fps must be positive");

    const auto start = std::chrono::steady_clock::now();
    const auto frames = list_frames(job.frames_dir);
    const int n = static_cast<int>(frames.size());
    if (n < job.pipeline.median_window)
        throw LengthError("found " + std::to_string(n) + " frames in " + job.frames_dir.string() +
                          "; the median window needs at least " +
                          std::to_string(job.pipeline.median_window));

    const bool needs_overlays = job.pipeline.method != Method::Direct;
    if (needs_overlays) {
        if (!job.overlays_dir)
            throw PipelineError("method " + std::string(to_string(job.pipeline.method)) +
                                " requires an overlay directory");
        for (int i = 0; i < n; ++i)
            if (!fs::exists(overlay_manifest_path(*job.overlays_dir, i)))
                throw PipelineError("missing overlay for frame " + std::to_string(i) + " (" +
                                    overlay_manifest_path(*job.overlays_dir, i).string() + ")");
    }

    const PhospheneGrid grid = make_session_grid(job.grid);
    const unsigned workers = resolve_workers(job.workers);

    const fs::path staging = staging_dir_for(job.output_dir);
    fs::remove_all(staging);
    fs::create_directories(staging);

    std::vector<std::string> names;
    try {
        TemporalMedian filter(job.pipeline.median_window);
        const int batch = static_cast<int>(std::max(8u, workers * 4));
        std::vector<LumaFrame> rendered;
        std::vector<std::pair<int, LumaFrame>> ready;

        for (int first = 0; first < n; first += batch) {
            const int count = std::min(batch, n - first);
            rendered.assign(static_cast<std::size_t>(count), LumaFrame{});
            parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t k) {
                const int i = first + static_cast<int>(k);
                const LumaFrame source = read_luma(frames[i]);
                std::optional<SaliencyOverlay> overlay;
                if (needs_overlays) {
                    overlay = load_overlay(*job.overlays_dir, i, job.overlay);
                    if (overlay->width != source.width() || overlay->height != source.height())
                        throw PipelineError("overlay for frame " + std::to_string(i) +
                                            " does not match " + frames[i].filename().string());
                }
                rendered[k] = render_source_frame(source, overlay ? &*overlay : nullptr, grid,
                                                  job.pipeline);
            });

            ready.clear();
            for (auto& frame : rendered)
                if (auto m = filter.push(std::move(frame)))
                    ready.emplace_back(static_cast<int>(names.size() + ready.size()), std::move(*m));

            parallel_for(ready.size(), workers, [&](std::size_t k) {
                write_png(staging / output_frame_name(ready[k].first), ready[k].second);
            });
            for (const auto& [index, _] : ready)
                names.push_back(output_frame_name(index));
        }

        const json manifest = {
            {"fps", job.fps},
            {"frame_count", names.size()},
            {"source_frame_count", n},
            {"method", std::string(to_string(job.pipeline.method))},
            {"median_window", job.pipeline.median_window},
            {"seed", job.grid.seed},
            {"grid", grid_json(job.grid)},
            {"grid_config", to_text(job.grid)},
            {"frames", names},
        };
        write_file_atomic(staging / "sequence.json", manifest.dump(2) + "\n");
        promote_dir(staging, job.output_dir);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }

    VideoResult result;
    result.input_frames = n;
    result.output_frames = static_cast<int>(names.size());
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.throughput_fps = result.seconds > 0.0 ? n / result.seconds : 0.0;
    return result;
}

void run_render(const RenderJob& job)
{
    validate(job.grid);
    if (job.pipeline.fov)
        validate(*job.pipeline.fov);

    const LumaFrame source = read_luma(job.image);
    std::optional<SaliencyOverlay> overlay;
    if (job.pipeline.method != Method::Direct) {
        if (!job.overlay_manifest)
            throw PipelineError("method " + std::string(to_string(job.pipeline.method)) +
                                " requires an overlay manifest");
        overlay = load_overlay_manifest(*job.overlay_manifest, job.overlay);
        if (overlay->width != source.width() || overlay->height != source.height())
            throw FormatError("overlay size does not match " + job.image.string());
    }

    const PhospheneGrid grid = make_session_grid(job.grid);
    const LumaFrame composed = compose_frame(source, overlay ? &*overlay : nullptr, job.pipeline);
    const LumaFrame rendered = render_frame(composed, grid, job.pipeline.levels);

    if (!job.debug) {
        write_png(job.output, rendered);
        return;
    }
    const int h = rendered.height();
    cv::Mat strip;
    cv::hconcat(std::vector<cv::Mat>{scale_to_height(source, h, cv::INTER_AREA),
                                     scale_to_height(composed, h, cv::INTER_NEAREST),
                                     to_mat8(rendered)},
                strip);
    write_png(job.output, from_mat8(strip));
}

SequenceManifest load_sequence_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IngestionError("sequence manifest not found: " + path.string());
    try {
        const json doc = json::parse(in);
        SequenceManifest m;
        m.fps = doc.at("fps").get<double>();
        m.frame_count = doc.at("frame_count").get<int>();
        m.method = doc.value("method", "");
        m.frames = doc.at("frames").get<std::vector<std::string>>();
        if (static_cast<int>(m.frames.size()) != m.frame_count)
            throw FormatError("sequence manifest frame list does not match frame_count");
        return m;
    } catch (const json::exception& e) {
        throw IngestionError("malformed sequence manifest " + path.string() + ": " + e.what());
    }
}

} // namespace spv
