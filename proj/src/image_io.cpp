#include "spv/image_io.hpp"

#include "spv/error.hpp"

#include <opencv2/imgcodecs.hpp>

#include <atomic>
#include <fstream>
#include <string>
#include <unistd.h>

namespace spv {
namespace {

cv::Mat load_gray(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        throw IngestionError("image not found: " + path.string());
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (img.empty())
        throw IngestionError("cannot decode image: " + path.string());
    return img;
}

std::filesystem::path temp_sibling(const std::filesystem::path& path)
{
    static std::atomic<unsigned> counter{0};
    auto name = "." + path.filename().string() + ".tmp" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++);
    return path.parent_path() / name;
}

} // namespace

LumaFrame read_luma(const std::filesystem::path& path)
{
    const cv::Mat img = load_gray(path);
    LumaFrame frame(img.cols, img.rows);
    constexpr float scale = 1.0f / 255.0f;
    for (int y = 0; y < img.rows; ++y) {
        const auto* src = img.ptr<std::uint8_t>(y);
        auto dst = frame.row(y);
        for (int x = 0; x < img.cols; ++x)
            dst[x] = static_cast<float>(src[x]) * scale;
    }
    return frame;
}

LumaFrame read_mask(const std::filesystem::path& path)
{
    const cv::Mat img = load_gray(path);
    LumaFrame frame(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y) {
        const auto* src = img.ptr<std::uint8_t>(y);
        auto dst = frame.row(y);
        for (int x = 0; x < img.cols; ++x)
            dst[x] = src[x] >= 128 ? 1.0f : 0.0f;
    }
    return frame;
}

std::vector<std::uint8_t> encode_png(const LumaFrame& frame)
{
    cv::Mat img(frame.height(), frame.width(), CV_8UC1);
    for (int y = 0; y < frame.height(); ++y) {
        auto src = frame.row(y);
        auto* dst = img.ptr<std::uint8_t>(y);
        for (int x = 0; x < frame.width(); ++x)
            dst[x] = static_cast<std::uint8_t>(src[x] * 255.0f + 0.5f);
    }
    std::vector<std::uint8_t> out;
    // Level 1 keeps the 20 fps budget on a single core; the files are mostly black.
    if (!cv::imencode(".png", img, out, {cv::IMWRITE_PNG_COMPRESSION, 1}))
        throw FormatError("PNG encoding failed");
    return out;
}

void write_png(const std::filesystem::path& path, const LumaFrame& frame)
{
    const auto bytes = encode_png(frame);
    write_file_atomic(path, bytes);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    const auto tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IngestionError("cannot open for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IngestionError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text)
{
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace spv
