#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spv {

/// Single-channel image with luminance in [0,1], stored row-major.
///
/// Construction clamps nothing: callers that build frames from raw values go
/// through `from_values`, which rejects out-of-range data.
class LumaFrame {
public:
    LumaFrame() = default;
    LumaFrame(int width, int height, float fill = 0.0f);

    /// Throws DimensionError on size mismatch and FormatError on values
    /// outside [0,1] (NaN included).
    static LumaFrame from_values(int width, int height, std::vector<float> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float at(int x, int y) const { return data_[index(x, y)]; }
    float& at(int x, int y) { return data_[index(x, y)]; }

    std::span<const float> row(int y) const
    {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<float> row(int y)
    {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    std::span<const float> pixels() const noexcept { return data_; }
    std::span<float> pixels() noexcept { return data_; }

    bool same_shape(const LumaFrame& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const LumaFrame&, const LumaFrame&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

} // namespace spv
