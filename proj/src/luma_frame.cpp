#include "spv/luma_frame.hpp"

#include "spv/error.hpp"

#include <string>

namespace spv {

LumaFrame::LumaFrame(int width, int height, float fill)
    : width_(width), height_(height)
{
    if (width < 0 || height < 0)
        throw DimensionError("negative frame dimensions");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

LumaFrame LumaFrame::from_values(int width, int height, std::vector<float> values)
{
    if (width < 0 || height < 0 ||
        values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw DimensionError("frame data length " + std::to_string(values.size()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
    for (float v : values) {
        if (!(v >= 0.0f && v <= 1.0f))
            throw FormatError("luminance value outside [0,1]");
    }
    LumaFrame frame;
    frame.width_ = width;
    frame.height_ = height;
    frame.data_ = std::move(values);
    return frame;
}

} // namespace spv
