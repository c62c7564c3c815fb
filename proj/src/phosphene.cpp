#include "spv/phosphene.hpp"

#include "spv/error.hpp"
#include "spv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace spv {

std::size_t PhospheneGrid::alive_count() const noexcept
{
    return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), std::uint8_t{1}));
}

LumaFrame downsample(const LumaFrame& frame, int rows, int cols)
{
    if (rows <= 0 || cols <= 0)
        throw DimensionError("downsample target must be positive");
    if (frame.width() < cols || frame.height() < rows)
        throw DimensionError("frame " + std::to_string(frame.width()) + "x" +
                             std::to_string(frame.height()) + " is smaller than the " +
                             std::to_string(cols) + "x" + std::to_string(rows) + " lattice");

    const long long w = frame.width();
    const long long h = frame.height();

    // Column sums per output column, accumulated row by row, so each source
    // pixel is touched once.
    std::vector<int> col_of(static_cast<std::size_t>(w));
    for (int c = 0; c < cols; ++c) {
        const auto x0 = static_cast<int>(c * w / cols);
        const auto x1 = static_cast<int>((c + 1) * w / cols);
        for (int x = x0; x < x1; ++x)
            col_of[x] = c;
    }

    LumaFrame out(cols, rows);
    std::vector<double> acc(static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
        const auto y0 = static_cast<int>(r * h / rows);
        const auto y1 = static_cast<int>((r + 1) * h / rows);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int y = y0; y < y1; ++y) {
            auto src = frame.row(y);
            for (int x = 0; x < frame.width(); ++x)
                acc[col_of[x]] += src[x];
        }
        auto dst = out.row(r);
        for (int c = 0; c < cols; ++c) {
            const long long box_w = (c + 1) * w / cols - c * w / cols;
            const double mean = acc[c] / static_cast<double>(box_w * (y1 - y0));
            dst[c] = static_cast<float>(std::clamp(mean, 0.0, 1.0));
        }
    }
    return out;
}

ElectrodeActivation quantize(const LumaFrame& frame, int level_count)
{
    if (level_count < 2 || level_count > 256)
        throw PreconditionError("level count must lie in [2, 256], got " +
                                std::to_string(level_count));
    ElectrodeActivation act;
    act.rows = frame.height();
    act.cols = frame.width();
    act.level_count = level_count;
    act.levels.reserve(frame.size());
    const double top = level_count - 1;
    for (float v : frame.pixels()) {
        const double scaled = std::floor(static_cast<double>(v) * top + 0.5);
        act.levels.push_back(static_cast<std::uint8_t>(std::clamp(scaled, 0.0, top)));
    }
    return act;
}

LumaFrame reconstruct(const ElectrodeActivation& activation)
{
    LumaFrame out(activation.cols, activation.rows);
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = activation.amplitude(i);
    return out;
}

PhospheneGrid build_grid(int rows, int cols, int output_width, int output_height,
                         double sigma_ratio, double cutoff_ratio)
{
    if (rows <= 0 || cols <= 0)
        throw GeometryError("grid must have at least one row and column");
    if (!(sigma_ratio > 0.0) || !(cutoff_ratio > 0.0))
        throw GeometryError("sigma and cutoff ratios must be positive");

    const double pitch_x = static_cast<double>(output_width) / cols;
    if (pitch_x < kMinPitch)
        throw GeometryError("canvas width " + std::to_string(output_width) + " gives pitch " +
                            std::to_string(pitch_x) + " px for " + std::to_string(cols) +
                            " columns; need at least 4");
    const double pitch_y = pitch_x * std::sqrt(3.0) / 2.0;
    if (rows * pitch_y > output_height + 1e-9)
        throw GeometryError(std::to_string(rows) + " hexagonal rows need " +
                            std::to_string(rows * pitch_y) + " px of canvas height, have " +
                            std::to_string(output_height));

    PhospheneGrid grid;
    grid.rows_ = rows;
    grid.cols_ = cols;
    grid.canvas_width_ = output_width;
    grid.canvas_height_ = output_height;
    grid.pitch_x_ = pitch_x;
    grid.pitch_y_ = pitch_y;
    grid.dot_sigma_ = pitch_x / sigma_ratio;
    grid.dot_cutoff_radius_ = pitch_x / cutoff_ratio;
    if (grid.dot_cutoff_radius_ < 2.0 * grid.dot_sigma_)
        throw GeometryError("dot cutoff radius must be at least twice sigma");

    const double mid_x = output_width / 2.0;
    const double mid_y = output_height / 2.0;
    // Even rows sit a quarter pitch left of the centered lattice, odd rows a
    // quarter pitch right; a single row has no stagger.
    const double stagger = rows > 1 ? pitch_x / 4.0 : 0.0;

    grid.centers_.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        const double y = mid_y + (r - (rows - 1) / 2.0) * pitch_y;
        const double shift = (r % 2 == 1) ? stagger : -stagger;
        for (int c = 0; c < cols; ++c) {
            const double x = mid_x + (c - (cols - 1) / 2.0) * pitch_x + shift;
            grid.centers_.push_back({
                std::clamp(std::round(x), 0.0, static_cast<double>(output_width - 1)),
                std::clamp(std::round(y), 0.0, static_cast<double>(output_height - 1)),
            });
        }
    }
    grid.alive_.assign(grid.centers_.size(), 1);
    return grid;
}

PhospheneGrid apply_dropout(const PhospheneGrid& grid, double rate, std::uint64_t seed)
{
    if (!(rate >= 0.0 && rate <= 1.0))
        throw PreconditionError("dropout rate must lie in [0, 1]");

    PhospheneGrid out = grid;
    const auto n = grid.size();
    auto to_kill = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5));

    std::vector<std::size_t> candidates;
    candidates.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (grid.alive_[i])
            candidates.push_back(i);
    to_kill = std::min(to_kill, candidates.size());

    // Partial Fisher-Yates: the first to_kill slots become a uniform sample.
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i < to_kill; ++i) {
        const auto j = i + static_cast<std::size_t>(draw_below(gen, candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
        out.alive_[candidates[i]] = 0;
    }
    return out;
}

LumaFrame render(const ElectrodeActivation& activation, const PhospheneGrid& grid)
{
    if (activation.rows != grid.rows() || activation.cols != grid.cols())
        throw GeometryError("activation " + std::to_string(activation.cols) + "x" +
                            std::to_string(activation.rows) + " does not match grid " +
                            std::to_string(grid.cols()) + "x" + std::to_string(grid.rows()));

    const int width = grid.canvas_width();
    const int height = grid.canvas_height();
    LumaFrame out(width, height);

    // Centers are whole pixels, so one unit-amplitude kernel serves every dot.
    const double radius = grid.dot_cutoff_radius();
    const double r2 = radius * radius;
    const double two_sigma2 = 2.0 * grid.dot_sigma() * grid.dot_sigma();
    const int reach = static_cast<int>(std::floor(radius));
    const int side = 2 * reach + 1;
    std::vector<float> kernel(static_cast<std::size_t>(side) * side, -1.0f);
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            const double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
            if (d2 <= r2)
                kernel[static_cast<std::size_t>(dy + reach) * side + dx + reach] =
                    static_cast<float>(std::exp(-d2 / two_sigma2));
        }
    }

    const auto& centers = grid.centers();
    const auto& alive = grid.alive();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (!alive[i] || activation.levels[i] == 0)
            continue;
        const double amp = static_cast<double>(activation.levels[i]) / (activation.level_count - 1);
        const int cx = static_cast<int>(centers[i].x);
        const int cy = static_cast<int>(centers[i].y);
        const int y0 = std::max(cy - reach, 0);
        const int y1 = std::min(cy + reach, height - 1);
        const int x0 = std::max(cx - reach, 0);
        const int x1 = std::min(cx + reach, width - 1);
        for (int y = y0; y <= y1; ++y) {
            const float* krow = kernel.data() + static_cast<std::size_t>(y - cy + reach) * side;
            auto dst = out.row(y);
            for (int x = x0; x <= x1; ++x) {
                const float k = krow[x - cx + reach];
                if (k < 0.0f)
                    continue;
                const auto v = static_cast<float>(amp * k);
                if (v > dst[x])
                    dst[x] = v;
            }
        }
    }
    return out;
}

LumaFrame render_frame(const LumaFrame& frame, const PhospheneGrid& grid, int level_count)
{
    return render(quantize(downsample(frame, grid.rows(), grid.cols()), level_count), grid);
}

} // namespace spv
