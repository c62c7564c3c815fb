#pragma once

#include "spv/luma_frame.hpp"

#include <cstdint>
#include <vector>

namespace spv {

/// Output-pixel coordinates of a phosphene center. Centers are snapped to
/// whole pixels so the brightest sample of every dot lands on a pixel.
struct Point2d {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2d&, const Point2d&) = default;
};

/// Geometry defaults for the rendered dots. Sigma and cutoff are expressed
/// as divisors of the horizontal pitch.
inline constexpr double kDefaultSigmaRatio = 6.4;
inline constexpr double kDefaultCutoffRatio = 2.0;
inline constexpr double kMinPitch = 4.0;

/// Hexagonal phosphene layout on an output canvas, plus which electrodes
/// still respond. Immutable once built; dropout returns a new grid.
class PhospheneGrid {
public:
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int canvas_width() const noexcept { return canvas_width_; }
    int canvas_height() const noexcept { return canvas_height_; }
    double pitch_x() const noexcept { return pitch_x_; }
    double pitch_y() const noexcept { return pitch_y_; }
    double dot_sigma() const noexcept { return dot_sigma_; }
    double dot_cutoff_radius() const noexcept { return dot_cutoff_radius_; }

    std::size_t size() const noexcept { return centers_.size(); }
    const std::vector<Point2d>& centers() const noexcept { return centers_; }
    const Point2d& center(int row, int col) const { return centers_[index(row, col)]; }

    /// One byte per phosphene (1 = alive), row-major.
    const std::vector<std::uint8_t>& alive() const noexcept { return alive_; }
    bool is_alive(int row, int col) const { return alive_[index(row, col)] != 0; }
    std::size_t alive_count() const noexcept;

    std::size_t index(int row, int col) const noexcept
    {
        return static_cast<std::size_t>(row) * cols_ + col;
    }

    friend bool operator==(const PhospheneGrid&, const PhospheneGrid&) = default;

private:
    friend PhospheneGrid build_grid(int, int, int, int, double, double);
    friend PhospheneGrid apply_dropout(const PhospheneGrid&, double, std::uint64_t);

    int rows_ = 0;
    int cols_ = 0;
    int canvas_width_ = 0;
    int canvas_height_ = 0;
    double pitch_x_ = 0.0;
    double pitch_y_ = 0.0;
    double dot_sigma_ = 0.0;
    double dot_cutoff_radius_ = 0.0;
    std::vector<Point2d> centers_;
    std::vector<std::uint8_t> alive_;
};

/// Quantized electrode levels, row-major, each in [0, level_count - 1].
struct ElectrodeActivation {
    int rows = 0;
    int cols = 0;
    int level_count = 0;
    std::vector<std::uint8_t> levels;

    /// Display luminance of level k: k / (level_count - 1).
    float amplitude(std::size_t cell) const
    {
        return static_cast<float>(static_cast<double>(levels[cell]) / (level_count - 1));
    }

    friend bool operator==(const ElectrodeActivation&, const ElectrodeActivation&) = default;
};

/// Box-average the frame onto a rows x cols lattice. Cell (r, c) averages
/// source columns [c*W/cols, (c+1)*W/cols) and the matching rows.
/// Throws DimensionError when the frame is smaller than the lattice.
LumaFrame downsample(const LumaFrame& frame, int rows, int cols);

/// Level = round(v * (L - 1)), halves rounded up. Throws PreconditionError
/// when L is outside [2, 256].
ElectrodeActivation quantize(const LumaFrame& frame, int level_count);

/// Inverse of quantize: a rows x cols frame of reconstruction values.
LumaFrame reconstruct(const ElectrodeActivation& activation);

/// Hexagonal layout: pitch_x = W / cols, vertical pitch = pitch_x * sqrt(3)/2,
/// odd rows shifted pitch_x/2 right of even rows, lattice centered on the
/// canvas. Throws GeometryError if the pitch drops below four pixels, the rows
/// do not fit vertically, or the cutoff is shorter than 2 sigma.
PhospheneGrid build_grid(int rows, int cols, int output_width, int output_height,
                         double sigma_ratio = kDefaultSigmaRatio,
                         double cutoff_ratio = kDefaultCutoffRatio);

/// Turns off exactly round(rate * N) currently alive phosphenes, chosen
/// uniformly without replacement from a generator seeded with `seed`.
PhospheneGrid apply_dropout(const PhospheneGrid& grid, double rate, std::uint64_t seed);

/// Gaussian dot rendering. Each alive phosphene paints
/// A * exp(-d^2 / (2 sigma^2)) within its cutoff radius; overlaps take the max.
LumaFrame render(const ElectrodeActivation& activation, const PhospheneGrid& grid);

/// downsample -> quantize -> render for a frame already in [0,1].
LumaFrame render_frame(const LumaFrame& frame, const PhospheneGrid& grid, int level_count);

} // namespace spv
