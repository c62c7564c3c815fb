#pragma once

#include "spv/luma_frame.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace spv::testing {

inline LumaFrame random_frame(int w, int h, std::mt19937& gen)
{
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    LumaFrame f(w, h);
    for (auto& v : f.pixels())
        v = u(gen);
    return f;
}

inline LumaFrame random_mask(int w, int h, double density, std::mt19937& gen)
{
    std::bernoulli_distribution b(density);
    LumaFrame f(w, h);
    for (auto& v : f.pixels())
        v = b(gen) ? 1.0f : 0.0f;
    return f;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("spv_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace spv::testing
