#include "spv/grid_config.hpp"

#include "spv/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace spv {
namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("bad value for '" + key + "': " + value);
    return out;
}

std::string format_double(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string to_text(const GridConfig& config)
{
    std::ostringstream os;
    os << "rows = " << config.rows << '\n'
       << "cols = " << config.cols << '\n';
    if (config.canvas_width == config.canvas_height)
        os << "canvas = " << config.canvas_width << '\n';
    else
        os << "canvas = " << config.canvas_width << 'x' << config.canvas_height << '\n';
    os << "levels = " << config.levels << '\n'
       << "sigma_ratio = " << format_double(config.sigma_ratio) << '\n'
       << "cutoff_ratio = " << format_double(config.cutoff_ratio) << '\n'
       << "dropout_rate = " << format_double(config.dropout_rate) << '\n'
       << "seed = " << config.seed << '\n';
    return os.str();
}

GridConfig parse_grid_config(const std::string& text, GridConfig base)
{
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));

        if (key == "rows")
            base.rows = parse_number<int>(key, value);
        else if (key == "cols")
            base.cols = parse_number<int>(key, value);
        else if (key == "canvas") {
            if (const auto x = value.find('x'); x != std::string::npos) {
                base.canvas_width = parse_number<int>(key, value.substr(0, x));
                base.canvas_height = parse_number<int>(key, value.substr(x + 1));
            } else {
                base.canvas_width = base.canvas_height = parse_number<int>(key, value);
            }
        } else if (key == "levels")
            base.levels = parse_number<int>(key, value);
        else if (key == "sigma_ratio")
            base.sigma_ratio = parse_number<double>(key, value);
        else if (key == "cutoff_ratio")
            base.cutoff_ratio = parse_number<double>(key, value);
        else if (key == "dropout_rate")
            base.dropout_rate = parse_number<double>(key, value);
        else if (key == "seed")
            base.seed = parse_number<std::uint64_t>(key, value);
        else
            throw ConfigError("unknown grid config key '" + key + "'");
    }
    return base;
}

GridConfig load_grid_config(const std::filesystem::path& path, GridConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read grid config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_grid_config(buf.str(), base);
}

void validate(const GridConfig& config)
{
    if (config.rows <= 0 || config.cols <= 0)
        throw ConfigError("grid rows and cols must be positive");
    if (config.canvas_width <= 0 || config.canvas_height <= 0)
        throw ConfigError("canvas dimensions must be positive");
    if (config.levels < 2 || config.levels > 256)
        throw ConfigError("levels must lie in [2, 256]");
    if (!(config.dropout_rate >= 0.0 && config.dropout_rate <= 1.0))
        throw ConfigError("dropout rate must lie in [0, 1]");
    if (!(config.sigma_ratio > 0.0) || !(config.cutoff_ratio > 0.0))
        throw ConfigError("sigma_ratio and cutoff_ratio must be positive");
    try {
        (void)build_grid(config.rows, config.cols, config.canvas_width, config.canvas_height,
                         config.sigma_ratio, config.cutoff_ratio);
    } catch (const GeometryError& e) {
        throw ConfigError(e.what());
    }
}

PhospheneGrid make_session_grid(const GridConfig& config)
{
    auto grid = build_grid(config.rows, config.cols, config.canvas_width, config.canvas_height,
                           config.sigma_ratio, config.cutoff_ratio);
    return apply_dropout(grid, config.dropout_rate, config.seed);
}

} // namespace spv
