#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(AUCTIONFDA_FIXTURES) / name;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("auctionfda_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct Draws {
    std::mt19937_64 engine;
    explicit Draws(std::uint64_t seed) : engine(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
    double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(engine); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
};

}  // namespace testing_support
