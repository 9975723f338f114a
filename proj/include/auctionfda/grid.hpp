#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace auctionfda {

/// n equally spaced points on [0, 1], both endpoints included.
class Grid {
public:
    static constexpr std::size_t kDefaultSize = 100;

    /// Throws ValidationError when n < 2.
    explicit Grid(std::size_t n = kDefaultSize);

    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    std::span<const double> points() const noexcept { return points_; }

    bool operator==(const Grid& other) const = default;

private:
    std::vector<double> points_;
};

}  // namespace auctionfda
