#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace auctionfda {

/// Currency amount held exactly in minor units (cents).
class Money {
public:
    static constexpr std::int64_t kMinorPerMajor = 100;

    constexpr Money() = default;

    static constexpr Money from_minor(std::int64_t minor) { return Money(minor); }

    /// Parses a plain decimal such as "7794", "-5" or "46225.50". At most two
    /// fractional digits are accepted. Throws std::invalid_argument.
    static Money parse(std::string_view text);

    /// Rounds a major-unit value to the nearest minor unit.
    static Money from_major(double major);

    constexpr std::int64_t minor() const { return minor_; }
    double major() const { return static_cast<double>(minor_) / kMinorPerMajor; }
    bool positive() const { return minor_ > 0; }

    /// Canonical text: integer major units when there are no cents, else two decimals.
    std::string to_string() const;

    constexpr auto operator<=>(const Money&) const = default;

private:
    constexpr explicit Money(std::int64_t minor) : minor_(minor) {}

    std::int64_t minor_ = 0;
};

}  // namespace auctionfda
