#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ctikit {

/// UTC instant at second precision.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t epoch_seconds) : seconds_(epoch_seconds) {}

    static Timestamp from_civil(int year, unsigned month, unsigned day, int hour = 0,
                                int minute = 0, int second = 0);

    constexpr std::int64_t epoch_seconds() const { return seconds_; }

    /// Days since 1970-01-01 (floor), i.e. the UTC calendar date.
    std::int64_t epoch_day() const;

    /// "YYYY-MM-DDTHH:MM:SSZ"
    std::string iso8601() const;
    /// "YYYY-MM-DD"
    std::string date_string() const;
    /// "YYYY-MM"
    std::string month_string() const;

    auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t seconds_ = 0;
};

/// Accepts ISO-8601 ("2021-01-05T10:00:00Z", fractional seconds truncated,
/// "+hh:mm" offsets, space instead of 'T', trailing " UTC"), bare dates
/// ("2021-01-05"), and the legacy Twitter form ("Tue Jan 05 10:00:00 +0000 2021").
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Throws ctikit::Error(Parse) on failure.
Timestamp parse_timestamp_or_throw(std::string_view text);

}  // namespace ctikit
