#include "ctikit/time.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>

#include "ctikit/error.hpp"

namespace ctikit {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::chrono::year_month_day civil_from_epoch_day(std::int64_t day) {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{day}}};
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    void skip() { ++pos_; }
    std::string_view rest() const { return s_.substr(pos_); }

    bool expect(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    std::optional<int> digits(std::size_t count) {
        if (pos_ + count > s_.size()) return std::nullopt;
        int value = 0;
        for (std::size_t i = 0; i < count; ++i) {
            char c = s_[pos_ + i];
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            value = value * 10 + (c - '0');
        }
        pos_ += count;
        return value;
    }

    std::optional<std::int64_t> integer() {
        std::size_t start = pos_;
        bool negative = false;
        if (peek() == '-') {
            negative = true;
            ++pos_;
        }
        std::int64_t v = 0;
        std::size_t ndig = 0;
        while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (peek() - '0');
            ++pos_;
            ++ndig;
        }
        if (ndig == 0) {
            pos_ = start;
            return std::nullopt;
        }
        return negative ? -v : v;
    }

    std::string_view word() {
        std::size_t start = pos_;
        while (!done() && std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
        return s_.substr(start, pos_ - start);
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

bool valid_civil(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) return false;
    auto ymd = std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} /
               std::chrono::day{static_cast<unsigned>(day)};
    return ymd.ok();
}

std::optional<Timestamp> parse_iso(std::string_view text) {
    Cursor c(text);
    auto year = c.digits(4);
    if (!year || !c.expect('-')) return std::nullopt;
    auto month = c.digits(2);
    if (!month || !c.expect('-')) return std::nullopt;
    auto day = c.digits(2);
    if (!day || !valid_civil(*year, *month, *day)) return std::nullopt;
    if (c.done()) return Timestamp::from_civil(*year, *month, *day);

    if (!(c.expect('T') || c.expect(' '))) return std::nullopt;
    auto hour = c.digits(2);
    if (!hour || !c.expect(':')) return std::nullopt;
    auto minute = c.digits(2);
    if (!minute) return std::nullopt;
    int second = 0;
    if (c.expect(':')) {
        auto s = c.digits(2);
        if (!s) return std::nullopt;
        second = *s;
        if (c.expect('.')) {
            // sub-second precision is truncated
            std::size_t n = 0;
            while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
                c.skip();
                ++n;
            }
            if (n == 0) return std::nullopt;
        }
    }
    if (*hour > 23 || *minute > 59 || second > 60) return std::nullopt;

    std::int64_t offset = 0;
    if (c.expect('Z')) {
    } else if (c.peek() == '+' || c.peek() == '-') {
        int sign = c.peek() == '-' ? -1 : 1;
        c.skip();
        auto oh = c.digits(2);
        if (!oh) return std::nullopt;
        c.expect(':');
        auto om = c.digits(2);
        if (!om) return std::nullopt;
        offset = sign * (*oh * 3600 + *om * 60);
    } else if (c.rest() == " UTC" || c.rest() == " utc") {
        return Timestamp(
            Timestamp::from_civil(*year, *month, *day, *hour, *minute, second).epoch_seconds());
    }
    if (!c.done()) return std::nullopt;
    auto base = Timestamp::from_civil(*year, *month, *day, *hour, *minute, second);
    return Timestamp(base.epoch_seconds() - offset);
}

// "Tue Jan 05 10:00:00 +0000 2021"
std::optional<Timestamp> parse_legacy_twitter(std::string_view text) {
    static constexpr std::array<std::string_view, 12> kMonths = {
        "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    Cursor c(text);
    if (c.word().size() != 3 || !c.expect(' ')) return std::nullopt;
    auto mon = c.word();
    int month = 0;
    for (std::size_t i = 0; i < kMonths.size(); ++i)
        if (kMonths[i] == mon) month = static_cast<int>(i) + 1;
    if (month == 0 || !c.expect(' ')) return std::nullopt;
    auto day = c.digits(2);
    if (!day || !c.expect(' ')) return std::nullopt;
    auto hour = c.digits(2);
    if (!hour || !c.expect(':')) return std::nullopt;
    auto minute = c.digits(2);
    if (!minute || !c.expect(':')) return std::nullopt;
    auto second = c.digits(2);
    if (!second || !c.expect(' ')) return std::nullopt;
    int sign = c.peek() == '-' ? -1 : 1;
    if (!(c.expect('+') || c.expect('-'))) return std::nullopt;
    auto oh = c.digits(2);
    auto om = c.digits(2);
    if (!oh || !om || !c.expect(' ')) return std::nullopt;
    auto year = c.digits(4);
    if (!year || !c.done() || !valid_civil(*year, month, *day)) return std::nullopt;
    auto base = Timestamp::from_civil(*year, month, *day, *hour, *minute, *second);
    return Timestamp(base.epoch_seconds() - sign * (*oh * 3600 + *om * 60));
}

}  // namespace

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day, int hour, int minute,
                                int second) {
    auto ymd = std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
    std::int64_t days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return Timestamp(days * kSecondsPerDay + hour * 3600 + minute * 60 + second);
}

std::int64_t Timestamp::epoch_day() const { return floor_div(seconds_, kSecondsPerDay); }

std::string Timestamp::iso8601() const {
    auto ymd = civil_from_epoch_day(epoch_day());
    std::int64_t sod = seconds_ - epoch_day() * kSecondsPerDay;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

std::string Timestamp::date_string() const { return iso8601().substr(0, 10); }

std::string Timestamp::month_string() const { return iso8601().substr(0, 7); }

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (std::isdigit(static_cast<unsigned char>(text.front()))) return parse_iso(text);
    return parse_legacy_twitter(text);
}

Timestamp parse_timestamp_or_throw(std::string_view text) {
    auto ts = parse_timestamp(text);
    if (!ts) throw Error(ErrorCode::Parse, "unparseable timestamp '" + std::string(text) + "'");
    return *ts;
}

}  // namespace ctikit
