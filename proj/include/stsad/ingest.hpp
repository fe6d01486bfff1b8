#pragma once

// Trip-record ingestion into the hour x day-of-week x ISO-week x zone count
// tensor, and event-list ingestion for detection-at-K.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stsad/evaluation.hpp"
#include "stsad/tensor.hpp"

namespace stsad {

inline constexpr std::size_t kHours = 24;
inline constexpr std::size_t kDays = 7;
inline constexpr std::size_t kWeeks = 52;

struct Timestamp {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
};

/// Position of a timestamp in the tensor calendar.
struct CalendarSlot {
    int iso_year = 0;
    int iso_week = 0;    // 1..53
    std::size_t weekday = 0; // 0 = Monday
    std::size_t hour = 0;
};

namespace calendar {

// Days since 1970-01-01 for a proleptic Gregorian date.
constexpr std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr int days_in_month(int y, int m) {
    constexpr int table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : table[m - 1];
}

// 0 = Monday.
constexpr std::size_t weekday(std::int64_t days) {
    return static_cast<std::size_t>(((days % 7) + 7 + 3) % 7);
}

constexpr int iso_weeks_in_year(int y) {
    // A year has 53 ISO weeks iff Jan 1 is a Thursday, or a Wednesday in a
    // leap year.
    const auto jan1 = weekday(days_from_civil(y, 1, 1));
    return (jan1 == 3 || (jan1 == 2 && is_leap(y))) ? 53 : 52;
}

constexpr CalendarSlot slot(const Timestamp &ts) {
    const std::int64_t days = days_from_civil(ts.year, ts.month, ts.day);
    const std::size_t wd = weekday(days);
    const auto ordinal = static_cast<int>(days - days_from_civil(ts.year, 1, 1)) + 1;
    int week = (ordinal - static_cast<int>(wd + 1) + 10) / 7;
    int year = ts.year;
    if (week < 1) {
        year -= 1;
        week = iso_weeks_in_year(year);
    } else if (week > iso_weeks_in_year(year)) {
        year += 1;
        week = 1;
    }
    return {year, week, wd, static_cast<std::size_t>(ts.hour)};
}

} // namespace calendar

/// Parses "YYYY-MM-DD HH:MM[:SS]" (a 'T' separator is also accepted).
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        if (pos + len > s.size())
            return std::nullopt;
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9')
                return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    while (!s.empty() && (s.front() == ' ' || s.front() == '"'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') ||
        s[13] != ':')
        return std::nullopt;
    Timestamp ts;
    auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2);
    if (!y || !mo || !d || !h || !mi)
        return std::nullopt;
    ts.year = *y;
    ts.month = *mo;
    ts.day = *d;
    ts.hour = *h;
    ts.minute = *mi;
    if (s.size() >= 19 && s[16] == ':') {
        auto sec = num(17, 2);
        if (!sec)
            return std::nullopt;
        ts.second = *sec;
    }
    if (ts.month < 1 || ts.month > 12 || ts.day < 1 ||
        ts.day > calendar::days_in_month(ts.year, ts.month) || ts.hour > 23 || ts.minute > 59 ||
        ts.second > 60)
        return std::nullopt;
    return ts;
}

/// Splits one CSV line on commas, honouring double quotes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"')
            quoted = !quoted;
        else if (ch == ',' && !quoted)
            fields.emplace_back();
        else if (ch != '\r')
            fields.back().push_back(ch);
    }
    for (auto &f : fields) {
        const auto first = f.find_first_not_of(' ');
        const auto last = f.find_last_not_of(' ');
        f = first == std::string::npos ? std::string{} : f.substr(first, last - first + 1);
    }
    return fields;
}

/// Reads zone ids, one per line; blank lines and '#' comments are skipped.
inline std::vector<std::string> read_zone_list(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open zone list '" + path.string() + "'");
    std::vector<std::string> zones;
    std::string line;
    while (std::getline(in, line)) {
        auto fields = split_csv_line(line);
        if (fields[0].empty() || fields[0][0] == '#')
            continue;
        if (std::find(zones.begin(), zones.end(), fields[0]) != zones.end())
            throw std::invalid_argument("zone list '" + path.string() + "': duplicate zone '" +
                                        fields[0] + "'");
        zones.push_back(fields[0]);
    }
    if (zones.empty())
        throw std::invalid_argument("zone list '" + path.string() + "' is empty");
    return zones;
}

struct IngestOptions {
    std::vector<std::string> zones;
    int year = 2018;
    std::string timestamp_column = "tpep_dropoff_datetime";
    std::string zone_column = "DOLocationID";
};

struct IngestSummary {
    std::size_t rows_read = 0;
    std::size_t rows_counted = 0;
    std::size_t dropped_zone = 0;
    std::size_t dropped_week = 0; // ISO week 53 or another ISO year
};

struct IngestResult {
    DenseTensor counts; // 24 x 7 x 52 x zones
    SupportMask observed;
    IngestSummary summary;
};

/// Counts arrivals per (hour, weekday, ISO week, zone).
inline IngestResult ingest_trips(const std::vector<std::filesystem::path> &csv_paths,
                                 const IngestOptions &opts) {
    if (opts.zones.empty())
        throw std::invalid_argument("ingest: zone list is empty");
    std::unordered_map<std::string, std::size_t> zone_index;
    for (std::size_t z = 0; z < opts.zones.size(); ++z)
        zone_index.emplace(opts.zones[z], z);

    IngestResult result{DenseTensor({kHours, kDays, kWeeks, opts.zones.size()}),
                        SupportMask({kHours, kDays, kWeeks, opts.zones.size()}, true),
                        {}};
    for (const auto &path : csv_paths) {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open trip file '" + path.string() + "'");
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error(path.string() + ": empty file, expected a header line");
        const auto header = split_csv_line(line);
        auto column = [&](const std::string &name) {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end())
                throw std::runtime_error(path.string() + ": line 1: header has no column '" +
                                         name + "'");
            return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t ts_col = column(opts.timestamp_column);
        const std::size_t zone_col = column(opts.zone_column);
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r")
                continue;
            const auto fields = split_csv_line(line);
            if (fields.size() <= std::max(ts_col, zone_col))
                throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                                         ": expected at least " +
                                         std::to_string(std::max(ts_col, zone_col) + 1) +
                                         " fields");
            const auto ts = parse_timestamp(fields[ts_col]);
            if (!ts)
                throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                                         ": unparseable timestamp '" + fields[ts_col] + "'");
            ++result.summary.rows_read;
            const auto zone = zone_index.find(fields[zone_col]);
            if (zone == zone_index.end()) {
                ++result.summary.dropped_zone;
                continue;
            }
            const CalendarSlot slot = calendar::slot(*ts);
            if (slot.iso_year != opts.year || slot.iso_week > static_cast<int>(kWeeks)) {
                ++result.summary.dropped_week;
                continue;
            }
            result.counts.at({slot.hour, slot.weekday, static_cast<std::size_t>(slot.iso_week - 1),
                              zone->second}) += 1.0;
            ++result.summary.rows_counted;
        }
    }
    if (result.summary.rows_counted == 0)
        throw std::runtime_error("ingest: no records fell inside the configured zones and year");
    return result;
}

/// Reads `zone,start_datetime,end_datetime` rows. Each event covers every
/// hour slot from the start hour up to (excluding) the end time; an event
/// with end == start covers the start hour.
inline EventList load_events(const std::filesystem::path &path,
                             const std::vector<std::string> &zones, int year) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open event list '" + path.string() + "'");
    const Dims dims{kHours, kDays, kWeeks, zones.size()};
    DenseTensor shape(dims);
    EventList events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_csv_line(line);
        if (fields[0].empty() || fields[0][0] == '#')
            continue;
        if (line_no == 1 && fields[0] == "zone")
            continue;
        auto fail = [&](const std::string &why) {
            return std::invalid_argument(path.string() + ": line " + std::to_string(line_no) +
                                         ": " + why);
        };
        if (fields.size() < 3)
            throw fail("expected zone,start_datetime,end_datetime");
        const auto zit = std::find(zones.begin(), zones.end(), fields[0]);
        if (zit == zones.end())
            throw fail("zone '" + fields[0] + "' is not in the zone list");
        const auto start = parse_timestamp(fields[1]);
        const auto end = parse_timestamp(fields[2]);
        if (!start || !end)
            throw fail("unparseable datetime");
        const std::int64_t start_h =
            calendar::days_from_civil(start->year, start->month, start->day) * 24 + start->hour;
        const std::int64_t end_min =
            (calendar::days_from_civil(end->year, end->month, end->day) * 24 + end->hour) * 60 +
            end->minute;
        Event ev;
        ev.name = fields[0] + " " + fields[1];
        for (std::int64_t h = start_h; h == start_h || h * 60 < end_min; ++h) {
            const std::int64_t day = h >= 0 ? h / 24 : (h - 23) / 24;
            // Civil date from days since epoch.
            std::int64_t z = day + 719468;
            const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
            const auto doe = static_cast<unsigned>(z - era * 146097);
            const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
            const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
            const unsigned mp = (5 * doy + 2) / 153;
            Timestamp ts;
            ts.day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
            ts.month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
            ts.year = static_cast<int>(yoe + era * 400 + (ts.month <= 2));
            ts.hour = static_cast<int>(h - day * 24);
            const CalendarSlot slot = calendar::slot(ts);
            if (slot.iso_year != year || slot.iso_week > static_cast<int>(kWeeks))
                continue;
            const std::size_t idx[] = {slot.hour, slot.weekday,
                                       static_cast<std::size_t>(slot.iso_week - 1),
                                       static_cast<std::size_t>(zit - zones.begin())};
            ev.indices.push_back(shape.flat_index(idx));
        }
        if (ev.indices.empty())
            throw fail("event falls entirely outside the tensor calendar");
        events.push_back(std::move(ev));
    }
    if (events.empty())
        throw std::invalid_argument("event list '" + path.string() + "' is empty");
    return events;
}

} // namespace stsad
