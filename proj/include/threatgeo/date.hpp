#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace threatgeo {

/// Calendar day in UTC. All event timestamps are truncated to this resolution.
using Date = std::chrono::sys_days;

struct DateRange {
	Date from;
	Date to; // inclusive

	bool contains(Date d) const noexcept {
		return from <= d && d <= to;
	}
	bool operator==(const DateRange &) const = default;
};

Date make_date(int year, unsigned month, unsigned day);

/// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ..."),
/// which is discarded.
std::optional<Date> try_parse_date(std::string_view text);
Date parse_date(std::string_view text);

std::string format_date(Date d);

Date today_utc();

int year_of(Date d);

/// Monday on or before `d`.
Date week_start(Date d);
Date month_start(Date d);

} // namespace threatgeo
