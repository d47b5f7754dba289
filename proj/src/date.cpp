#include "threatgeo/date.hpp"

#include "threatgeo/error.hpp"

#include <cctype>
#include <cstdio>

namespace threatgeo {

namespace chr = std::chrono;

Date make_date(int year, unsigned month, unsigned day) {
	chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
	if (!ymd.ok()) {
		throw std::invalid_argument("invalid calendar date");
	}
	return Date{ymd};
}

std::optional<Date> try_parse_date(std::string_view text) {
	if (text.size() < 10) {
		return std::nullopt;
	}
	auto digits = [&](std::size_t pos, std::size_t len, int &out) {
		out = 0;
		for (std::size_t i = pos; i < pos + len; ++i) {
			if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
				return false;
			}
			out = out * 10 + (text[i] - '0');
		}
		return true;
	};
	int y = 0, m = 0, d = 0;
	if (!digits(0, 4, y) || text[4] != '-' || !digits(5, 2, m) || text[7] != '-' || !digits(8, 2, d)) {
		return std::nullopt;
	}
	if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') {
		return std::nullopt;
	}
	chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}};
	if (!ymd.ok()) {
		return std::nullopt;
	}
	return Date{ymd};
}

Date parse_date(std::string_view text) {
	auto d = try_parse_date(text);
	if (!d) {
		throw ParseError("date", "not an ISO-8601 date: '" + std::string(text) + "'");
	}
	return *d;
}

std::string format_date(Date d) {
	chr::year_month_day ymd{d};
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
	              static_cast<unsigned>(ymd.day()));
	return buf;
}

Date today_utc() {
	return chr::floor<chr::days>(chr::system_clock::now());
}

int year_of(Date d) {
	return static_cast<int>(chr::year_month_day{d}.year());
}

Date week_start(Date d) {
	chr::weekday wd{d};
	// iso_encoding: Monday == 1 .. Sunday == 7
	return d - chr::days{wd.iso_encoding() - 1};
}

Date month_start(Date d) {
	chr::year_month_day ymd{d};
	return Date{ymd.year() / ymd.month() / chr::day{1}};
}

} // namespace threatgeo
