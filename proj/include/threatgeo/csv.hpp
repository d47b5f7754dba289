#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace threatgeo::csv {

struct Record {
	std::size_t line; // 1-based line where the record starts
	std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, quotes ("") and newlines.
/// Blank lines are skipped.
std::vector<Record> parse(std::string_view text);

std::string escape(std::string_view field);
std::string format_row(const std::vector<std::string> &fields);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

/// List fields are ';'-joined. An empty string decodes to an empty list.
std::string join_list(const std::vector<std::string> &items, char sep = ';');
std::vector<std::string> split_list(std::string_view text, char sep = ';');

} // namespace threatgeo::csv
