#include "threatgeo/csv.hpp"

#include <charconv>

namespace threatgeo::csv {

std::vector<Record> parse(std::string_view text) {
	std::vector<Record> out;
	std::size_t line = 1;
	std::size_t i = 0;
	const std::size_t n = text.size();
	while (i < n) {
		Record rec{line, {}};
		std::string field;
		bool row_done = false;
		bool any_content = false;
		while (!row_done) {
			field.clear();
			if (i < n && text[i] == '"') {
				any_content = true;
				++i;
				while (i < n) {
					if (text[i] == '"') {
						if (i + 1 < n && text[i + 1] == '"') {
							field.push_back('"');
							i += 2;
						} else {
							++i;
							break;
						}
					} else {
						if (text[i] == '\n') {
							++line;
						}
						field.push_back(text[i++]);
					}
				}
			}
			while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
				any_content = true;
				field.push_back(text[i++]);
			}
			rec.fields.push_back(field);
			if (i < n && text[i] == ',') {
				any_content = true;
				++i;
				continue;
			}
			if (i < n && text[i] == '\r') {
				++i;
			}
			if (i < n && text[i] == '\n') {
				++i;
			}
			++line;
			row_done = true;
		}
		if (any_content) {
			out.push_back(std::move(rec));
		}
	}
	return out;
}

std::string escape(std::string_view field) {
	const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos ||
	                          (!field.empty() && (field.front() == ' ' || field.back() == ' '));
	if (!needs_quotes) {
		return std::string(field);
	}
	std::string out = "\"";
	for (char c : field) {
		if (c == '"') {
			out += "\"\"";
		} else {
			out.push_back(c);
		}
	}
	out.push_back('"');
	return out;
}

std::string format_row(const std::vector<std::string> &fields) {
	std::string out;
	for (std::size_t i = 0; i < fields.size(); ++i) {
		if (i) {
			out.push_back(',');
		}
		out += escape(fields[i]);
	}
	out.push_back('\n');
	return out;
}

std::string join_list(const std::vector<std::string> &items, char sep) {
	std::string out;
	for (std::size_t i = 0; i < items.size(); ++i) {
		if (i) {
			out.push_back(sep);
		}
		out += items[i];
	}
	return out;
}

std::string format_number(double value) {
	char buf[32];
	auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
	return std::string(buf, end);
}

std::vector<std::string> split_list(std::string_view text, char sep) {
	std::vector<std::string> out;
	if (text.empty()) {
		return out;
	}
	std::size_t start = 0;
	while (true) {
		auto pos = text.find(sep, start);
		out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
		if (pos == std::string_view::npos) {
			break;
		}
		start = pos + 1;
	}
	return out;
}

} // namespace threatgeo::csv
