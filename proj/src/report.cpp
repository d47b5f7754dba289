#include "threatgeo/report.hpp"

#include "threatgeo/csv.hpp"
#include "threatgeo/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <stdexcept>

namespace threatgeo::report {

namespace {

std::string xml_escape(std::string_view s) {
	std::string out;
	for (char c : s) {
		switch (c) {
		case '&':
			out += "&amp;";
			break;
		case '<':
			out += "&lt;";
			break;
		case '>':
			out += "&gt;";
			break;
		case '"':
			out += "&quot;";
			break;
		default:
			out.push_back(c);
		}
	}
	return out;
}

} // namespace

std::string svg_heatmap(const NamedMatrix &m) {
	const std::size_t n = m.names.size();
	if (m.values.size() != n) {
		throw std::invalid_argument("heatmap matrix must be square and match its names");
	}
	for (const auto &row : m.values) {
		if (row.size() != n) {
			throw std::invalid_argument("heatmap matrix must be square and match its names");
		}
	}
	constexpr int cell = 20;
	constexpr int margin = 160;
	const int size = margin + static_cast<int>(n) * cell + 10;
	std::string out;
	char buf[256];
	std::snprintf(buf, sizeof buf,
	              "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n", size,
	              size, size, size);
	out += buf;
	out += "<defs><pattern id=\"undefined\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
	       "patternTransform=\"rotate(45)\"><rect width=\"6\" height=\"6\" fill=\"#ffffff\"/>"
	       "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#999999\" stroke-width=\"2\"/></pattern></defs>\n";
	out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
	for (std::size_t i = 0; i < n; ++i) {
		const int y = margin + static_cast<int>(i) * cell;
		const int x = margin + static_cast<int>(i) * cell;
		std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" font-size=\"10\" text-anchor=\"end\">", margin - 4,
		              y + cell / 2 + 4);
		out += buf + xml_escape(m.names[i]) + "</text>\n";
		std::snprintf(buf, sizeof buf,
		              "<text x=\"%d\" y=\"%d\" font-size=\"10\" transform=\"rotate(-90 %d %d)\">", x + cell / 2 + 4,
		              margin - 4, x + cell / 2 + 4, margin - 4);
		out += buf + xml_escape(m.names[i]) + "</text>\n";
	}
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = 0; j < n; ++j) {
			const int x = margin + static_cast<int>(j) * cell;
			const int y = margin + static_cast<int>(i) * cell;
			const auto &v = m.values[i][j];
			if (!v || !std::isfinite(*v)) {
				std::snprintf(buf, sizeof buf,
				              "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"url(#undefined)\"/>\n", x, y,
				              cell, cell);
			} else {
				const double mag = std::clamp(std::abs(*v), 0.0, 1.0);
				const int level = static_cast<int>(std::lround(255.0 * (1.0 - mag)));
				std::snprintf(buf, sizeof buf,
				              "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#%02x%02x%02x\"/>\n", x, y,
				              cell, cell, level, level, level);
			}
			out += buf;
		}
	}
	out += "</svg>\n";
	return out;
}

void emit_svg_heatmap(const NamedMatrix &matrix, const std::filesystem::path &path) {
	write_file(path, svg_heatmap(matrix));
}

std::string fnv1a64_hex(std::string_view bytes) {
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (unsigned char c : bytes) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	char buf[17];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

std::string counts_json(const analytics::CountryCounts &counts, std::size_t top) {
	nlohmann::ordered_json j;
	j["total"] = counts.total;
	auto arr = nlohmann::ordered_json::array();
	for (const auto &[c, n] : analytics::top_countries(counts, top)) {
		arr.push_back({{"country", c}, {"count", n}});
	}
	j["countries"] = arr;
	return j.dump(2) + "\n";
}

std::string counts_csv(const analytics::CountryCounts &counts, std::size_t top) {
	std::string out = "country,count\n";
	for (const auto &[c, n] : analytics::top_countries(counts, top)) {
		out += csv::format_row({c, std::to_string(n)});
	}
	return out;
}

std::string cumulative_json(const std::vector<std::pair<std::string, double>> &share) {
	auto arr = nlohmann::ordered_json::array();
	for (const auto &[c, f] : share) {
		arr.push_back({{"country", c}, {"cumulative", f}});
	}
	return arr.dump(2) + "\n";
}

std::string cumulative_csv(const std::vector<std::pair<std::string, double>> &share) {
	std::string out = "country,cumulative\n";
	for (const auto &[c, f] : share) {
		out += csv::format_row({c, csv::format_number(f)});
	}
	return out;
}

std::string pairs_json(const analytics::PairCounts &pairs) {
	std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> sorted(pairs.pairs.begin(),
	                                                                                  pairs.pairs.end());
	std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
	auto arr = nlohmann::ordered_json::array();
	for (const auto &[key, n] : sorted) {
		arr.push_back({{"a", key.first}, {"b", key.second}, {"count", n}});
	}
	return arr.dump(2) + "\n";
}

std::string pairs_csv(const analytics::PairCounts &pairs) {
	std::string out = "a,b,count\n";
	std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> sorted(pairs.pairs.begin(),
	                                                                                  pairs.pairs.end());
	std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
	for (const auto &[key, n] : sorted) {
		out += csv::format_row({key.first, key.second, std::to_string(n)});
	}
	return out;
}

std::string ranking_json(const analytics::Ranking &ranking, std::string_view key) {
	auto arr = nlohmann::ordered_json::array();
	for (const auto &[v, n] : ranking) {
		arr.push_back({{std::string(key), v}, {"count", n}});
	}
	return arr.dump(2) + "\n";
}

std::string transitions_json(const std::map<std::string, spread::TransitionMatrix> &groups) {
	nlohmann::ordered_json j = nlohmann::ordered_json::object();
	for (const auto &[key, tm] : groups) {
		j[key] = {{"countries", tm.countries}, {"counts", tm.counts}, {"probs", tm.probs}};
	}
	return j.dump(2) + "\n";
}

} // namespace threatgeo::report
