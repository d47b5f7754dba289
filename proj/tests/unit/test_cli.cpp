#include "support.hpp"
#include "threatgeo/cli.hpp"
#include "threatgeo/report.hpp"

#include <doctest.h>

#include <json.hpp>
#include <map>
#include <sstream>

using namespace threatgeo;
namespace fs = std::filesystem;

namespace {

struct Result {
	int code;
	std::string out;
	std::string err;
};

Result run(std::vector<std::string> args) {
	std::ostringstream out;
	std::ostringstream err;
	int code = cli::run(args, out, err);
	return {code, out.str(), err.str()};
}

std::map<std::string, std::string> tree(const std::string &dir) {
	std::map<std::string, std::string> files;
	for (const auto &entry : fs::recursive_directory_iterator(dir)) {
		if (entry.is_regular_file()) {
			files[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
		}
	}
	return files;
}

void pipeline(const std::string &out) {
	const auto apt29 = testing::fixture("apt29.ndjson");
	const std::string landmarks = std::string(THREATGEO_DATA_DIR) + "/landmarks_covid.csv";
	const std::string spec = std::string(THREATGEO_DATA_DIR) + "/synth_spec_example.json";
	REQUIRE(run({"normalize", "--input", testing::fixture("events10.ndjson"), "--output-dir", out + "/normalize"}).code == 0);
	REQUIRE(run({"stats", "--input", apt29, "--top", "5", "--year", "2020", "--output-dir", out + "/stats"}).code == 0);
	REQUIRE(run({"spread", "--input", apt29, "--dot", "--output-dir", out + "/spread"}).code == 0);
	REQUIRE(run({"cluster", "--input", apt29, "--output-dir", out + "/cluster"}).code == 0);
	REQUIRE(run({"correlate", "--input", apt29, "--bin", "week", "--output-dir", out + "/correlate"}).code == 0);
	REQUIRE(run({"lens", "--input", apt29, "--from", "2020-01-01", "--to", "2021-06-30", "--techniques",
	             "T1059,T1078,T1566,T1195,T1027", "--landmarks", landmarks, "--output-dir", out + "/lens"})
	            .code == 0);
	REQUIRE(run({"synth", "--spec", spec, "--output-dir", out + "/synth"}).code == 0);
	REQUIRE(run({"forecast", "--input", out + "/synth/corpus.ndjson", "--country", "Germany", "--output-dir",
	             out + "/forecast"})
	            .code == 0);
}

} // namespace

TEST_CASE("usage errors") {
	auto none = run({});
	CHECK(none.code == cli::kExitUsage);
	CHECK(none.err.find("Usage") != std::string::npos);

	auto unknown = run({"stats", "--bogus"});
	CHECK(unknown.code == cli::kExitUsage);
	CHECK(unknown.err.find("--bogus") != std::string::npos);

	CHECK(run({"frobnicate"}).code == cli::kExitUsage);
	CHECK(run({"forecast", "--input", testing::fixture("apt29.ndjson")}).code == cli::kExitUsage);
	CHECK(run({"stats", "--input", "/definitely/not/here.ndjson"}).code == cli::kExitUsage);

	auto help = run({"--help"});
	CHECK(help.code == cli::kExitOk);
	CHECK(help.out.find("Subcommands") != std::string::npos);
	CHECK(run({"--version"}).code == cli::kExitOk);
}

TEST_CASE("stats top5 matches the hand tally") {
	testing::TempDir dir;
	REQUIRE(run({"normalize", "--input", testing::fixture("events10.ndjson"), "--output-dir", dir / "n"}).code == 0);
	REQUIRE(run({"stats", "--input", dir / "n/corpus.normalized.ndjson", "--top", "5", "--output-dir", dir / "s"})
	            .code == 0);
	auto top = nlohmann::json::parse(read_file(dir / "s/top5.json"));
	CHECK(top["total"] == 11);
	const std::vector<std::pair<std::string, int>> expected{
	    {"United States of America", 2}, {"Australia", 1}, {"Brazil", 1}, {"Canada", 1}, {"China", 1}};
	REQUIRE(top["countries"].size() == expected.size());
	for (std::size_t i = 0; i < expected.size(); ++i) {
		CHECK(top["countries"][i]["country"] == expected[i].first);
		CHECK(top["countries"][i]["count"] == expected[i].second);
	}

	REQUIRE(run({"--format", "csv", "stats", "--input", dir / "n/corpus.normalized.ndjson", "--top", "2",
	             "--output-dir", dir / "c"})
	            .code == 0);
	CHECK(read_file(dir / "c/top2.csv") == "country,count\nUnited States of America,2\nAustralia,1\n");
}

TEST_CASE("APT29 spread DOT carries the UK edges") {
	testing::TempDir dir;
	REQUIRE(run({"spread", "--input", testing::fixture("apt29.ndjson"), "--dot", "--output-dir", dir.path().string()}).code ==
	        0);
	REQUIRE(run({"lens", "--input", testing::fixture("apt29.ndjson"), "--from", "2020-01-01", "--to", "2021-06-30",
	             "--techniques", "T1059,T1078,T1566,T1195,T1027", "--output-dir", dir / "lens"})
	            .code == 0);
	const auto dot = read_file(dir / "lens/lens_spread.dot");
	CHECK(dot.find("\"United Kingdom\" -> \"United States of America\" [label=\"0.47\"];") != std::string::npos);
	CHECK(dot.find("\"United Kingdom\" -> \"Germany\" [label=\"0.33\"];") != std::string::npos);
	auto top = nlohmann::json::parse(read_file(dir / "lens/lens_top.json"));
	CHECK(top["country"][0]["value"] == "United States of America");
	CHECK(top["country"][1]["value"] == "Germany");
}

TEST_CASE("manifest") {
	testing::TempDir dir;
	const auto input = testing::fixture("apt29.ndjson");
	REQUIRE(run({"--seed", "9", "stats", "--input", input, "--top", "3", "--output-dir", dir.path().string()}).code == 0);
	auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
	CHECK(m["tool"] == "threatgeo");
	CHECK(m["subcommand"] == "stats");
	CHECK(m["seed"] == 9);
	CHECK(m["exit_code"] == 0);
	CHECK(m["flags"]["--top"] == "3");
	CHECK(!m["flags"].contains("--output-dir"));
	REQUIRE(m["inputs"].size() == 1);
	CHECK(m["inputs"][0]["fnv1a64"] == report::fnv1a64_hex(read_file(input)));
	for (const auto &o : m["outputs"]) {
		const auto bytes = read_file(dir / o["file"].get<std::string>());
		CHECK(o["bytes"] == bytes.size());
		CHECK(o["fnv1a64"] == report::fnv1a64_hex(bytes));
	}
}

TEST_CASE("data errors exit 2 and still leave a manifest") {
	testing::TempDir dir;
	write_file(dir / "bad.ndjson", "garbage\nmore garbage\n");
	auto r = run({"stats", "--input", dir / "bad.ndjson", "--output-dir", dir / "out"});
	CHECK(r.code == cli::kExitData);
	auto m = nlohmann::json::parse(read_file(dir / "out/manifest.json"));
	CHECK(m["exit_code"] == 2);
	CHECK(m["outputs"].empty());
	CHECK(m.contains("error"));

	CHECK(run({"forecast", "--input", testing::fixture("apt29.ndjson"), "--country", "Narnia", "--output-dir",
	           dir / "f"})
	          .code == cli::kExitData);
	CHECK(run({"lens", "--input", testing::fixture("apt29.ndjson"), "--from", "2020-01-01", "--to", "2021-06-30",
	           "--techniques", "T9999", "--output-dir", dir / "l"})
	          .code == cli::kExitData);
}

TEST_CASE("config file sits under explicit flags") {
	testing::TempDir dir;
	write_file(dir / "run.ini", "seed=7\n[stats]\ntop=3\n");
	const auto input = testing::fixture("apt29.ndjson");
	REQUIRE(run({"--config", dir / "run.ini", "stats", "--input", input, "--output-dir", dir / "a"}).code == 0);
	CHECK(fs::exists(dir / "a/top3.json"));
	CHECK(nlohmann::json::parse(read_file(dir / "a/manifest.json"))["seed"] == 7);
	REQUIRE(run({"--config", dir / "run.ini", "--seed", "8", "stats", "--input", input, "--top", "4", "--output-dir",
	             dir / "b"})
	            .code == 0);
	CHECK(fs::exists(dir / "b/top4.json"));
	CHECK(nlohmann::json::parse(read_file(dir / "b/manifest.json"))["seed"] == 8);
}

TEST_CASE("full pipeline is reproducible and leaves inputs untouched") {
	testing::TempDir dir;
	std::map<std::string, std::string> before;
	for (const auto &name : {"apt29.ndjson", "events10.ndjson"}) {
		before[name] = read_file(testing::fixture(name));
	}
	pipeline(dir / "run");
	auto first = tree(dir / "run");
	fs::remove_all(dir / "run");
	pipeline(dir / "run");
	auto second = tree(dir / "run");
	CHECK(first.size() >= 30);
	CHECK(first == second);
	for (const auto &[name, bytes] : before) {
		CHECK(read_file(testing::fixture(name)) == bytes);
	}
}
