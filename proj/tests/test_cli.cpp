#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "json.hpp"
#include "meetpat/cli.hpp"
#include "meetpat/corpus.hpp"
#include "meetpat/generalization.hpp"

using namespace meetpat;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) {
        dir = fs::temp_directory_path() / ("meetpat_test_cli_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (err_text) {
        *err_text = err.str();
    }
    return code;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

} // namespace

TEST_CASE("fnv digest") {
    CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("exit codes") {
    Scratch s("codes");
    CHECK(run_cli({}) == cli::kUsage);
    CHECK(run_cli({"frobnicate"}) == cli::kUsage);
    CHECK(run_cli({"bound", "--remp", "0.5"}) == cli::kUsage);
    CHECK(run_cli({"mine", "--bogus", "1", "--corpus", "x"}) == cli::kUsage);
    CHECK(run_cli({"mine", "--corpus", s / "missing.jsonl", "--out", s / "o"}) == cli::kIo);
    spit(s / "bad.jsonl", "{\"alphabet\": [\"A\"]}\n{not json\n");
    CHECK(run_cli({"markov", "--corpus", s / "bad.jsonl", "--out", s / "o"}) == cli::kParse);
    std::string err;
    CHECK(run_cli({"synth-decision", "--inside", "0.2", "0.2", "0.2", "0.2", "0.2", "0.2", "--out", s / "o"},
                  &err) == cli::kValidation);
    CHECK(err.find("rates") != std::string::npos);
    CHECK(run_cli({"bound", "--remp", "0.5", "--m", "95", "--L", "3", "--B", "1", "--alphabet", "4", "--delta",
                   "1.5", "--out", s / "o"}) == cli::kValidation);
    CHECK(run_cli({"--help"}) == cli::kOk);
}

TEST_CASE("bound output matches the library") {
    Scratch s("bound");
    REQUIRE(run_cli({"bound", "--remp", "0.5", "--m", "95", "--L", "3", "--B", "1", "--alphabet", "4", "--delta",
                     "0.05", "--out", s / "b"}) == cli::kOk);
    const auto j = json::parse(slurp(s / "b/bound.json"));
    CHECK(j.at("bound").get<double>() == risk_bound({0.5, 95, 3, 1, 4, 0.05}));
    // closed form evaluated independently at 50 digits, with the count 293 done by hand
    using boost::multiprecision::cpp_bin_float_50;
    const cpp_bin_float_50 ref =
        cpp_bin_float_50("0.5") + sqrt((log(cpp_bin_float_50(293)) + log(cpp_bin_float_50(20))) / 190);
    CHECK(std::abs(j.at("bound").get<double>() - static_cast<double>(ref)) < 1e-10);
    CHECK(j.at("count").get<std::string>() == "293");

    const auto manifest = json::parse(slurp(s / "b/manifest.json"));
    CHECK(manifest.at("subcommand") == "bound");
    CHECK(manifest.at("corpus_digest").is_null());
    CHECK(manifest.at("outputs").size() >= 1);
}

TEST_CASE("synthesis is deterministic and the manifest lists every output") {
    Scratch s("synth");
    for (const char* dir : {"a", "b"}) {
        REQUIRE(run_cli({"synth-template", "--meetings", "6", "--length", "20", "--seed", "3", "--out", s / dir}) ==
                cli::kOk);
    }
    CHECK(slurp(s / "a/corpus.jsonl") == slurp(s / "b/corpus.jsonl"));
    REQUIRE(run_cli({"synth-template", "--meetings", "6", "--length", "20", "--seed", "4", "--out", s / "c"}) ==
            cli::kOk);
    CHECK(slurp(s / "a/corpus.jsonl") != slurp(s / "c/corpus.jsonl"));

    const auto manifest = json::parse(slurp(s / "a/manifest.json"));
    std::set<std::string> listed;
    for (const auto& o : manifest.at("outputs")) {
        listed.insert(fs::path(o.get<std::string>()).filename().string());
    }
    for (const auto& entry : fs::directory_iterator(s.dir / "a")) {
        const auto name = entry.path().filename().string();
        if (name != "manifest.json") {
            CHECK_MESSAGE(listed.count(name), name);
        }
    }
    CHECK(manifest.at("config").at("seed") == 3);
}

TEST_CASE("config files and flag precedence") {
    Scratch s("config");
    spit(s / "cfg.json", R"({"meetings": 4, "length": 12, "seed": 9})");
    REQUIRE(run_cli({"synth-template", "--config", s / "cfg.json", "--out", s / "a"}) == cli::kOk);
    REQUIRE(run_cli({"synth-template", "--meetings", "4", "--length", "12", "--seed", "9", "--out", s / "b"}) ==
            cli::kOk);
    CHECK(slurp(s / "a/corpus.jsonl") == slurp(s / "b/corpus.jsonl"));

    REQUIRE(run_cli({"synth-template", "--config", s / "cfg.json", "--seed", "10", "--out", s / "c"}) == cli::kOk);
    CHECK(json::parse(slurp(s / "c/manifest.json")).at("config").at("seed") == 10);

    // a manifest can be fed back as a config
    REQUIRE(run_cli({"synth-template", "--config", s / "a/manifest.json", "--out", s / "d"}) == cli::kOk);
    CHECK(slurp(s / "a/corpus.jsonl") == slurp(s / "d/corpus.jsonl"));

    spit(s / "unknown.json", R"({"colour": 1})");
    CHECK(run_cli({"synth-template", "--config", s / "unknown.json", "--out", s / "e"}) != cli::kOk);
}

TEST_CASE("analysis pipelines run end to end") {
    Scratch s("pipe");
    REQUIRE(run_cli({"synth-template", "--meetings", "8", "--length", "12", "--noise", "0", "--seed", "2",
                     "--out", s / "t"}) == cli::kOk);
    const auto corpus = s / "t/corpus.jsonl";
    REQUIRE(run_cli({"mine", "--corpus", corpus, "--max-accepted", "600", "--restart-period", "200",
                     "--max-nodes", "6", "--out", s / "m"}) == cli::kOk);
    const auto consensus = json::parse(slurp(s / "m/consensus.json"));
    CHECK(consensus.contains("modal_frequency"));
    const auto tmpl = json::parse(slurp(s / "m/template.json"));
    CHECK(tmpl.contains("nodes"));
    CHECK(slurp(s / "m/template.dot").rfind("digraph", 0) == 0);

    REQUIRE(run_cli({"markov", "--corpus", corpus, "--out", s / "k"}) == cli::kOk);
    REQUIRE(run_cli({"phmm", "--corpus", corpus, "--length", "3", "--out", s / "h"}) == cli::kOk);

    REQUIRE(run_cli({"synth-decision", "--meetings", "30", "--seed", "5", "--out", s / "d"}) == cli::kOk);
    REQUIRE(run_cli({"detect", "--corpus", s / "d/corpus.jsonl", "--folds", "5", "--out", s / "e"}) == cli::kOk);
    CHECK(slurp(s / "e/metrics.csv").rfind("method,auc,auc_std,precision,recall,f_measure\n", 0) == 0);
    REQUIRE(run_cli({"rank-features", "--corpus", s / "d/corpus.jsonl", "--folds", "5", "--out", s / "r"}) ==
            cli::kOk);
    CHECK(slurp(s / "r/ranking.csv").rfind("ranking,dialogue_act,mean,std\n", 0) == 0);
}
