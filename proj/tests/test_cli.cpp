#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "qc7/cli.hpp"

using namespace qc7;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

std::string binary() {
    const char* b = std::getenv("QC7_BIN");
    return b ? b : "";
}

/// Runs the installed binary; stderr is discarded.
Outcome run_binary(const std::string& args) {
    Outcome r;
    std::string cmd = binary() + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

/// Runs the CLI in-process.
Outcome run_inproc(std::vector<std::string> args, std::string* err_out = nullptr) {
    args.insert(args.begin(), "qc7");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    if (err_out) *err_out = err.str();
    return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

const std::vector<std::string> kSmall = {"--points", "1", "--functions", "1", "--poly-degree", "2", "--degree", "1"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

bool is_pq(const std::string& s) {
    static const std::regex re("-?[0-9]+/[0-9]+");
    return std::regex_match(s, re);
}

void collect_pq(const Json& j, std::vector<std::string>& out) {
    if (j.is_string() && is_pq(j.get<std::string>())) out.push_back(j.get<std::string>());
    if (j.is_structured())
        for (const auto& v : j) collect_pq(v, out);
}

std::vector<std::string> markdown_pq(const std::string& md) {
    std::vector<std::string> out;
    std::istringstream in(md);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '|') continue;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, '|')) {
            auto b = cell.find_first_not_of(' '), e = cell.find_last_not_of(' ');
            if (b == std::string::npos) continue;
            std::string t = cell.substr(b, e - b + 1);
            if (is_pq(t)) out.push_back(t);
        }
    }
    return out;
}

}  // namespace

TEST(CliBinary, ValidateExitsZero) {
    ASSERT_FALSE(binary().empty()) << "QC7_BIN not set";
    Outcome r = run_binary("validate --points 1");
    EXPECT_EQ(r.code, 0);
    Json d = Json::parse(r.out);
    EXPECT_TRUE(d["pass"].get<bool>());
    std::vector<std::string> names;
    for (const auto& s : d["suites"]) names.push_back(s["name"].get<std::string>());
    EXPECT_NE(std::find(names.begin(), names.end(), "quatalg"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "models.sphere7.structure"), names.end());
    EXPECT_EQ(d["conventions"][0]["multiplication"], "left");
    EXPECT_EQ(d["conventions"][0]["candidates"].size(), 4u);
}

TEST(CliBinary, CorruptConventionExitsOne) {
    std::string err;
    Outcome r = run_inproc({"validate", "--points", "1", "--corrupt-convention"}, &err);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(err.find("contact_compatibility"), std::string::npos);
    EXPECT_EQ(run_binary("validate --points 1 --corrupt-convention").code, 1);
}

TEST(CliBinary, UsageErrorsExitTwo) {
    EXPECT_EQ(run_binary("").code, 2);
    EXPECT_EQ(run_binary("spectrum --degree 0").code, 2);
    EXPECT_EQ(run_binary("spectrum --degree 5").code, 2);
    EXPECT_EQ(run_binary("validate --format xml").code, 2);
    EXPECT_EQ(run_binary("validate --tol -1").code, 2);
    EXPECT_EQ(run_binary("validate --points 0").code, 2);
    EXPECT_EQ(run_binary("validate --config /nonexistent/qc7.json").code, 2);
    EXPECT_EQ(run_binary("pform 'x1^^2'").code, 2);
    auto bad = temp_file("qc7_bad_key.json", R"({"sample_pionts": 3})");
    EXPECT_EQ(run_binary("validate --config " + bad.string()).code, 2);
    auto broken = temp_file("qc7_broken.json", "{ not json");
    EXPECT_EQ(run_binary("validate --config " + broken.string()).code, 2);
}

TEST(CliBinary, SpectrumCsvContract) {
    Outcome r = run_binary("spectrum --degree 1 --format csv");
    EXPECT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "lambda,multiplicity,certified,residual");
    EXPECT_EQ(first.rfind("4/1,8,true,", 0), 0u) << first;
}

TEST(CliInProcess, LichnerowiczSharpness) {
    Outcome r = run_inproc({"lichnerowicz", "--degree", "1", "--points", "2"});
    EXPECT_EQ(r.code, 0);
    Json d = Json::parse(r.out);
    EXPECT_EQ(d["k0"], "12/1");
    EXPECT_EQ(d["bound"], "4/1");
    EXPECT_EQ(d["lambda1"], "4/1");
    EXPECT_TRUE(d["sharp"].get<bool>());
}

TEST(CliInProcess, PFormOfCoordinate) {
    Outcome r = run_inproc({"pform", "x1"});
    EXPECT_EQ(r.code, 0);
    Json d = Json::parse(r.out);
    EXPECT_EQ(d["p_function_integral"], "0/1");
    EXPECT_EQ(d["p_function"], "0");
    Outcome q = run_inproc({"pform", "x1^2 - x2*x3"});
    Json e = Json::parse(q.out);
    EXPECT_EQ(e["f_cf_integral"], e["minus_p_function_integral"]);
}

TEST(CliInProcess, ConfigFileOverriddenByFlags) {
    auto cfg = temp_file("qc7_cfg.json", R"({"seed": 5, "sample_points": 1, "eigen_tol": "1e-10"})");
    Outcome r = run_inproc({"validate", "--config", cfg.string(), "--seed", "7"});
    EXPECT_EQ(r.code, 0);
    Json d = Json::parse(r.out);
    EXPECT_EQ(d["config"]["seed"], 7);
    EXPECT_EQ(d["config"]["sample_points"], 1);
    EXPECT_EQ(d["config"]["eigen_tol"], "1e-10");
}

TEST(CliInProcess, OutputFileMatchesStdout) {
    auto path = std::filesystem::temp_directory_path() / "qc7_out.md";
    std::filesystem::remove(path);
    Outcome a = run_inproc({"spectrum", "--degree", "1", "--format", "markdown", "--out", path.string()});
    EXPECT_EQ(a.code, 0);
    EXPECT_TRUE(a.out.empty());
    std::ifstream in(path);
    std::stringstream file;
    file << in.rdbuf();
    Outcome b = run_inproc({"spectrum", "--degree", "1", "--format", "markdown"});
    EXPECT_EQ(file.str(), b.out);
}

TEST(CliReport, ReproducibleAndFormatConsistent) {
    Outcome j1 = run_inproc(with({"report", "--format", "json"}, kSmall));
    Outcome j2 = run_inproc(with({"report", "--format", "json"}, kSmall));
    Outcome md = run_inproc(with({"report", "--format", "markdown"}, kSmall));
    EXPECT_EQ(j1.code, 0);
    EXPECT_EQ(md.code, 0);
    EXPECT_EQ(j1.out, j2.out);

    Json d = Json::parse(j1.out);
    EXPECT_EQ(d["discrepancy_registry"].size(), 3u);
    EXPECT_EQ(d["lichnerowicz"]["line"], "k0 = 12/1 => bound 4/1 = lambda1");
    std::size_t sections = 0;
    for (std::size_t pos = 0; (pos = md.out.find("## Discrepancy registry", pos)) != std::string::npos; ++pos)
        ++sections;
    EXPECT_EQ(sections, 1u);

    std::vector<std::string> a, b = markdown_pq(md.out);
    collect_pq(d, a);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
}
