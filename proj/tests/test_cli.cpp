#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "auctionlab/manifest.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

// Runs the built binary through the shell, merging stderr into the captured
// stream so error messages are assertable.
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd;
    if (!env_prefix.empty()) cmd += env_prefix + " ";
    cmd += std::string(AUCTIONLAB_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buffer[4096];
    while (std::size_t got = std::fread(buffer, 1, sizeof buffer, pipe))
        result.output.append(buffer, got);
    const int status = pclose(pipe);
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string config_path(const std::string& name) {
    return std::string(AUCTIONLAB_CONFIG_DIR) + "/" + name;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "auctionlab_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("conjure").code == 2);
    CHECK(run_cli("simulate --config " + config_path("cli_tiny.json") + " --out /tmp/x.csv").code ==
          2);  // --count missing
    CHECK(run_cli("simulate --config " + config_path("cli_tiny.json") +
                  " --count 0 --out /tmp/x.csv")
              .code == 2);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("simulate --help").code == 0);
}

TEST_CASE("simulate writes a deterministic dataset plus manifest") {
    const fs::path dir = scratch_dir("simulate");
    const std::string out_a = (dir / "a.csv").string();
    const std::string out_b = (dir / "b.csv").string();
    const std::string base = "simulate --config " + config_path("cli_tiny.json") +
                             " --count 50 --seed 11 --out ";

    const RunResult a = run_cli(base + out_a);
    CHECK(a.code == 0);
    const RunResult b = run_cli(base + out_b);
    CHECK(b.code == 0);

    const std::string csv_a = auctionlab::read_text_file(out_a);
    const std::string csv_b = auctionlab::read_text_file(out_b);
    CHECK(csv_a == csv_b);
    CHECK(csv_a.rfind("profile_id,vsp_id,valuation,t_total_s,t_req_s\n", 0) == 0);
    CHECK(count_lines(csv_a) == 1 + 50 * 2);  // header + count x bidders

    const json manifest = json::parse(auctionlab::read_text_file(out_a + ".manifest.json"));
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("seeds").at("dataset") == 11);
    CHECK(manifest.at("outputs").at(0) == "a.csv");  // relative to the manifest
}

TEST_CASE("simulate rejects unreadable or malformed configs") {
    CHECK(run_cli("simulate --config /nonexistent.json --count 5 --out /tmp/x.csv").code == 2);

    const fs::path dir = scratch_dir("badcfg");
    const std::string bad = (dir / "bad.json").string();
    auctionlab::write_text_file(bad, "{ not json");
    const RunResult r =
        run_cli("simulate --config " + bad + " --count 5 --out " + (dir / "x.csv").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("config error") != std::string::npos);
}

TEST_CASE("train emits model, metrics, and manifest reproducibly") {
    const fs::path dir_a = scratch_dir("train_a");
    const fs::path dir_b = scratch_dir("train_b");
    const std::string env = "SOURCE_DATE_EPOCH=1700000000";
    const std::string base = "train --config " + config_path("cli_tiny.json") + " --out ";

    const RunResult a = run_cli(base + dir_a.string(), env);
    CHECK(a.code == 0);
    const RunResult b = run_cli(base + dir_b.string(), env);
    CHECK(b.code == 0);

    const std::string model_a = auctionlab::read_text_file((dir_a / "model.json").string());
    const std::string model_b = auctionlab::read_text_file((dir_b / "model.json").string());
    CHECK(model_a == model_b);

    const std::string metrics_a = auctionlab::read_text_file((dir_a / "metrics.csv").string());
    CHECK(metrics_a == auctionlab::read_text_file((dir_b / "metrics.csv").string()));
    CHECK(metrics_a.rfind("iter,revenue,ir_penalty,ic_penalty,loss\n", 0) == 0);

    const std::string manifest_a = auctionlab::read_text_file((dir_a / "manifest.json").string());
    CHECK(manifest_a == auctionlab::read_text_file((dir_b / "manifest.json").string()));

    const json model = json::parse(model_a);
    CHECK(model.at("n_bidders") == 2);
    CHECK(model.at("n_units") == 1);
}

TEST_CASE("evaluate reports held-out metrics and guards the data stream") {
    const fs::path dir = scratch_dir("evaluate");
    REQUIRE(run_cli("train --config " + config_path("cli_tiny.json") + " --out " + dir.string())
                .code == 0);
    const std::string model_path = (dir / "model.json").string();

    const RunResult ok = run_cli("evaluate " + model_path + " --config " +
                                 config_path("cli_tiny.json") + " --count 6 --seed 500");
    CHECK(ok.code == 0);
    const json report = json::parse(ok.output);
    CHECK(report.at("n_profiles") == 6);
    CHECK(report.at("mean_revenue").get<double>() >= 0.0);
    CHECK(report.at("max_regret").get<double>() >= 0.0);

    // reusing the training data stream must be refused
    const json model = json::parse(auctionlab::read_text_file(model_path));
    const std::uint64_t data_seed = model.at("data_seed").get<std::uint64_t>();
    const RunResult collide =
        run_cli("evaluate " + model_path + " --config " + config_path("cli_tiny.json") +
                " --count 6 --seed " + std::to_string(data_seed));
    CHECK(collide.code == 2);
    CHECK(collide.output.find("held-out") != std::string::npos);

    CHECK(run_cli("evaluate /missing_model.json --config " + config_path("cli_tiny.json")).code ==
          2);

    // writing the report to a file also drops a manifest next to it
    const std::string out = (dir / "report.json").string();
    CHECK(run_cli("evaluate " + model_path + " --config " + config_path("cli_tiny.json") +
                  " --count 6 --seed 500 --out " + out)
              .code == 0);
    const json on_disk = json::parse(auctionlab::read_text_file(out));
    CHECK(on_disk.at("mean_revenue") == report.at("mean_revenue"));
    CHECK(json::parse(auctionlab::read_text_file(out + ".manifest.json")).at("command") ==
          "evaluate");
}

TEST_CASE("baseline hits the analytic second-price anchor") {
    const RunResult r = run_cli("baseline --mechanism second-price --config " +
                                config_path("uniform2.json") + " --count 200000 --seed 42");
    CHECK(r.code == 0);
    const json out = json::parse(r.output);
    CHECK(out.at("mechanism") == "second-price");
    const double revenue = out.at("revenue").get<double>();
    CHECK(std::abs(revenue - 1.0 / 3.0) < 0.004);

    const RunResult m = run_cli("baseline --mechanism myerson --config " +
                                config_path("uniform2.json") + " --count 200000 --seed 43");
    CHECK(m.code == 0);
    CHECK(std::abs(json::parse(m.output).at("revenue").get<double>() - 5.0 / 12.0) < 0.004);
}

TEST_CASE("baseline rejects unknown mechanisms with the valid list") {
    const RunResult r = run_cli("baseline --mechanism dutch --config " +
                                config_path("uniform2.json") + " --count 100");
    CHECK(r.code == 2);
    CHECK(r.output.find("vcg") != std::string::npos);
    CHECK(r.output.find("second-price") != std::string::npos);
    CHECK(r.output.find("myerson") != std::string::npos);
}

TEST_CASE("baseline handles the latency scenario") {
    const RunResult r = run_cli("baseline --mechanism vcg --config " +
                                config_path("cli_tiny.json") + " --count 64 --seed 3");
    CHECK(r.code == 0);
    const json out = json::parse(r.output);
    CHECK(out.at("n_bidders") == 2);
    const double revenue = out.at("revenue").get<double>();
    CHECK(revenue >= 0.0);
    CHECK(std::isfinite(revenue));
}

TEST_CASE("sweep emits one learned and one vcg row per swept value") {
    const fs::path dir = scratch_dir("sweep_vsps");
    const RunResult r = run_cli("sweep --kind vsps --config " + config_path("uniform2.json") +
                                " --values 2,3 --out " + dir.string());
    CHECK(r.code == 0);
    const std::string csv = auctionlab::read_text_file((dir / "sweep.csv").string());
    CHECK(csv.rfind("param,mechanism,revenue,ir_penalty,max_regret\n", 0) == 0);
    CHECK(count_lines(csv) == 5);
    CHECK(csv.find("learned") != std::string::npos);
    CHECK(csv.find("vcg") != std::string::npos);
    CHECK(json::parse(auctionlab::read_text_file((dir / "manifest.json").string()))
              .at("command") == "sweep");
}

TEST_CASE("sweep validates kind and values") {
    const fs::path dir = scratch_dir("sweep_bad");
    CHECK(run_cli("sweep --kind vsps --config " + config_path("uniform2.json") + " --out " +
                  dir.string())
              .code == 2);  // missing --values
    CHECK(run_cli("sweep --kind vsps --config " + config_path("uniform2.json") +
                  " --values 2,,3 --out " + dir.string())
              .code == 2);
    CHECK(run_cli("sweep --kind spiral --config " + config_path("uniform2.json") +
                  " --values 2 --out " + dir.string())
              .code == 2);
}

TEST_CASE("semcom sweep writes the paired comparison") {
    const fs::path dir = scratch_dir("sweep_semcom");
    const RunResult r = run_cli("sweep --kind semcom --config " + config_path("cli_tiny.json") +
                                " --out " + dir.string());
    CHECK(r.code == 0);
    const json cmp = json::parse(auctionlab::read_text_file((dir / "semcom.json").string()));
    CHECK(cmp.at("with_semcom").at("n_profiles") == 8);
    CHECK(cmp.at("without_semcom").at("n_profiles") == 8);
    const std::string csv = auctionlab::read_text_file((dir / "sweep.csv").string());
    CHECK(count_lines(csv) == 3);
}
