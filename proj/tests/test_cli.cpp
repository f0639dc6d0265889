#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "canard/errors.hpp"
#include "cli.hpp"

using namespace canard;
using namespace canard::cli;

namespace {

std::string tmp_dir(const std::string& name) {
    const auto p = std::filesystem::path(CANARD_TEST_TMP) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "canard-cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

RunConfig reference_config(const std::string& dir) {
    RunConfig c;
    c.model = {0.4, 0.05, 0.176, 0.005};
    c.simulate.u0 = 0.3;
    c.simulate.v0 = 0.3;
    c.simulate.t_end = 2000.0;
    c.sweep.delta_min = 0.2;
    c.sweep.delta_max = 0.7;
    c.sweep.step = 0.05;
    c.sweep.refine_levels = 2;
    c.output.dir = dir;
    return c;
}

}  // namespace

TEST_CASE("config serialization round trip") {
    const RunConfig c = reference_config("out");
    const RunConfig back = from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(config_hash(back) == config_hash(c));

    RunConfig moved = c;
    moved.output.dir = "elsewhere";
    CHECK(config_hash(moved) == config_hash(c));
    moved.model.theta = 0.06;
    CHECK(config_hash(moved) != config_hash(c));

    const std::string dir = tmp_dir("cfg");
    save_config(c, dir + "/run.json");
    CHECK(to_json(load_config(dir + "/run.json")) == to_json(c));
}

TEST_CASE("config validation names the field") {
    nlohmann::json j = to_json(reference_config("."));
    j["model"].erase("epsilon");
    const RunConfig c = from_json(j);
    CHECK_THROWS_WITH_AS(model_params(c), doctest::Contains("model.epsilon"), ValidationError);

    nlohmann::json bad = to_json(reference_config("."));
    bad["sweep"]["stepp"] = 0.1;
    CHECK_THROWS_WITH_AS(from_json(bad), doctest::Contains("sweep.stepp"), ValidationError);
    nlohmann::json typed = to_json(reference_config("."));
    typed["model"]["theta"] = "0.05";
    CHECK_THROWS_WITH_AS(from_json(typed), doctest::Contains("model.theta"), ValidationError);

    const std::string dir = tmp_dir("missing");
    std::ofstream(dir + "/c.json") << j.dump();
    const Run r = run_cli({"analyze", "--config", dir + "/c.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("model.epsilon") != std::string::npos);

    std::ofstream(dir + "/broken.json") << "{ not json";
    CHECK(run_cli({"analyze", "--config", dir + "/broken.json"}).code == 2);
    CHECK(run_cli({"analyze", "--config", dir + "/absent.json"}).code == 4);
}

TEST_CASE("analyze command") {
    const std::string dir = tmp_dir("analyze");
    const Run r = run_cli({"analyze", "--delta", "0.2426879409", "--theta", "0.05", "--eta", "0.176", "--epsilon",
                           "0.005", "--out", dir});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("P.A = 2.79") != std::string::npos);
    CHECK(r.out.find("Q.A = -0.105") != std::string::npos);
    const std::string file = slurp(dir + "/analyze_report.txt");
    CHECK(file.rfind("# config-hash: ", 0) == 0);

    const Run none =
        run_cli({"analyze", "--delta", "0.3", "--theta", "0.9", "--eta", "0.9", "--epsilon", "0.005", "--out", dir});
    REQUIRE(none.code == 0);
    CHECK(none.out.find("fewer-than-two-folds") != std::string::npos);
    CHECK(none.out.find("P.A") == std::string::npos);
}

TEST_CASE("simulate command") {
    const std::string dir = tmp_dir("simulate");
    RunConfig c = reference_config(dir);
    std::ostringstream out;
    cmd_simulate(c, out);
    CHECK(out.str().find("cycle1.kind = relaxation") != std::string::npos);
    CHECK(slurp(dir + "/cycles.txt").find("cycle1.stability = stable") != std::string::npos);

    c.simulate.u0 = 1.0;
    c.simulate.v0 = 0.0;
    c.simulate.t_end = 100.0;
    c.simulate.detect_cycles = false;
    std::ostringstream out2;
    const std::string path = cmd_simulate(c, out2);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# config-hash: ", 0) == 0);
    std::getline(in, line);
    CHECK(line == "t,u,v");
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.substr(line.find(',')) == ",1,0");
        ++rows;
    }
    CHECK(rows >= 2);

    const Run neg = run_cli({"simulate", "--delta", "0.4", "--theta", "0.05", "--eta", "0.176", "--epsilon", "0.005",
                             "--u0", "-0.1", "--v0", "0.3", "--t-end", "10", "--out", dir});
    CHECK(neg.code == 2);
}

TEST_CASE("sweep command") {
    const std::string a = tmp_dir("sweep_a");
    const std::string b = tmp_dir("sweep_b");
    RunConfig c = reference_config(a);
    std::ostringstream o1, e1;
    cmd_sweep(c, o1, e1);
    CHECK(e1.str().empty());
    CHECK(o1.str().find("stable_cycle_delta_first = 0.25\n") != std::string::npos);
    CHECK(o1.str().find("stable_cycle_delta_last = 0.607") != std::string::npos);

    c.output.dir = b;
    std::ostringstream o2, e2;
    cmd_sweep(c, o2, e2);
    CHECK(slurp(a + "/diagram.csv") == slurp(b + "/diagram.csv"));
    CHECK(slurp(a + "/diagram.csv.meta") == slurp(b + "/diagram.csv.meta"));
    CHECK(slurp(a + "/diagram.csv").rfind("# " + config_hash_line(c) + "\n", 0) == 0);

    const Run zero = run_cli({"sweep", "--theta", "0.05", "--eta", "0.176", "--epsilon", "0.005", "--delta-min",
                              "0.2", "--delta-max", "0.7", "--step", "0", "--out", a});
    CHECK(zero.code == 2);
    CHECK(zero.err.find("sweep.step") != std::string::npos);

    const Run clamp = run_cli({"sweep", "--theta", "0.05", "--eta", "0.176", "--epsilon", "0.005", "--delta-min",
                               "0.8", "--delta-max", "0.95", "--step", "0.05", "--refine-levels", "0", "--out", a});
    CHECK(clamp.code == 0);
    CHECK(clamp.err.rfind("warning: ", 0) == 0);
    CHECK(clamp.err.find("clamped") != std::string::npos);
}

TEST_CASE("singular-orbit command") {
    const std::string dir = tmp_dir("gamma0");
    const Run r = run_cli({"singular-orbit", "--theta", "0.05", "--eta", "0.176", "--epsilon", "0.005", "--out", dir});
    REQUIRE(r.code == 0);
    std::ifstream in(dir + "/singular_orbit.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# config-hash: ", 0) == 0);
    std::getline(in, line);
    CHECK(line == "u,v,segment");
    std::vector<std::string> rows;
    std::vector<std::string> tags;
    while (std::getline(in, line)) {
        rows.push_back(line.substr(0, line.rfind(',')));
        const std::string tag = line.substr(line.rfind(',') + 1);
        if (tags.empty() || tags.back() != tag) tags.push_back(tag);
    }
    REQUIRE(rows.size() > 4);
    CHECK(rows.front() == rows.back());
    CHECK(tags == std::vector<std::string>{"l1", "c_r", "l2", "c_l"});

    const Run bad = run_cli({"singular-orbit", "--theta", "0.9", "--eta", "0.9", "--epsilon", "0.005", "--out", dir});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("singular orbit undefined") != std::string::npos);
}

TEST_CASE("exit codes and help") {
    const Run help = run_cli({"sweep", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("[8]") != std::string::npos);
    CHECK(run_cli({"simulate", "--help"}).out.find("rkf78") != std::string::npos);
    CHECK(run_cli({"analyze", "--help"}).out.find("0.0001") != std::string::npos);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    const Run io = run_cli({"analyze", "--delta", "0.4", "--theta", "0.05", "--eta", "0.176", "--epsilon", "0.005",
                            "--out", "/proc/canard-no-such-dir"});
    CHECK(io.code == 4);
}
