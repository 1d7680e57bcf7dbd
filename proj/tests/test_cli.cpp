#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "torusflow/experiments.hpp"

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace torusflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("torusflow_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json strip_wall_time(nlohmann::json j) {
    j.erase("wall_time_seconds");
    return j;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(build_config("no-such-experiment", {}, {}), ConfigError);
    CHECK_THROWS_AS(build_config("ns-picard", {{"bogus_key", "1"}}, {}), ConfigError);
    CHECK_THROWS_AS(build_config("rbound", {}, {}), ConfigError);  // family_csv is required

    const auto cfg = build_config("ns-picard", {}, {{"amplitude", "0"}});
    CHECK(cfg.parameters.at("amplitude") == "0");
    CHECK(cfg.parameters.at("N_space") == "16");  // default
    CHECK(cfg.seed == 1);
}

TEST_CASE("config file parsing with comments and overrides") {
    const fs::path dir = fresh_dir("cfg");
    const fs::path file = dir / "run.cfg";
    {
        std::ofstream out(file);
        out << "# picard settings\n";
        out << "N_space = 8\n";
        out << "amplitude = 0   # zero forcing\n";
        out << "seed=9\n";
    }
    const auto values = load_config_file(file.string());
    CHECK(values.at("N_space") == "8");
    CHECK(values.at("amplitude") == "0");

    const auto cfg = build_config("ns-picard", values, {{"seed", "12"}});
    CHECK(cfg.seed == 12);  // override wins
    CHECK(cfg.parameters.at("N_space") == "8");
}

TEST_CASE("ns-picard with zero amplitude converges immediately") {
    const fs::path dir = fresh_dir("picard0");
    auto cfg = build_config(
        "ns-picard", {},
        {{"amplitude", "0"}, {"N_space", "8"}, {"K_time", "4"}, {"output_dir", dir.string()}});
    const RunReport rep = run(cfg);
    CHECK(rep.exit_code == 0);
    CHECK(rep.json["payload"]["converged"].get<bool>());
    CHECK(rep.json["payload"]["iterations"].get<int>() == 1);
    CHECK(rep.json["payload"]["final_residual"].get<double>() < 1e-12);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "picard.csv"));

    std::ifstream csv(dir / "picard.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "iteration,E_norm,diff_ratio");
}

TEST_CASE("identical config and seed give identical numeric payloads") {
    const fs::path dir1 = fresh_dir("det1");
    const fs::path dir2 = fresh_dir("det2");
    for (const char* experiment : {"ns-picard", "kernel-decay"}) {
        std::map<std::string, std::string> overrides = {{"seed", "3"}};
        if (std::string(experiment) == "ns-picard") {
            overrides["N_space"] = "12";
            overrides["K_time"] = "4";
            overrides["amplitude"] = "0.005";
        } else {
            overrides["radii"] = "2,2.83,4,5.66,8";
            overrides["K_time"] = "3";
        }
        overrides["output_dir"] = dir1.string();
        const RunReport a = run(build_config(experiment, {}, overrides));
        overrides["output_dir"] = dir2.string();
        const RunReport b = run(build_config(experiment, {}, overrides));
        auto ja = strip_wall_time(a.json);
        auto jb = strip_wall_time(b.json);
        ja.erase("config");
        jb.erase("config");  // differs only in output_dir
        CAPTURE(experiment);
        CHECK(ja.dump() == jb.dump());
    }
}

TEST_CASE("payloads do not depend on the thread count") {
    const fs::path dir1 = fresh_dir("thr1");
    const fs::path dir2 = fresh_dir("thr2");
    std::map<std::string, std::string> overrides = {{"seed", "4"},
                                                    {"N_space", "8"},
                                                    {"K_time", "2"},
                                                    {"amplitude", "0.004"},
                                                    {"forcing", "random"}};
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    overrides["output_dir"] = dir1.string();
    const RunReport a = run(build_config("ns-picard", {}, overrides));
    omp_set_num_threads(saved);
    overrides["output_dir"] = dir2.string();
    const RunReport b = run(build_config("ns-picard", {}, overrides));
    CHECK(a.json["payload"].dump() == b.json["payload"].dump());
    CHECK(a.json["payload"]["converged"].get<bool>());
}

TEST_CASE("rbound experiment reads a family CSV and reports the estimate") {
    const fs::path dir = fresh_dir("rbound");
    const fs::path csv = dir / "family.csv";
    {
        std::ofstream out(csv);
        out << "op_index,i,j,re,im\n";
        // 2 x 2 identity and a scaled rotation
        out << "0,0,0,1,0\n0,1,1,1,0\n";
        out << "1,0,1,2,0\n1,1,0,-2,0\n";
    }
    auto cfg = build_config("rbound", {},
                            {{"family_csv", csv.string()},
                             {"n_trials", "400"},
                             {"n_max", "3"},
                             {"output_dir", dir.string()}});
    const RunReport rep = run(cfg);
    CHECK(rep.json["payload"]["n_ops"].get<int>() == 2);
    CHECK(rep.json["payload"]["value"].get<double>() >= 1.99);
    CHECK(rep.json["payload"]["seed"].get<std::uint64_t>() == 1);
    CHECK(rep.exit_code == 0);
}

TEST_CASE("moving-domain-check runs the identity collapse path") {
    const fs::path dir = fresh_dir("mdc");
    auto cfg = build_config("moving-domain-check", {},
                            {{"motion", "none"},
                             {"grid_n", "4"},
                             {"n_t", "4"},
                             {"levels", "2"},
                             {"output_dir", dir.string()}});
    const RunReport rep = run(cfg);
    CHECK(rep.exit_code == 0);
    CHECK(rep.json["flags"]["L_vanishes_for_identity_motion"].get<bool>());
    CHECK(fs::exists(dir / "divergence_residuals.csv"));
}

TEST_CASE("emit_plot_data writes one csv per series with stable columns") {
    RunReport rep;
    rep.json["payload"]["series"]["demo"] = {
        {"columns", {"a", "b"}},
        {"rows", {{1, 2.5}, {2, 3.25}}}};
    const fs::path dir = fresh_dir("emit");
    const auto files = emit_plot_data(rep, dir.string());
    REQUIRE(files.size() == 1);
    std::ifstream in(dir / files[0]);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "a,b\n1,2.5\n2,3.25\n");
}
