#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kneadforge/mesh_io.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() {
    return KNEADFORGE_CLI_PATH;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1)
        return -1;
    return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "kneadforge_cli" / name;
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("unknown subcommand prints usage and exits 2") {
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("") == 2);  // a subcommand is required
}

TEST_CASE("help exits 0") {
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("gen-shape writes a layered cloud") {
    fs::path dir = temp_dir("gen");
    int rc = run_cli("--out " + dir.string() + " gen-shape --geometry B --step 5 --points 64");
    REQUIRE(rc == 0);
    kneadforge::PointCloud cloud = kneadforge::read_cloud(dir / "target.csv", kneadforge::CloudFormat::Csv);
    CHECK(cloud.points.size() == 9 * 64);
    CHECK(cloud.has_layers());
}

TEST_CASE("gen then classify agree with the library") {
    fs::path dir = temp_dir("classify");
    REQUIRE(run_cli("--out " + dir.string() + " gen-shape --geometry E --step 1 --points 200") == 0);
    REQUIRE(run_cli("--out " + dir.string() + " classify --cloud " + (dir / "target.csv").string()) == 0);
    std::string report = slurp(dir / "classification.json");
    CHECK(report.find("non-enveloping") != std::string::npos);
}

TEST_CASE("plan then ideal-pcl chain") {
    fs::path dir = temp_dir("plan");
    REQUIRE(run_cli("--out " + dir.string() + " gen-shape --geometry B --step 1 --points 400") == 0);
    REQUIRE(run_cli("--out " + dir.string() + " plan --cloud " + (dir / "target.csv").string() +
                    " --billet-radius 31 --strategy envelope") == 0);
    std::string program = slurp(dir / "program.json");
    CHECK(program.find("\"strategy\": \"envelope\"") != std::string::npos);
    REQUIRE(run_cli("--out " + dir.string() + " ideal-pcl --program " + (dir / "program.json").string()) == 0);
    kneadforge::PointCloud ideal = kneadforge::read_cloud(dir / "ideal.csv", kneadforge::CloudFormat::Csv);
    CHECK(ideal.points.size() > 1000);
}

TEST_CASE("stage chaining equals the library result byte for byte") {
    fs::path dir_a = temp_dir("chain_a");
    fs::path dir_b = temp_dir("chain_b");
    // run gen-shape twice into two directories; outputs must be identical
    REQUIRE(run_cli("--out " + dir_a.string() + " gen-shape --geometry D --step 2 --points 128") == 0);
    REQUIRE(run_cli("--out " + dir_b.string() + " gen-shape --geometry D --step 2 --points 128") == 0);
    CHECK(slurp(dir_a / "target.csv") == slurp(dir_b / "target.csv"));
}
