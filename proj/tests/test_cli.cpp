#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
    int exit_code = -1;
    std::string out;
};

struct Sandbox {
    fs::path dir;
    Sandbox() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("duffing_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    Run run(const std::string& args) const {
        const fs::path capture = dir / ".stdout";
        const std::string cmd = "cd '" + dir.string() + "' && '" DUFFING_CLI "' " + args + " > '" +
                                capture.string() + "' 2>&1";
        const int status = std::system(cmd.c_str());
        Run r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = read(capture);
        fs::remove(capture);
        return r;
    }

    static std::string read(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::set<std::string> entries() const {
        std::set<std::string> names;
        for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
        return names;
    }
};

double field(const std::string& line, const std::string& key) {
    const auto pos = line.find(key + "=");
    REQUIRE(pos != std::string::npos);
    return std::stod(line.substr(pos + key.size() + 1));
}

std::size_t data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("poincare writes a section with the invocation header") {
    Sandbox box;
    const auto r = box.run("poincare --model sc --gamma 0.138 --beta 0.01 --periods 600 --out res");
    REQUIRE(r.exit_code == 0);
    CHECK(box.entries() == std::set<std::string>{"res"});
    const auto csv = Sandbox::read(box.dir / "res" / "section.csv");
    CHECK(data_rows(csv) == 600);
    CHECK(csv.rfind("# duffing poincare", 0) == 0);
    CHECK(csv.find("\n# seed ") != std::string::npos);
}

TEST_CASE("lyapunov reproduces the periodic classical exponent") {
    Sandbox box;
    const auto r = box.run("lyapunov --model c --gamma 0.3 --out res");
    REQUIRE(r.exit_code == 0);
    CHECK(std::abs(field(r.out, "lambda") + 0.3) < 0.01);
    CHECK(field(r.out, "renorms") >= 100);
    CHECK(r.out.find("class=periodic") != std::string::npos);
    const auto saved = Sandbox::read(box.dir / "res" / "lyapunov.txt");
    CHECK(saved.rfind("# ", 0) == 0);
    CHECK(saved.find(r.out.substr(0, r.out.find('\n'))) != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
    Sandbox a, b;
    const std::string args = "simulate --model sc --gamma 0.138 --beta 0.02 --periods 50 --transient 5 --seed 7 --out res";
    REQUIRE(a.run(args).exit_code == 0);
    REQUIRE(b.run(args).exit_code == 0);
    const auto ta = Sandbox::read(a.dir / "res" / "trajectory.csv");
    CHECK(ta.size() > 1000);
    CHECK(ta == Sandbox::read(b.dir / "res" / "trajectory.csv"));
    REQUIRE(a.run("simulate --model sc --gamma 0.138 --beta 0.02 --periods 50 --transient 5 --seed 8 --out other").exit_code == 0);
    const auto tc = Sandbox::read(a.dir / "other" / "trajectory.csv");
    CHECK(tc.substr(tc.find("\nt,")) != ta.substr(ta.find("\nt,")));
}

TEST_CASE("exit codes separate error classes") {
    Sandbox box;
    const auto usage = box.run("lyapunov --bogus-flag");
    const auto invalid = box.run("lyapunov --gamma -1 --out res");
    std::ofstream(box.dir / "blocker") << "x";
    const auto io = box.run("poincare --periods 200 --out blocker/res");
    const auto numeric = box.run("simulate --model sc5 --beta 0.9 --periods 200 --out res");
    std::ofstream(box.dir / "bad.json") << R"({"gama": [0.1]})";
    const auto config = box.run("sweep --config bad.json --out res");

    CHECK(usage.exit_code == 2);
    CHECK(invalid.exit_code == 3);
    CHECK(io.exit_code == 4);
    CHECK(numeric.exit_code == 5);
    CHECK(config.exit_code == 3);
    CHECK(invalid.out.find("error code=invalid_argument exit=3") != std::string::npos);
    CHECK(io.out.find("code=io") != std::string::npos);
    CHECK(numeric.out.find("code=spread_collapse") != std::string::npos);
    CHECK(config.out.find("code=malformed_config") != std::string::npos);
    // Failed runs leave nothing behind.
    CHECK_FALSE(fs::exists(box.dir / "res"));
}

TEST_CASE("distance, spectra and plotting scripts") {
    Sandbox box;
    auto r = box.run("distance --model sc --beta 0.02 --gammas 0.12,0.138 --periods 600 --out res --gnuplot-script");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("intra_model_mean") != std::string::npos);
    const auto matrix = Sandbox::read(box.dir / "res" / "distance_matrix.csv");
    CHECK(matrix.find("\ngamma,0.12,0.13800000000000001\n") != std::string::npos);
    CHECK(data_rows(matrix) == 2);
    CHECK(fs::exists(box.dir / "res" / "distance_matrix.gp"));

    r = box.run("spectra --model sc --beta 0.02 --periods 600 --against cnc --out spec");
    REQUIRE(r.exit_code == 0);
    const auto spec = Sandbox::read(box.dir / "spec" / "spectrum.csv");
    CHECK(spec.rfind("# duffing spectra", 0) == 0);
    CHECK(data_rows(spec) >= 128);
    CHECK(box.entries() == std::set<std::string>{"res", "spec"});
}

TEST_CASE("sweep then detect") {
    Sandbox box;
    std::ofstream(box.dir / "grid.json") << R"({
        "gamma": [0.12, 0.15],
        "beta": [0.00001, 0.0068, 0.02],
        "models": ["sc"],
        "replicates": 1, "realizations": 1,
        "transient_periods": 10, "measure_periods": 150
    })";
    const auto one = box.run("sweep --config grid.json --threads 1 --quiet --out one");
    const auto two = box.run("sweep --config grid.json --threads 3 --quiet --out two");
    REQUIRE(one.exit_code == 0);
    REQUIRE(two.exit_code == 0);
    const auto csv1 = Sandbox::read(box.dir / "one" / "records.csv");
    const auto csv2 = Sandbox::read(box.dir / "two" / "records.csv");
    CHECK(data_rows(csv1) == 6);
    CHECK(csv1.substr(csv1.find("\nmodel,")) == csv2.substr(csv2.find("\nmodel,")));
    CHECK(fs::exists(box.dir / "one" / "records.csv.manifest.json"));
    CHECK(fs::exists(box.dir / "one" / "sections"));
    for (const auto& e : fs::directory_iterator(box.dir / "one" / "sections")) {
        CHECK(Sandbox::read(e.path()).rfind("# duffing sweep", 0) == 0);
    }

    const auto det = box.run("detect --records one/records.csv --out det");
    REQUIRE(det.exit_code == 0);
    CHECK(det.out.find("beta_chaos") != std::string::npos);
    CHECK(det.out.find("beta_conv") != std::string::npos);
    CHECK(Sandbox::read(box.dir / "det" / "detect.txt").rfind("# duffing detect", 0) == 0);

    // Rerunning against records written with another configuration is refused.
    std::ofstream(box.dir / "grid2.json") << R"({
        "gamma": [0.12], "beta": [0.02], "models": ["sc"], "realizations": 1,
        "transient_periods": 10, "measure_periods": 160
    })";
    const auto clash = box.run("sweep --config grid2.json --quiet --out one");
    CHECK(clash.exit_code == 6);
    CHECK(clash.out.find("code=hash_mismatch") != std::string::npos);
    CHECK(Sandbox::read(box.dir / "one" / "records.csv") == csv1);
}

}  // TEST_SUITE
