#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hhdp/errors.hpp"
#include "hhdp/fit.hpp"
#include "hhdp/io.hpp"
#include "hhdp/scenarios.hpp"

using namespace hhdp;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("hhdp_io_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HHDP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig quick_config() {
    RunConfig c;
    c.K = c.L = 8;
    c.iterations = 60;
    c.burn_in = 30;
    c.seed = 9;
    return c;
}

}  // namespace

TEST_CASE("grouped CSV parsing") {
    std::istringstream ok("population,value\n1,0.5\n2,-1.0\n");
    const LoadedData d = parse_grouped_csv(ok);
    CHECK(d.data.sizes() == std::vector<std::size_t>{1, 1});
    CHECK(d.data.values[1][0] == -1.0);
    CHECK(d.truth.empty());

    std::istringstream truth("population,value,truth_component\n2,1.5,2\n1,0.25,1\n2,3,1\n");
    const LoadedData t = parse_grouped_csv(truth);
    CHECK(t.data.values[1] == std::vector<double>{1.5, 3.0});
    CHECK(t.truth[1] == std::vector<std::size_t>{1, 0});

    auto err = [](const std::string& text) {
        return message_of([&] {
            std::istringstream in(text);
            parse_grouped_csv(in, "f.csv");
        });
    };
    CHECK(err("population,value\n1,0.5\n3,1\n").find("contiguous") != std::string::npos);
    CHECK(err("population,value\n1,0.5\n2,abc\n").find("f.csv:3") != std::string::npos);
    CHECK(err("population,value\n1\n").find("f.csv:2") != std::string::npos);
    CHECK(err("pop,val\n1,2\n").find("f.csv:1") != std::string::npos);
    CHECK(err("population,value\n0,2\n").find("f.csv:2") != std::string::npos);
    CHECK(err("population,value\n1,nan\n").find("f.csv:2") != std::string::npos);
    CHECK(err("population,value\n").find("no observations") != std::string::npos);
    CHECK_THROWS_AS([] {
        std::istringstream in("population,value\n1,x\n");
        parse_grouped_csv(in);
    }(), DataError);
}

TEST_CASE("grouped CSV round trip") {
    const ScenarioData s = generate(make_scenario(ScenarioId::S1));
    std::stringstream buf;
    write_grouped_csv(buf, s.data, s.truth);
    const LoadedData back = parse_grouped_csv(buf);
    CHECK(back.data.values == s.data.values);
    CHECK(back.truth == s.truth);
}

TEST_CASE("run configuration") {
    const nlohmann::json j = {{"model", "NDP"}, {"alpha", 2.0}, {"nig", {{"mu0", 1}, {"lambda0", 0.5}, {"s0", 2}, {"S0", 3}}},
                              {"K", 10}, {"iterations", 500}, {"burn_in", 100}, {"seed", 4}};
    const RunConfig c = parse_run_config(j);
    CHECK(c.model == Model::NDP);
    CHECK(c.params.alpha == 2.0);
    CHECK(c.nig.has_value());
    CHECK(c.L == 50);
    const nlohmann::json once = to_json(c);
    CHECK(to_json(parse_run_config(once)) == once);
    CHECK(to_json(parse_run_config(nlohmann::json::object())) == to_json(RunConfig{}));
    CHECK(config_hash(c) == config_hash(parse_run_config(once)));
    CHECK(config_hash(c) != config_hash(RunConfig{}));

    CHECK_THROWS_AS(parse_run_config({{"iters", 5}}), UsageError);
    CHECK_THROWS_AS(parse_run_config({{"alpha", "big"}}), UsageError);
    CHECK_THROWS_AS(parse_run_config({{"nig", "fixed"}}), UsageError);
    RunConfig bad;
    bad.burn_in = bad.iterations;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = RunConfig{};
    bad.sampler = SamplerKind::Marginal;
    CHECK_THROWS_AS(bad.validate(3), UsageError);
    CHECK_NOTHROW(bad.validate(2));
    bad.model = Model::NDP;
    CHECK_THROWS_AS(bad.validate(2), UsageError);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("draw records") {
    const ScenarioData s = generate(make_scenario(ScenarioId::S3));
    std::ostringstream out;
    run_fit(s.data, quick_config(), 1, out);
    const std::string text = out.str();
    CHECK(text.back() == '\n');

    std::istringstream in(text);
    const ReadDrawsResult r = read_draws(in);
    CHECK_FALSE(r.truncated_tail);
    CHECK(r.draws.draws.size() == 30);
    CHECK(r.draws.meta.sizes == std::vector<std::size_t>{100, 100});
    CHECK(r.draws.meta.config_hash == config_hash(quick_config()));
    CHECK(r.draws.meta.data_hash == data_hash(s.data));
    const PosteriorDraws direct = run_fit(s.data, quick_config());
    for (std::size_t i = 0; i < direct.draws.size(); ++i) {
        CHECK(ndjson_line(to_json(direct.draws[i])) == ndjson_line(to_json(r.draws.draws[i])));
    }

    // labels are written 1-based
    const auto start = text.find('\n') + 1;
    const auto first = nlohmann::json::parse(text.substr(start, text.find('\n', start) - start));
    for (const auto& v : first.at("z")) CHECK(v.get<int>() >= 1);

    SUBCASE("a torn final line is skipped with a warning") {
        const std::string torn = text.substr(0, text.size() - 40);
        std::istringstream tin(torn);
        std::ostringstream warn;
        const ReadDrawsResult t = read_draws(tin, &warn);
        CHECK(t.truncated_tail);
        CHECK(t.draws.draws.size() == 29);
        CHECK(warn.str().find("incomplete") != std::string::npos);
    }
    SUBCASE("a corrupt interior line is an error naming the line") {
        std::string broken = text;
        const auto pos = broken.find("\"type\":\"draw\"", broken.find('\n'));
        broken.insert(pos, "{{");
        std::istringstream bin(broken);
        const std::string msg = message_of([&] { read_draws(bin); });
        CHECK(msg.find("line 2") != std::string::npos);
    }
    SUBCASE("missing meta record") {
        std::istringstream none(text.substr(text.find('\n') + 1));
        CHECK_THROWS_AS(read_draws(none), DataError);
    }
}

TEST_CASE("multi-chain output is ordered by chain and thread-count free") {
    const ScenarioData s = generate(make_scenario(ScenarioId::S1));
    RunConfig c = quick_config();
    c.chains = 3;
    std::ostringstream a, b;
    run_fit(s.data, c, 1, a);
    run_fit(s.data, c, 3, b);
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    const auto r = read_draws(in);
    REQUIRE(r.draws.draws.size() == 90);
    CHECK(r.draws.draws[0].chain == 0);
    CHECK(r.draws.draws[30].chain == 1);
    CHECK(r.draws.draws[89].chain == 2);
}

TEST_CASE("summary files") {
    const fs::path dir = scratch_dir() / "summary";
    const ScenarioData s = generate(make_scenario(ScenarioId::S2));
    std::ostringstream out;
    run_fit(s.data, quick_config(), 1, out);
    std::istringstream in(out.str());
    const ReadDrawsResult r = read_draws(in);
    SummaryOptions opt;
    opt.grid_points = 11;
    write_summary(r, dir, opt);
    for (const char* f : {"density_pop1.csv", "density_pop2.csv", "cocluster_obs.csv", "cocluster_pop.csv",
                          "ncomp.csv", "vi_partition.json", "report.json"}) {
        CHECK(fs::exists(dir / f));
    }
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report.at("config_hash") == config_hash(quick_config()));
    CHECK(report.at("seed") == 9);
    CHECK(report.contains("homogeneity_probability"));
    std::ifstream dens(dir / "density_pop1.csv");
    std::string line;
    int lines = 0;
    while (std::getline(dens, line)) ++lines;
    CHECK(lines == 12);
    fs::remove_all(dir.parent_path());
}

TEST_CASE("counts CSV") {
    const fs::path dir = scratch_dir();
    std::ofstream(dir / "c.csv") << "d1,d2\n1,0\n0,1\n";
    const GroupedCounts c = load_counts_csv(dir / "c.csv");
    CHECK(c == GroupedCounts({{1, 0}, {0, 1}}));
    std::ofstream(dir / "z.csv") << "1,0\n1,0\n";
    CHECK_THROWS_AS(load_counts_csv(dir / "z.csv"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch_dir() / "cli";
    fs::create_directories(dir);
    const std::string d = dir.string();
    CHECK(run_cli("simulate --scenario S1 --seed 1 --out " + d + "/a.csv") == 0);
    CHECK(run_cli("simulate --scenario S1 --seed 1 --out " + d + "/b.csv") == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

    std::ofstream(dir / "counts.csv") << "1\n1\n";
    const std::string peppf = std::string(HHDP_CLI_PATH) + " peppf --counts " + d + "/counts.csv > " + d + "/p.txt";
    REQUIRE(std::system(peppf.c_str()) == 0);
    CHECK(slurp(dir / "p.txt").find("degeneracy_probability,0.6\n") != std::string::npos);

    CHECK(run_cli("") == 2);
    CHECK(run_cli("simulate") == 2);
    CHECK(run_cli("simulate --scenario S9") == 2);
    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("peppf --counts " + d + "/counts.csv --alpha -1") == 2);
    std::ofstream(dir / "bad.csv") << "population,value\n1,0.5\n3,2\n";
    CHECK(run_cli("fit --data " + d + "/bad.csv") == 3);
    CHECK(run_cli("fit --data " + d + "/missing.csv") == 3);
    std::ofstream(dir / "cfg.json") << R"({"iterations": 10, "burn_in": 20})";
    CHECK(run_cli("fit --data " + d + "/a.csv --config " + d + "/cfg.json") == 2);
    std::ofstream(dir / "d.ndjson") << "not json\n";
    CHECK(run_cli("test-homogeneity --draws " + d + "/d.ndjson") == 3);
    fs::remove_all(dir.parent_path());
}
