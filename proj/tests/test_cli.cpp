#include "fixtures.hpp"
#include "qds/cli.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>
#include <vector>

using namespace qds;
using namespace qds::testing;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "qds");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string op(const std::string& name) { return fixture_path("operators/" + name); }

} // namespace

TEST_CASE("check on the damping fixture") {
    const Run r = run({"check", fixture_path("ad.json")});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["command"] == "check");
    CHECK(j["payload"]["ok"] == true);
    CHECK(j["seed"] == kDefaultSeed);
    CHECK(j.contains("timing_ms"));
}

TEST_CASE("resolve on the absorbing chain") {
    const Run r = run({"resolve", fixture_path("abs3.json")});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["payload"]["recurrent_projections"].size() == 2);
    CHECK(j["payload"]["classical"]["agree"] == true);
}

TEST_CASE("negative time is rejected with exit code 2") {
    const Run r = run({"evolve", fixture_path("deph.json"), op("sigma_x.json"), "--t", "-1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("negative time") != std::string::npos);
}

TEST_CASE("strict mode gates on the verdict") {
    CHECK(run({"classify", fixture_path("ad.json"), op("p01.json")}).code == 0);
    CHECK(run({"classify", fixture_path("ad.json"), op("p01.json"), "--strict"}).code == 1);
    CHECK(run({"classify", fixture_path("ad.json"), op("p10.json"), "--strict"}).code == 0);
    CHECK(run({"ergodic", fixture_path("deph.json"), "--strict"}).code == 1);
}

TEST_CASE("classification report fields") {
    const Run r = run({"classify", fixture_path("ad.json"), op("p10.json")});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["payload"]["classification"]["label"] == "positive_recurrent");
    CHECK(j["payload"]["complement"]["transient"] == true);
}

TEST_CASE("evolve, picard and ergodic commands") {
    const Run e = run({"evolve", fixture_path("ad.json"), op("p10.json"), "--n", "2"});
    REQUIRE(e.code == 0);
    const Matrix v = matrix_from_json(Json::parse(e.out)["payload"]["result"]);
    CHECK(std::abs(v(1, 1) - 0.75) < 1e-15);
    const Run s = run({"evolve", fixture_path("ad.json"), op("p01.json"), "--n", "1", "--picture",
                       "schrodinger"});
    REQUIRE(s.code == 0);
    const Matrix w = matrix_from_json(Json::parse(s.out)["payload"]["result"]);
    CHECK(std::abs(w(0, 0) - 0.5) < 1e-15);

    const Run p = run({"picard", fixture_path("ad_l.json"), op("p10.json"), "--t", "1"});
    REQUIRE(p.code == 0);
    const Json pj = Json::parse(p.out);
    CHECK(pj["payload"]["trace"].size() >= 2);
    CHECK(pj["residuals"]["exponential_difference"].get<double>() < 1e-6);

    const Run g = run({"ergodic", fixture_path("ad.json")});
    REQUIRE(g.code == 0);
    CHECK(Json::parse(g.out)["payload"]["strong_ergodicity"]["holds"] == true);
}

TEST_CASE("structural errors exit with 2") {
    CHECK(run({"check", fixture_path("missing.json")}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"evolve", fixture_path("ad.json"), op("p100.json"), "--n", "1"}).code == 2);
}

TEST_CASE("text format") {
    const Run r = run({"resolve", fixture_path("abs3.json"), "--format", "text"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("positive_recurrent") != std::string::npos);
    CHECK(r.out.find("command: resolve") != std::string::npos);
}

TEST_CASE("reports are reproducible for a fixed seed") {
    const Run a = run({"resolve", fixture_path("id.json"), "--seed", "1", "--no-timing"});
    const Run b = run({"resolve", fixture_path("id.json"), "--seed", "1", "--no-timing"});
    const Run c = run({"resolve", fixture_path("id.json"), "--seed", "2", "--no-timing"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
}
