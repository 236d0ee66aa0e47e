#include "fixtures.hpp"
#include "support/generators.hpp"

#include <catch_amalgamated.hpp>

using namespace qds;
using namespace qds::testing;

TEST_CASE("fixtures round-trip bit-exactly") {
    for (const char* name : {"id.json", "ad.json", "ad_l.json", "deph.json", "abs3.json"}) {
        INFO(name);
        const QuantumModel m = fixture(name);
        const Json j = model_to_json(m);
        const QuantumModel back = model_from_json(Json::parse(j.dump()));
        CHECK(model_to_json(back).dump() == j.dump());
        CHECK(model_hash(back) == model_hash(m));
    }
}

TEST_CASE("random models round-trip bit-exactly") {
    Rng rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        const QuantumModel m = trial % 2 ? random_kraus_model(3, 2, rng)
                                         : random_lindblad_model(3, 2, rng);
        const QuantumModel back = model_from_json(Json::parse(model_to_json(m).dump()));
        const auto& a = m.discrete() ? m.kraus : m.lindblad;
        const auto& b = back.discrete() ? back.kraus : back.lindblad;
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() == 0.0);
    }
}

TEST_CASE("parse errors name the JSON path") {
    auto error_of = [](const std::string& text) -> std::string {
        try {
            model_from_json(Json::parse(text));
        } catch (const ParseError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(error_of(R"({"kind":"kraus"})").rfind("$: missing field \"dim\"", 0) == 0);
    CHECK(error_of(R"({"dim":2,"kind":"kraus","kraus":[[[[1,0],[0,0]],[[0,0],[1]]]]})")
              .rfind("$.kraus[0][1][1]", 0) == 0);
    CHECK(error_of(R"({"dim":2,"kind":"magic"})").rfind("$.kind", 0) == 0);
    CHECK(error_of(R"({"dim":2,"kind":"stochastic","stochastic":[[1,0],[0,"x"]]})")
              .rfind("$.stochastic[1][1]", 0) == 0);
    CHECK(error_of(R"({"dim":3,"kind":"kraus","kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]})")
              .rfind("$.kraus[0]", 0) == 0);
}

TEST_CASE("report payload round-trips and text rendering uses 6 significant digits") {
    Report r;
    r.command = "demo";
    r.model_hash = "abc";
    r.payload = {{"matrix", matrix_to_json(diag({1.0 / 3.0, 2.0}))}, {"label", "transient"}};
    r.residuals["x"] = 1e-17;
    const Json j = report_to_json(r);
    CHECK(Json::parse(j.dump()) == j);
    CHECK_FALSE(j.contains("timing_ms"));
    const std::string text = report_to_text(r);
    CHECK(text.find("0.333333") != std::string::npos);
    CHECK(text.find("0.3333333") == std::string::npos);
    CHECK(text.find("transient") != std::string::npos);
}
