#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstring>
#include <string>
#include <vector>

#include "bslab/bslab.h"

namespace {

const char* kScalarA = R"({"kind": "diagonal", "spectrum": [0], "interval": [-1, 2]})";
const char* kRank1C = R"({"kind": "rank_one", "spectrum": [-1, 1], "vector": [0.7071067811865476, 0.7071067811865476], "interval": [-0.9, 0.9]})";

struct Model {
    bslab_model* h = nullptr;
    explicit Model(const char* text) { REQUIRE(bslab_model_from_json(text, &h) == BSLAB_OK); }
    ~Model() { bslab_model_free(h); }
};

}  // namespace

TEST_CASE("version string is exposed") { CHECK(std::string(bslab_version()) == "0.1.0"); }

TEST_CASE("model handle lifecycle") {
    Model m(kRank1C);
    CHECK(bslab_model_dim(m.h) == 2);
    CHECK(bslab_model_dim(nullptr) == 0);
    bslab_model_free(nullptr);
}

TEST_CASE("invalid model JSON reports status 2 and a message") {
    bslab_model* h = reinterpret_cast<bslab_model*>(0x1);
    CHECK(bslab_model_from_json("{\"kind\": \"nope\"}", &h) == BSLAB_INVALID_CONFIG);
    CHECK(h == nullptr);
    CHECK(std::strlen(bslab_last_error()) > 0);
    CHECK(bslab_model_from_json("not json", &h) == BSLAB_INVALID_CONFIG);
    CHECK(bslab_model_from_json(nullptr, &h) == BSLAB_INVALID_HANDLE);
}

TEST_CASE("scalar sandwich matches 1/(s - z) closed form") {
    Model m(kScalarA);
    double out[2];
    REQUIRE(bslab_sandwich(m.h, 0.25, 0.5, 0.1, 0, out) == BSLAB_OK);
    const std::complex<double> expected = 1.0 / (std::complex<double>(0.25, 0.0) - std::complex<double>(0.5, 0.1));
    CHECK(std::abs(out[0] - expected.real()) < 1e-14);
    CHECK(std::abs(out[1] - expected.imag()) < 1e-14);
    double alt[2];
    REQUIRE(bslab_sandwich(m.h, 0.25, 0.5, 0.1, 1, alt) == BSLAB_OK);
    CHECK(std::abs(alt[0] - out[0]) < 1e-13);
    CHECK(bslab_sandwich(m.h, 0.25, 0.5, 0.1, 7, out) == BSLAB_INVALID_CONFIG);
}

TEST_CASE("sandwich on the spectrum is a compute error") {
    Model m(kScalarA);
    double out[2];
    CHECK(bslab_sandwich(m.h, 0.5, 0.5, 0.0, 0, out) == BSLAB_COMPUTE_ERROR);
    CHECK(std::string(bslab_last_error_code()) == "SingularMatrix");
}

TEST_CASE("count and locate agree on rank1-C") {
    Model m(kRank1C);
    const double box[4] = {-3, 3, -3, 3};
    int count = -1;
    REQUIRE(bslab_count_resonances(m.h, 0.5, 0.2, box, &count) == BSLAB_OK);
    CHECK(count == 1);
    double pts[4];
    int mult[2];
    size_t found = 0;
    REQUIRE(bslab_locate(m.h, 0.5, 0.2, box, pts, mult, 2, &found) == BSLAB_OK);
    REQUIRE(found == 1);
    const std::complex<double> z(0.5, 0.2);
    const auto r = (z * z - 1.0) / z;
    CHECK(std::abs(std::complex<double>(pts[0], pts[1]) - r) < 1e-10);
    CHECK(mult[0] == 1);
    found = 0;
    CHECK(bslab_locate(m.h, 0.5, 0.2, box, nullptr, nullptr, 0, &found) == BSLAB_OK);
    CHECK(found == 1);
}

TEST_CASE("bslab_run returns the manifest and the run status") {
    char* manifest = nullptr;
    const std::string cfg = std::string(R"({"command": "validate", "model": )") + kScalarA + "}";
    const std::string out = std::string(P_tmpdir) + "/bslab_test_capi";
    REQUIRE(bslab_run("validate", cfg.c_str(), ".", out.c_str(), 1, 4, 1, &manifest) == BSLAB_OK);
    REQUIRE(manifest != nullptr);
    CHECK(std::string(manifest).find("\"seed\": 4") != std::string::npos);
    bslab_string_free(manifest);

    CHECK(bslab_run("validate", "[", ".", out.c_str(), 0, 0, 1, nullptr) == BSLAB_INVALID_CONFIG);
    CHECK(bslab_run("riesz", cfg.c_str(), ".", out.c_str(), 0, 0, 1, nullptr) == BSLAB_INVALID_CONFIG);
    CHECK(std::string(bslab_last_error_code()) == "InvalidConfig");
}
