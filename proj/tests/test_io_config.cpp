#include <doctest.h>

#include <filesystem>
#include <string>

#include "sqzmem/config.hpp"
#include "sqzmem/content_hash.hpp"
#include "sqzmem/dataset_io.hpp"
#include "sqzmem/errors.hpp"

using namespace sqzmem;

namespace {

std::size_t csv_error_line(const std::string& text) {
    try {
        parse_quadrature_csv(text);
    } catch (const MalformedCsvError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("quadrature CSV round trip is exact") {
    std::vector<QuadratureRecord> recs{{0.0, 1.25}, {0.1, -3.0e-7}, {3.1415926, 0.1 + 0.2}, {1.0 / 3.0, -2.0 / 7.0}};
    const auto text = quadrature_csv(recs);
    CHECK(text.rfind("phase_rad,quadrature_snl\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    const auto back = parse_quadrature_csv(text);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].phase == recs[i].phase);
        CHECK(back[i].value == recs[i].value);
    }
    CHECK(quadrature_csv(back) == text);
}

TEST_CASE("malformed CSV reports the offending line") {
    CHECK(csv_error_line("") == 1);
    CHECK(csv_error_line("phase,value\n0.1,0.2\n") == 1);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n0.1,0.2\n0.2\n") == 3);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n0.1,0.2,0.3\n") == 2);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n0.1,abc\n") == 2);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n0.1,0.2\n\n0.3,0.1\n") == 3);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n0.1,0.2\n3.5,0.1\n") == 3);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n-0.1,0.2\n") == 2);
    CHECK(csv_error_line("phase_rad,quadrature_snl\n0.1,nan\n") == 2);
    // CRLF and a missing final newline are tolerated.
    CHECK(parse_quadrature_csv("phase_rad,quadrature_snl\r\n0.5,1\r\n0.6,2").size() == 2);
    CHECK(parse_quadrature_csv("phase_rad,quadrature_snl\n").empty());
}

TEST_CASE("file IO errors") {
    CHECK_THROWS_AS(read_text_file("/nonexistent/dir/file.csv"), IoError);
    CHECK_THROWS_AS(load_quadrature_csv("/nonexistent/file.csv"), IoError);
    const auto dir = std::filesystem::temp_directory_path() / "sqzmem_io_test";
    write_text_file(dir / "sub" / "a.csv", "phase_rad,quadrature_snl\n0.25,0.5\n");
    const auto recs = load_quadrature_csv(dir / "sub" / "a.csv");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].value == 0.5);
    std::filesystem::remove_all(dir);
}

TEST_CASE("git blob hash matches known object ids") {
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST_CASE("other CSV writers") {
    CHECK(variance_trace_csv(std::vector<VarianceTracePoint>{{0.5, 1.0}}) == "time_us,variance_snl\n0.5,1\n");
    CHECK(columns_csv({"a", "b"}, {{1, 2}, {3, 4}}) == "a,b\n1,3\n2,4\n");
    CHECK_THROWS_AS(columns_csv({"a", "b"}, {{1, 2}, {3}}), InvalidParameterError);
    const std::vector<double> xs{0, 1}, ps{5};
    CHECK(wigner_csv(xs, ps, std::vector<double>{0.25, 0.5}) == "x,p,W\n0,5,0.25\n1,5,0.5\n");
}

TEST_CASE("default config validates and round-trips") {
    const RunConfig def;
    CHECK_NOTHROW(def.validate());
    const auto text = to_json(def);
    const auto parsed = run_config_from_json(text);
    CHECK(to_json(parsed) == text);
    CHECK(parsed.timing.calib_start_us == 1.4);
    CHECK(parsed.timing.calib_end_us == 2.0);
    CHECK(parsed.tomography.options().dim == 20);
    CHECK(!parsed.tomography.options().binned.has_value());
}

TEST_CASE("non-default config round-trips") {
    const auto cfg = run_config_from_json(R"({
        "source": {"squeezing_db": 1.5, "phase_rad": 0.3},
        "channel": {"delta_2photon_mhz": 0.384, "tau_storage_us": 1.5},
        "timing": {"storage_duration_us": 1.5, "calib_window_us": [1.6, 2.4], "retrieval_window_us": 5.0,
                   "shots": 5000, "sweep_shots": 2000},
        "tomography": {"dim": 15, "binning": "off", "bootstrap_resamples": 0},
        "seed": 18446744073709551615,
        "output_dir": "run"
    })");
    CHECK(cfg.source.squeezing_db == 1.5);
    CHECK(cfg.source.antisqueezing_db == 5.38);
    CHECK(cfg.seed == 18446744073709551615ULL);
    CHECK(cfg.tomography.options().binned == false);
    const auto again = run_config_from_json(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(run_config_from_json("{"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"sead": 1})"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"channel": {"eta": 0.2}})"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"timing": {"shots": "many"}})"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"timing": {"calib_window_us": [1.4]}})"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"tomography": {"binning": "sometimes"}})"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"tomography": {"dim": 40}})"), ConfigError);
    // Storage time must agree between channel and timing sections.
    CHECK_THROWS_AS(run_config_from_json(R"({"channel": {"tau_storage_us": 2.0}})"), ConfigError);
    // Section validators keep their own error classes.
    CHECK_THROWS_AS(run_config_from_json(R"({"channel": {"eta_ref": 1.5}})"), Error);
    CHECK_THROWS_AS(run_config_from_json(R"({"timing": {"calib_window_us": [0.5, 2.0]}})"),
                    ConfigInconsistencyError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), IoError);
}
