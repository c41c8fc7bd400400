#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mimoep/sim.hpp"

using namespace mimoep;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.constellation = "qpsk";
    cfg.nt = 2;
    cfg.nr = 2;
    cfg.snr_grid_db = {6.0, 30.0};
    cfg.variants = {"nubep", "lmmse"};
    cfg.code_n = 96;
    cfg.turbo_iters = 1;
    cfg.channels = 2;
    cfg.codewords = 3;
    cfg.seed = 42;
    cfg.threads = 2;
    return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}

std::string strip_wall_time(const std::string& csv_line) {
    return csv_line.substr(0, csv_line.rfind(','));
}

}  // namespace

TEST_CASE("config parsing with sections and comments") {
    std::istringstream in(
        "# experiment\n"
        "[sim]\n"
        "constellation = 16qam\n"
        "nt = 6\n"
        "nr = 6\n"
        "snr_grid_db = 10, 12, 14   ; grid\n"
        "variants = nubep, lmmse\n"
        "[code]\n"
        "code_n = 1008\n"
        "code_seed = 9\n"
        "[turbo]\n"
        "turbo_iters = 5\n"
        "early_exit = false\n"
        "[csi]\n"
        "csi_sigma2 = 0.001\n"
        "csi_compensate = true\n"
        "channels = 4\n"
        "codewords = 7\n"
        "seed = 123\n");
    const ExperimentConfig cfg = parse_config(in);
    CHECK(cfg.constellation == "16qam");
    CHECK(cfg.nt == 6);
    CHECK(cfg.snr_grid_db == std::vector<double>{10, 12, 14});
    CHECK(cfg.variants == std::vector<std::string>{"nubep", "lmmse"});
    CHECK(cfg.code_n == 1008);
    CHECK(cfg.code_seed == 9);
    CHECK(cfg.turbo_iters == 5);
    CHECK_FALSE(cfg.early_exit);
    CHECK(cfg.csi_sigma2 == 0.001);
    CHECK(cfg.csi_compensate);
    CHECK(cfg.channels == 4);
    CHECK(cfg.codewords == 7);
    CHECK(cfg.seed == 123);
    cfg.validate();
}

TEST_CASE("config errors carry line context") {
    {
        std::istringstream in("nt = 4\nbogus_key = 1\n");
        try {
            parse_config(in);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
            CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
        }
    }
    {
        std::istringstream in("nt = four\n");
        try {
            parse_config(in);
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("four") != std::string::npos);
        }
    }
}

TEST_CASE("validation rejects bad geometry with precise messages") {
    ExperimentConfig cfg = tiny_config();
    SUBCASE("non-divisible codeword") {
        cfg.constellation = "16qam";
        cfg.nt = 6;
        cfg.nr = 6;
        cfg.code_n = 1024;  // not divisible by 24
        try {
            cfg.validate();
            FAIL("expected throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("divisible") != std::string::npos);
        }
    }
    SUBCASE("nr < nt") {
        cfg.nr = 1;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("non-increasing snr grid") {
        cfg.snr_grid_db = {10.0, 10.0};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("unknown variant") {
        cfg.variants = {"sphere"};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("zero counts") {
        cfg.channels = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("noiseless point yields zero BER for all variants") {
    ExperimentConfig cfg = tiny_config();
    cfg.snr_grid_db = {60.0};
    cfg.variants = {"nubep", "epd", "mpep", "lmmse"};
    cfg.channels = 1;
    cfg.codewords = 1;
    const ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.records.size() == 4);
    for (const auto& r : res.records) {
        CHECK(r.bit_errors == 0);
        CHECK(r.frame_errors == 0);
        CHECK(r.bits_total == 48);
        CHECK(r.frames_total == 1);
    }
}

TEST_CASE("identical seeds give identical results") {
    const ExperimentConfig cfg = tiny_config();
    const std::string csv_a = "/tmp/mimoep_test_a.csv";
    const std::string csv_b = "/tmp/mimoep_test_b.csv";
    const ExperimentResult a = run_experiment(cfg, csv_a);
    const ExperimentResult b = run_experiment(cfg, csv_b);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].variant == b.records[i].variant);
        CHECK(a.records[i].snr_db == b.records[i].snr_db);
        CHECK(a.records[i].bit_errors == b.records[i].bit_errors);
        CHECK(a.records[i].bits_total == b.records[i].bits_total);
        CHECK(a.records[i].frame_errors == b.records[i].frame_errors);
        CHECK(a.records[i].frames_total == b.records[i].frames_total);
    }
    // CSV identical except the measured wall_time column
    const auto la = read_lines(csv_a);
    const auto lb = read_lines(csv_b);
    REQUIRE(la.size() == lb.size());
    CHECK(la[0] == std::string(kCsvHeader));
    for (std::size_t i = 1; i < la.size(); ++i) CHECK(strip_wall_time(la[i]) == strip_wall_time(lb[i]));
    std::remove(csv_a.c_str());
    std::remove(csv_b.c_str());
}

TEST_CASE("common random numbers: adding a variant never changes another's draws") {
    ExperimentConfig solo = tiny_config();
    solo.variants = {"lmmse"};
    ExperimentConfig both = tiny_config();
    both.variants = {"nubep", "lmmse"};
    const ExperimentResult a = run_experiment(solo);
    const ExperimentResult b = run_experiment(both);
    for (const auto& ra : a.records) {
        bool found = false;
        for (const auto& rb : b.records) {
            if (rb.variant == "lmmse" && rb.snr_db == ra.snr_db) {
                CHECK(rb.bit_errors == ra.bit_errors);
                CHECK(rb.frame_errors == ra.frame_errors);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("thread count does not change results") {
    ExperimentConfig cfg = tiny_config();
    cfg.snr_grid_db = {8.0};
    cfg.channels = 3;
    cfg.codewords = 4;
    cfg.threads = 1;
    const ExperimentResult a = run_experiment(cfg);
    cfg.threads = 4;
    const ExperimentResult b = run_experiment(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
        CHECK(a.records[i].bit_errors == b.records[i].bit_errors);
}

TEST_CASE("per-iteration records") {
    ExperimentConfig cfg = tiny_config();
    cfg.record_per_iteration = true;
    cfg.snr_grid_db = {8.0};
    const ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.iter_records.size() == cfg.variants.size() * 2u);  // T+1 = 2 per variant
    for (const auto& ir : res.iter_records) CHECK(ir.bits_total == res.records[0].bits_total);
}

TEST_CASE("plot data emission") {
    std::vector<BerRecord> recs;
    for (const char* v : {"nubep", "lmmse", "mpep"}) {
        for (double snr : {14.0, 10.0, 12.0}) {  // deliberately unsorted
            BerRecord r;
            r.variant = v;
            r.snr_db = snr;
            r.bit_errors = snr == 14.0 ? 0 : 25;  // exercise the ber=0 row
            r.bits_total = 1000;
            r.frames_total = 10;
            recs.push_back(r);
        }
    }
    const auto paths = emit_plot_data(recs, "/tmp/mimoep_plot");
    CHECK(paths.size() == 3);
    for (const auto& p : paths) {
        const auto lines = read_lines(p);
        REQUIRE(lines.size() == 4);  // comment + 3 points
        CHECK(lines[0] == "# snr_db ber");
        double prev = -1e30;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            std::istringstream is(lines[i]);
            double snr, ber;
            is >> snr >> ber;
            CHECK(snr > prev);
            prev = snr;
            CHECK(ber == (snr == 14.0 ? 0.0 : 0.025));
        }
        std::remove(p.c_str());
    }
}

TEST_CASE("csv row format") {
    BerRecord r;
    r.variant = "nubep";
    r.snr_db = 22.5;
    r.bit_errors = 7;
    r.bits_total = 4032;
    r.frame_errors = 1;
    r.frames_total = 8;
    r.wall_time_s = 1.25;
    CHECK(csv_row(r) == "nubep,22.5,7,4032,1,8,1.250000");
}
