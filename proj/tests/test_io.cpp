#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "acsbayes/io.hpp"

using namespace acsbayes;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("acsbayes_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

PopulationGrid small_pop() {
    const GridSpec grid{3, 4};
    std::vector<std::vector<double>> cols{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
                                          {0, 1, 4, 9, 16, 25, 36, 49, 64, 81, 100, 121}};
    PopulationGrid pop;
    pop.grid = grid;
    pop.covariates = make_covariate_field(grid, cols);
    pop.counts = {0, 2, 0, 0, 1, 3, 0, 0, 0, 0, 0, 5};
    pop.rebuild_derived();
    return pop;
}

} // namespace

TEST_CASE("population csv round-trips bit-exactly") {
    TempDir dir;
    const auto pop = small_pop();
    save_population_csv(pop, dir.file("pop.csv"));
    const auto back = load_population_csv(dir.file("pop.csv"));
    CHECK(back.grid.rows == 3);
    CHECK(back.grid.cols == 4);
    CHECK(back.covariates.k == 2);
    CHECK(back.counts == pop.counts);
    CHECK(back.covariates.values == pop.covariates.values);
    CHECK(back.true_total == pop.true_total);

    // second round trip is identical text
    save_population_csv(back, dir.file("pop2.csv"));
    CHECK(read_text_file(dir.file("pop.csv")) == read_text_file(dir.file("pop2.csv")));
}

TEST_CASE("covariates-only file loads with zero counts") {
    TempDir dir;
    write_text_file(dir.file("cov.csv"),
                    "cell_id,row,col,v1\n0,0,0,1.5\n1,0,1,2.5\n2,1,0,-1\n3,1,1,0\n");
    const auto pop = load_population_csv(dir.file("cov.csv"));
    CHECK(pop.grid.rows == 2);
    CHECK(pop.covariates.k == 1);
    CHECK(pop.true_total == 0);
    CHECK_FALSE(pop.usable_for_sampling());
}

TEST_CASE("centering stores offsets") {
    TempDir dir;
    write_text_file(dir.file("cov.csv"),
                    "cell_id,row,col,v1,count\n0,0,0,2,0\n1,0,1,4,1\n");
    const auto pop = load_population_csv(dir.file("cov.csv"), true);
    CHECK(pop.covariates.centering[0] == doctest::Approx(3.0));
    CHECK(pop.covariates.row(0)[1] == doctest::Approx(-1.0));
}

TEST_CASE("schema violations are reported with context") {
    TempDir dir;
    write_text_file(dir.file("bad1.csv"), "x,y\n1,2\n");
    CHECK_THROWS_WITH_AS(load_population_csv(dir.file("bad1.csv")),
                         doctest::Contains("header"), std::runtime_error);
    write_text_file(dir.file("bad2.csv"),
                    "cell_id,row,col,count\n0,0,0,1\n2,0,1,0\n"); // id mismatch
    CHECK_THROWS_AS(load_population_csv(dir.file("bad2.csv")), std::runtime_error);
    write_text_file(dir.file("bad3.csv"),
                    "cell_id,row,col,count\n0,0,0,oops\n");
    CHECK_THROWS_AS(load_population_csv(dir.file("bad3.csv")), std::runtime_error);
    write_text_file(dir.file("bad4.csv"),
                    "cell_id,row,col,count\n0,0,0,1\n"); // 1 row for implied 1x1: fine
    CHECK(load_population_csv(dir.file("bad4.csv")).grid.cell_count() == 1);
    write_text_file(dir.file("bad5.csv"),
                    "cell_id,row,col,count\n0,0,0,1\n3,1,1,0\n"); // missing cells
    CHECK_THROWS_AS(load_population_csv(dir.file("bad5.csv")), std::runtime_error);
}

TEST_CASE("sample log json round-trips") {
    const auto pop = small_pop();
    WeightField w;
    w.stage = 1;
    w.values.assign(12, 1.0);
    const auto log = acs_draw(pop, w, 4, SamplingMode::cluster, 17);
    const auto text = sample_log_to_json(log);
    const auto back = sample_log_from_json(text);
    CHECK(back.draw_count() == log.draw_count());
    CHECK(back.mode == log.mode);
    CHECK(back.m1 == log.m1);
    CHECK(back.observed_total() == log.observed_total());
    for (int i = 0; i < log.draw_count(); ++i) {
        CHECK(back.draws[i].members == log.draws[i].members);
        CHECK(back.draws[i].removed == log.draws[i].removed);
        CHECK(back.draws[i].counts == log.draws[i].counts);
    }
    // selection probability computed from the replayed log is identical
    const LatentState empty;
    CHECK(selection_log_prob(back, empty, pop.grid) ==
          selection_log_prob(log, empty, pop.grid));
}

TEST_CASE("a 391-cell file with two covariates loads as 17x23") {
    TempDir dir;
    std::ostringstream out;
    out << "cell_id,row,col,v1,v2,count\n";
    for (int r = 0; r < 17; ++r)
        for (int c = 0; c < 23; ++c) {
            const int id = r * 23 + c;
            const double logalt = 6.0 + 0.01 * id;
            out << id << ',' << r << ',' << c << ',' << logalt << ','
                << logalt * logalt << ",0\n";
        }
    write_text_file(dir.file("altitude.csv"), out.str());
    const auto pop = load_population_csv(dir.file("altitude.csv"), true);
    CHECK(pop.grid.cell_count() == 391);
    CHECK(pop.covariates.k == 2);
    CHECK(pop.covariates.centering[0] > 0.0);
}

TEST_CASE("format_double round-trips through text") {
    for (double v : {0.1, 1.0 / 3.0, 123456.789, 1e-17, 0.0, 2.5e300}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}
