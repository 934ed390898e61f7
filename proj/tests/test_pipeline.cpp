#include "dimgp/common.hpp"
#include "dimgp/pipeline.hpp"
#include "dimgp/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace dimgp;
using namespace testsupport;

namespace {

RunConfig small_run(const std::string& data, const std::string& out) {
    RunConfig cfg;
    cfg.data_path = data;
    cfg.out_dir = out;
    cfg.seed = 123;
    cfg.sequential = true;
    cfg.gp.population_size = 60;
    cfg.gp.generations = 8;
    cfg.gp.elitism_count = 5;
    cfg.gp.tournament_size = 10;
    return cfg;
}

std::string make_data(const TempDir& dir) {
    SynthConfig sc;
    sc.kind = SynthKind::Planted;
    sc.formula = "product_sin";
    sc.n = 80;
    sc.ambient_dim = 3;
    sc.noise = 0.05;
    sc.seed = 5;
    const Dataset d = make_synthetic(sc);
    const std::string path = dir.file("data.tsv");
    save_dataset(d, path);
    return path;
}

} // namespace

TEST_SUITE("unit") {

TEST_CASE("RunConfig validation") {
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.validate(), ConfigError); // no data path
    cfg.data_path = "x.tsv";
    CHECK_NOTHROW(cfg.validate());
    cfg.train_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.data_path = "x.tsv";
    cfg.estimators = {"NoSuch"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.data_path = "x.tsv";
    cfg.gp.elitism_count = cfg.gp.population_size;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("cmd_run writes the five artifacts with schema and config echo") {
    TempDir dir("run");
    const std::string data = make_data(dir);
    RunConfig cfg = small_run(data, dir.file("out"));
    REQUIRE(cmd_run(cfg) == 0);
    for (const char* name : {"id_profile.json", "population.json", "pareto_front.json",
                             "selected_models.json", "band_report.json"}) {
        CAPTURE(name);
        const json doc = load_json(dir.file("out") + "/" + name);
        REQUIRE(doc.contains("schema_version"));
        CHECK(doc.at("schema_version") == kSchemaVersion);
        REQUIRE(doc.contains("run_config"));
        CHECK(doc.at("run_config").at("seed") == 123);
        CHECK(doc.at("run_config").at("gp").at("population_size") == 60);
    }
    CHECK(std::filesystem::exists(dir.file("out") + "/band_report.csv"));
    CHECK(std::filesystem::exists(dir.file("out") + "/band_summary.csv"));
}

TEST_CASE("staged subcommands reproduce cmd_run byte for byte") {
    TempDir dir("staged");
    const std::string data = make_data(dir);

    RunConfig combined = small_run(data, dir.file("a"));
    REQUIRE(cmd_run(combined) == 0);

    RunConfig staged = small_run(data, dir.file("b"));
    REQUIRE(cmd_id_profile(staged) == 0);
    REQUIRE(cmd_evolve(staged) == 0);
    staged.front_path = dir.file("b") + "/pareto_front.json";
    staged.profile_path = dir.file("b") + "/id_profile.json";
    REQUIRE(cmd_select(staged) == 0);
    REQUIRE(cmd_report(staged) == 0);

    for (const char* name : {"id_profile.json", "population.json", "pareto_front.json",
                             "selected_models.json", "band_report.json", "band_report.csv",
                             "band_summary.csv"}) {
        CAPTURE(name);
        REQUIRE(read_file(dir.file("a") + "/" + name) ==
                read_file(dir.file("b") + "/" + name));
    }
}

TEST_CASE("cmd_run twice with one seed is byte-identical") {
    TempDir dir("deterministic");
    const std::string data = make_data(dir);
    RunConfig a = small_run(data, dir.file("a"));
    RunConfig b = small_run(data, dir.file("b"));
    REQUIRE(cmd_run(a) == 0);
    REQUIRE(cmd_run(b) == 0);
    for (const char* name : {"id_profile.json", "population.json", "pareto_front.json",
                             "selected_models.json", "band_report.json"})
        REQUIRE(read_file(dir.file("a") + "/" + name) == read_file(dir.file("b") + "/" + name));
}

TEST_CASE("an out-of-reach window yields an empty flagged selection") {
    TempDir dir("empty");
    const std::string data = make_data(dir);
    RunConfig cfg = small_run(data, dir.file("out"));
    REQUIRE(cmd_evolve(cfg) == 0);

    // hand-build a profile whose window no front model can reach
    const json profile_doc = make_artifact(
        cfg.echo(),
        json{{"profile", profile_to_json(make_profile(
                             {{"A", 90.0}, {"B", 110.0}}, {}))}});
    write_artifact(dir.file("out") + "/fake_profile.json", profile_doc);

    cfg.front_path = dir.file("out") + "/pareto_front.json";
    cfg.profile_path = dir.file("out") + "/fake_profile.json";
    REQUIRE(cmd_select(cfg) == 0);
    const json sel = load_json(dir.file("out") + "/selected_models.json");
    CHECK(sel.at("selection").at("no_models_in_ideal_or_close") == true);
    CHECK(sel.at("selection").at("band_used") == "none");
    CHECK(sel.at("selection").at("models").empty());
}

TEST_CASE("validate-sampling emits agreement data") {
    TempDir dir("vs");
    const std::string data = make_data(dir);
    RunConfig cfg = small_run(data, dir.file("out"));
    cfg.sample_points = 10;
    REQUIRE(cmd_validate_sampling(cfg) == 0);
    const json doc = load_json(dir.file("out") + "/ed_agreement.json");
    const auto& agg = doc.at("agreement");
    CHECK(agg.at("n_models").get<int>() > 10);
    CHECK(agg.at("sample_points") == 10);
    CHECK(agg.at("agreement_exact").get<double>() >= 0.0);
    CHECK(agg.at("agreement_within_1").get<double>() >=
          agg.at("agreement_exact").get<double>());
    CHECK(std::filesystem::exists(dir.file("out") + "/ed_agreement.csv"));
}

TEST_CASE("ed subcommand reports a model's Hessian estimate") {
    TempDir dir("ed");
    const std::string data = make_data(dir);
    RunConfig cfg = small_run(data, dir.file("out"));
    const json model = model_to_json(binary_model(OpCode::Mul));
    write_artifact(dir.file("model.json"), model);
    REQUIRE(cmd_ed(cfg, dir.file("model.json")) == 0);
    const json doc = load_json(dir.file("out") + "/hessian_ed.json");
    CHECK(doc.at("estimate").at("ed") == 2);
    CHECK(doc.at("estimate").at("points_used") == 3);
}

TEST_CASE("profile artifact round-trips through JSON") {
    const IDProfile p = make_profile({{"A", 2.0}, {"B", 4.0}}, {{"C", "why"}});
    const IDProfile q = profile_from_json(profile_to_json(p));
    CHECK(q.estimates == p.estimates);
    CHECK(q.failures == p.failures);
    CHECK(q.id_mean == p.id_mean);
    CHECK(q.id_min == p.id_min);
    CHECK(q.id_max == p.id_max);
}

} // TEST_SUITE
