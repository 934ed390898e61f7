#include "dimgp/pipeline.hpp"
#include "dimgp/synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

void print_error(const char* type, const std::string& message) {
    dimgp::json err{{"error", {{"type", type}, {"message", message}}}};
    std::cerr << err.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stack-based symbolic regression with intrinsic-dimension informed "
                 "model selection"};
    app.require_subcommand(1);

    dimgp::RunConfig cfg;
    std::string model_path;
    std::string selection = "tournament";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data_path, "Dataset file (delimited text with header)")
            ->required();
        sub->add_option("--format", cfg.format, "Input format: auto, tsv, or csv");
        sub->add_option("--target-col", cfg.target_column, "Target column name");
        sub->add_option("--seed", cfg.seed, "Master seed for all stages");
        sub->add_option("--out", cfg.out_dir, "Output directory for artifacts");
        sub->add_option("--train-fraction", cfg.train_fraction,
                        "Fraction of rows in the training split");
        sub->add_flag("--sequential", cfg.sequential, "Single-threaded execution");
        sub->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)");
        sub->set_config("--config", "", "Flat key=value configuration file");
    };
    auto add_gp = [&](CLI::App* sub) {
        sub->add_option("--generations", cfg.gp.generations, "Number of generations");
        sub->add_option("--pop-size", cfg.gp.population_size, "Population size");
        sub->add_option("--tournament-size", cfg.gp.tournament_size, "Tournament size");
        sub->add_option("--elitism", cfg.gp.elitism_count, "Elite copies per generation");
        sub->add_option("--max-complexity", cfg.gp.max_complexity,
                        "Combined stack length limit");
        sub->add_option("--selection", selection,
                        "Selection scheme: tournament, pareto, or pareto-ed")
            ->check(CLI::IsMember({"tournament", "pareto", "pareto-ed"}));
    };
    auto add_estimators = [&](CLI::App* sub) {
        sub->add_option("--estimators", cfg.estimators,
                        "Estimator subset (default: full suite)")
            ->delimiter(',');
        sub->add_option("--knn-k", cfg.id_params.k, "Neighbor count for local estimators");
    };

    auto* profile_cmd = app.add_subcommand("id-profile", "Estimate the dataset ID window");
    add_common(profile_cmd);
    add_estimators(profile_cmd);

    auto* evolve_cmd = app.add_subcommand("evolve", "Evolve models and extract the Pareto front");
    add_common(evolve_cmd);
    add_gp(evolve_cmd);

    auto* select_cmd = app.add_subcommand(
        "select", "Select front models inside the ID window; writes the band report too");
    add_common(select_cmd);
    select_cmd->add_option("--front", cfg.front_path, "pareto_front.json from evolve")->required();
    select_cmd->add_option("--profile", cfg.profile_path, "id_profile.json from id-profile")
        ->required();

    auto* report_cmd = app.add_subcommand("report", "Band report for an existing front");
    add_common(report_cmd);
    report_cmd->add_option("--front", cfg.front_path, "pareto_front.json from evolve")->required();
    report_cmd->add_option("--profile", cfg.profile_path, "id_profile.json from id-profile")
        ->required();

    auto* ed_cmd = app.add_subcommand("ed", "Effective dimensionality of one model");
    add_common(ed_cmd);
    ed_cmd->add_option("--model", model_path, "Model JSON file")->required();

    auto* validate_cmd = app.add_subcommand(
        "validate-sampling", "Compare 3-point EDs against n random-point EDs");
    add_common(validate_cmd);
    add_gp(validate_cmd);
    validate_cmd->add_option("--models", cfg.models_path,
                             "population.json to analyze (default: evolve in place)");
    validate_cmd->add_option("--points", cfg.sample_points, "Random sample size");

    auto* run_cmd = app.add_subcommand("run", "Full pipeline: profile, evolve, select, report");
    add_common(run_cmd);
    add_gp(run_cmd);
    add_estimators(run_cmd);

    auto* summary_cmd = app.add_subcommand("data-summary", "Print dataset summary JSON");
    add_common(summary_cmd);

    dimgp::SynthConfig synth_cfg;
    std::string synth_kind = "planted";
    std::string synth_out = "synthetic.tsv";
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->add_option("--kind", synth_kind, "line, plane, planted, or embedded");
    synth_cmd->add_option("--n", synth_cfg.n, "Number of rows");
    synth_cmd->add_option("--dim", synth_cfg.ambient_dim, "Feature count");
    synth_cmd->add_option("--latent-dim", synth_cfg.latent_dim, "Latent dimension (embedded)");
    synth_cmd->add_option("--noise", synth_cfg.noise, "Target noise stddev");
    synth_cmd->add_option("--jitter", synth_cfg.jitter, "Feature jitter stddev");
    synth_cmd->add_option("--formula", synth_cfg.formula,
                          "linear, product, product_sin, sum_squares, or mixed");
    synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed");
    synth_cmd->add_option("--out-file", synth_out, "Output dataset path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (selection == "pareto") {
        cfg.gp.selection = dimgp::SelectionScheme::ParetoTournament;
        cfg.gp.complexity_metric = dimgp::ComplexityMetric::Size;
    } else if (selection == "pareto-ed") {
        cfg.gp.selection = dimgp::SelectionScheme::ParetoTournament;
        cfg.gp.complexity_metric = dimgp::ComplexityMetric::EffectiveDim;
    }

    try {
        if (synth_cmd->parsed()) {
            synth_cfg.kind = dimgp::synth_kind_from_name(synth_kind);
            const dimgp::Dataset d = dimgp::make_synthetic(synth_cfg);
            dimgp::save_dataset(d, synth_out);
            std::cout << dimgp::dataset_summary_json(d).dump(2) << std::endl;
            return 0;
        }
        cfg.validate();
        if (profile_cmd->parsed()) return dimgp::cmd_id_profile(cfg);
        if (evolve_cmd->parsed()) return dimgp::cmd_evolve(cfg);
        if (select_cmd->parsed()) return dimgp::cmd_select(cfg);
        if (report_cmd->parsed()) return dimgp::cmd_report(cfg);
        if (ed_cmd->parsed()) return dimgp::cmd_ed(cfg, model_path);
        if (validate_cmd->parsed()) return dimgp::cmd_validate_sampling(cfg);
        if (run_cmd->parsed()) return dimgp::cmd_run(cfg);
        if (summary_cmd->parsed()) return dimgp::cmd_data_summary(cfg);
    } catch (const dimgp::ConfigError& e) {
        print_error("config", e.what());
        return 2;
    } catch (const dimgp::DataError& e) {
        print_error("data", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
    return 0;
}
