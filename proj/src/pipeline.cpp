#include "dimgp/pipeline.hpp"
#include "dimgp/hessian_ed.hpp"
#include "dimgp/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace dimgp {

namespace {

std::vector<std::string> resolved_estimators(const RunConfig& cfg) {
    return cfg.estimators.empty() ? default_estimators() : cfg.estimators;
}

const char* selection_name(SelectionScheme s) {
    return s == SelectionScheme::Tournament ? "tournament" : "pareto_tournament";
}

const char* complexity_name(ComplexityMetric m) {
    return m == ComplexityMetric::Size ? "size" : "effective_dimensionality";
}

} // namespace

void RunConfig::validate() const {
    if (data_path.empty()) throw ConfigError("no dataset path given");
    if (format != "auto" && format != "tsv" && format != "csv")
        throw ConfigError("format must be auto, tsv, or csv");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train fraction must be in (0,1)");
    if (sample_points < 1) throw ConfigError("sample points must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    const auto& known = default_estimators();
    for (const auto& name : estimators)
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("unknown estimator '" + name + "'");
    try {
        gp.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("gp config: ") + e.what());
    }
}

FileFormat RunConfig::file_format() const {
    if (format == "tsv") return FileFormat::Tsv;
    if (format == "csv") return FileFormat::Csv;
    return FileFormat::Auto;
}

int RunConfig::effective_threads() const {
    if (sequential) return 1;
    if (threads > 0) return threads;
    const auto hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

json RunConfig::echo() const {
    return json{
        {"data", data_path},
        {"format", format},
        {"target_column", target_column},
        {"train_fraction", train_fraction},
        {"estimators", resolved_estimators(*this)},
        {"id_params",
         {{"k", id_params.k},
          {"lpca_alpha", id_params.lpca_alpha},
          {"corrint_scales", id_params.corrint_scales},
          {"knn_repeats", id_params.knn_repeats},
          {"subsample_seed", id_params.subsample_seed}}},
        {"gp",
         {{"mutation_rate", gp.mutation_rate},
          {"crossover_rate", gp.crossover_rate},
          {"spawn_rate", gp.spawn_rate},
          {"elitism_count", gp.elitism_count},
          {"crossover_method", "two_point"},
          {"tournament_size", gp.tournament_size},
          {"population_size", gp.population_size},
          {"generations", gp.generations},
          {"max_complexity", gp.max_complexity},
          {"max_init_size", gp.max_init_size},
          {"fitness_metric", "one_minus_r_squared"},
          {"selection", selection_name(gp.selection)},
          {"complexity_metric", complexity_name(gp.complexity_metric)}}},
        {"seed", seed},
    };
}

SplitData load_and_split(const RunConfig& cfg) {
    Dataset full = load_dataset(cfg.data_path, cfg.file_format(), cfg.target_column);
    auto [train, test] = train_test_split(full, cfg.train_fraction, cfg.split_seed());
    return {std::move(train), std::move(test), full.dropped_rows};
}

namespace {

namespace fs = std::filesystem;

fs::path out_file(const RunConfig& cfg, const char* name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

IDProfile compute_profile(const RunConfig& cfg, const Dataset& train) {
    return id_profile(train, resolved_estimators(cfg), cfg.id_params,
                      cfg.effective_threads());
}

EvolutionResult run_engine(const RunConfig& cfg, const Dataset& train) {
    GPConfig g = cfg.gp;
    g.seed = cfg.gp_seed();
    g.threads = cfg.effective_threads();
    return evolve(train, g);
}

std::string band_report_csv(const BandReport& r) {
    std::ostringstream out;
    out << "model_id,ed,band,train_fitness,test_fitness,normalized_test_fitness,size\n";
    for (const auto& row : r.rows) {
        out << row.model_id << ',' << row.ed << ',' << band_name(row.band) << ','
            << format_double(row.train_fitness) << ',' << format_double(row.test_fitness)
            << ',' << format_double(row.normalized_test_fitness) << ',' << row.size << '\n';
    }
    return out.str();
}

std::string band_summary_csv(const BandReport& r) {
    std::ostringstream out;
    out << "band,count,median_normalized_fitness,median_stderr\n";
    for (const auto& [name, agg] : r.bands) {
        out << name << ',' << agg.count << ',';
        if (agg.median_normalized_fitness) out << format_double(*agg.median_normalized_fitness);
        out << ',';
        if (agg.median_stderr) out << format_double(*agg.median_stderr);
        out << '\n';
    }
    return out.str();
}

void write_selection_and_report(const RunConfig& cfg, const std::vector<ScoredModel>& front,
                                const IDProfile& profile, const Dataset& train,
                                const Dataset& test) {
    EdCache cache;
    const SelectionResult selection = select_models(front, profile, train, &cache);
    const BandReport report = band_report(front, profile, train, test,
                                          cfg.bootstrap_seed(), &cache);
    write_artifact(out_file(cfg, "selected_models.json"),
                   make_artifact(cfg.echo(), json{{"selection", selection_to_json(selection)}}));
    write_artifact(out_file(cfg, "band_report.json"),
                   make_artifact(cfg.echo(), json{{"report", band_report_to_json(report)}}));
    write_text_atomic(out_file(cfg, "band_report.csv"), band_report_csv(report));
    write_text_atomic(out_file(cfg, "band_summary.csv"), band_summary_csv(report));
}

std::vector<ScoredModel> load_front(const RunConfig& cfg) {
    if (cfg.front_path.empty()) throw ConfigError("no Pareto front file given (--front)");
    return front_from_json(load_json(cfg.front_path).at("front"));
}

IDProfile load_profile(const RunConfig& cfg) {
    if (cfg.profile_path.empty()) throw ConfigError("no ID profile file given (--profile)");
    return profile_from_json(load_json(cfg.profile_path).at("profile"));
}

} // namespace

int cmd_id_profile(const RunConfig& cfg) {
    const SplitData sd = load_and_split(cfg);
    const IDProfile profile = compute_profile(cfg, sd.train);
    write_artifact(out_file(cfg, "id_profile.json"),
                   make_artifact(cfg.echo(), json{{"profile", profile_to_json(profile)}}));
    return 0;
}

int cmd_evolve(const RunConfig& cfg) {
    const SplitData sd = load_and_split(cfg);
    const EvolutionResult evo = run_engine(cfg, sd.train);
    write_artifact(out_file(cfg, "population.json"),
                   make_artifact(cfg.echo(), json{{"population", population_to_json(
                                                                     evo.population,
                                                                     evo.history)}}));
    write_artifact(out_file(cfg, "pareto_front.json"),
                   make_artifact(cfg.echo(),
                                 json{{"front", front_to_json(pareto_front(evo.population))}}));
    return 0;
}

int cmd_select(const RunConfig& cfg) {
    const SplitData sd = load_and_split(cfg);
    write_selection_and_report(cfg, load_front(cfg), load_profile(cfg), sd.train, sd.test);
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const SplitData sd = load_and_split(cfg);
    const auto front = load_front(cfg);
    const auto profile = load_profile(cfg);
    EdCache cache;
    const BandReport report = band_report(front, profile, sd.train, sd.test,
                                          cfg.bootstrap_seed(), &cache);
    write_artifact(out_file(cfg, "band_report.json"),
                   make_artifact(cfg.echo(), json{{"report", band_report_to_json(report)}}));
    write_text_atomic(out_file(cfg, "band_report.csv"), band_report_csv(report));
    write_text_atomic(out_file(cfg, "band_summary.csv"), band_summary_csv(report));
    return 0;
}

int cmd_ed(const RunConfig& cfg, const std::string& model_path) {
    const Dataset d = load_dataset(cfg.data_path, cfg.file_format(), cfg.target_column);
    const json mj = load_json(model_path);
    const StackModel model =
        mj.contains("model") ? model_from_json(mj.at("model")) : model_from_json(mj);
    const HessianEstimate est = effective_dimensionality(model, d);
    write_artifact(out_file(cfg, "hessian_ed.json"),
                   make_artifact(cfg.echo(), json{{"estimate", hessian_to_json(est)}}));
    return 0;
}

int cmd_validate_sampling(const RunConfig& cfg) {
    const SplitData sd = load_and_split(cfg);

    std::vector<StackModel> models;
    if (!cfg.models_path.empty()) {
        const Population pop = population_from_json(load_json(cfg.models_path).at("population"));
        for (const auto& sm : pop.members) models.push_back(sm.model);
    } else {
        const EvolutionResult evo = run_engine(cfg, sd.train);
        for (const auto& sm : evo.population.members) models.push_back(sm.model);
    }
    // one entry per distinct genotype
    std::map<std::string, std::size_t> unique;
    std::vector<StackModel> distinct;
    for (auto& m : models) {
        if (unique.emplace(to_key(m), distinct.size()).second) distinct.push_back(std::move(m));
    }

    struct Row {
        int ed_strategic, ed_random, diff;
    };
    std::vector<Row> rows(distinct.size());
    parallel_for(distinct.size(), cfg.effective_threads(), [&](std::size_t i) {
        const int e3 = effective_dimensionality(distinct[i], sd.train).ed;
        const int er = effective_dimensionality_random(distinct[i], sd.train, cfg.sample_points,
                                                       mix_seed(cfg.sampling_seed(), i))
                           .ed;
        rows[i] = {e3, er, e3 - er};
    });

    int exact = 0, close = 0;
    std::map<std::string, int> histogram;
    for (const auto& r : rows) {
        if (r.diff == 0) ++exact;
        if (std::abs(r.diff) <= 1) ++close;
        ++histogram[std::to_string(r.diff)];
    }
    const double n = static_cast<double>(rows.size());
    json rows_json = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows_json.push_back(json{{"model_id", i},
                                 {"ed_strategic", rows[i].ed_strategic},
                                 {"ed_random", rows[i].ed_random},
                                 {"diff", rows[i].diff}});
    const json payload{{"agreement",
                        {{"n_models", rows.size()},
                         {"sample_points", cfg.sample_points},
                         {"agreement_exact", n > 0 ? exact / n : 0.0},
                         {"agreement_within_1", n > 0 ? close / n : 0.0},
                         {"diff_histogram", histogram},
                         {"rows", rows_json}}}};
    write_artifact(out_file(cfg, "ed_agreement.json"), make_artifact(cfg.echo(), payload));

    std::ostringstream csv;
    csv << "model_id,ed_strategic,ed_random,diff\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        csv << i << ',' << rows[i].ed_strategic << ',' << rows[i].ed_random << ','
            << rows[i].diff << '\n';
    write_text_atomic(out_file(cfg, "ed_agreement.csv"), csv.str());
    return 0;
}

int cmd_run(const RunConfig& cfg) {
    const SplitData sd = load_and_split(cfg);
    const IDProfile profile = compute_profile(cfg, sd.train);
    write_artifact(out_file(cfg, "id_profile.json"),
                   make_artifact(cfg.echo(), json{{"profile", profile_to_json(profile)}}));

    const EvolutionResult evo = run_engine(cfg, sd.train);
    write_artifact(out_file(cfg, "population.json"),
                   make_artifact(cfg.echo(), json{{"population", population_to_json(
                                                                     evo.population,
                                                                     evo.history)}}));
    const auto front = pareto_front(evo.population);
    write_artifact(out_file(cfg, "pareto_front.json"),
                   make_artifact(cfg.echo(), json{{"front", front_to_json(front)}}));

    write_selection_and_report(cfg, front, profile, sd.train, sd.test);
    return 0;
}

int cmd_data_summary(const RunConfig& cfg) {
    const Dataset d = load_dataset(cfg.data_path, cfg.file_format(), cfg.target_column);
    const json doc = make_artifact(cfg.echo(), json{{"summary", dataset_summary_json(d)}});
    std::cout << doc.dump(2) << std::endl;
    return 0;
}

} // namespace dimgp
