#include "dimgp/json_io.hpp"
#include "dimgp/common.hpp"

#include <fstream>

namespace dimgp {

json model_to_json(const StackModel& m) {
    json ops = json::array();
    for (OpCode op : m.ops) ops.push_back(op_name(op));
    json operands = json::array();
    for (const auto& o : m.operands) {
        if (o.kind == Operand::Kind::Feature)
            operands.push_back("x" + std::to_string(o.feature));
        else
            operands.push_back(o.value);
    }
    return json{{"ops", std::move(ops)}, {"operands", std::move(operands)}};
}

StackModel model_from_json(const json& j, int max_complexity) {
    StackModel m;
    for (const auto& el : j.at("ops")) m.ops.push_back(op_from_name(el.get<std::string>()));
    for (const auto& el : j.at("operands")) {
        if (el.is_string()) {
            const std::string s = el.get<std::string>();
            if (s.size() < 2 || s[0] != 'x')
                throw DataError("bad operand token '" + s + "'");
            m.operands.push_back(Operand::make_feature(std::stoi(s.substr(1))));
        } else if (el.is_number()) {
            m.operands.push_back(Operand::make_constant(el.get<double>()));
        } else {
            throw DataError("operand must be a number or 'x<i>' string");
        }
    }
    validate_model(m, max_complexity);
    return m;
}

json scored_to_json(const ScoredModel& m) {
    json j{{"model", model_to_json(m.model)},
           {"train_fitness", m.train_fitness},
           {"size", m.size}};
    if (m.ed) j["ed"] = *m.ed;
    else j["ed"] = nullptr;
    return j;
}

ScoredModel scored_from_json(const json& j) {
    ScoredModel m;
    m.model = model_from_json(j.at("model"));
    m.train_fitness = j.at("train_fitness").get<double>();
    m.size = j.at("size").get<int>();
    if (j.contains("ed") && !j.at("ed").is_null()) m.ed = j.at("ed").get<int>();
    return m;
}

json population_to_json(const Population& pop, const std::vector<GenStats>& history) {
    json members = json::array();
    for (const auto& m : pop.members) members.push_back(scored_to_json(m));
    json hist = json::array();
    for (const auto& h : history)
        hist.push_back(json{{"generation", h.generation},
                            {"best_fitness", h.best_fitness},
                            {"median_fitness", h.median_fitness}});
    return json{{"generation", pop.generation},
                {"members", std::move(members)},
                {"history", std::move(hist)}};
}

Population population_from_json(const json& j) {
    Population pop;
    pop.generation = j.at("generation").get<int>();
    for (const auto& el : j.at("members")) pop.members.push_back(scored_from_json(el));
    return pop;
}

json front_to_json(const std::vector<ScoredModel>& front) {
    json arr = json::array();
    for (const auto& m : front) arr.push_back(scored_to_json(m));
    return arr;
}

std::vector<ScoredModel> front_from_json(const json& j) {
    std::vector<ScoredModel> front;
    for (const auto& el : j) front.push_back(scored_from_json(el));
    return front;
}

json profile_to_json(const IDProfile& p) {
    return json{{"estimates", p.estimates}, {"failures", p.failures},
                {"id_mean", p.id_mean},     {"id_stdev", p.id_stdev},
                {"id_min", p.id_min},       {"id_max", p.id_max}};
}

IDProfile profile_from_json(const json& j) {
    IDProfile p;
    p.estimates = j.at("estimates").get<std::map<std::string, double>>();
    p.failures = j.at("failures").get<std::map<std::string, std::string>>();
    p.id_mean = j.at("id_mean").get<double>();
    p.id_stdev = j.at("id_stdev").get<double>();
    p.id_min = j.at("id_min").get<double>();
    p.id_max = j.at("id_max").get<double>();
    return p;
}

json hessian_to_json(const HessianEstimate& h) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < h.h_bar.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < h.h_bar.cols(); ++j) row.push_back(h.h_bar(i, j));
        rows.push_back(std::move(row));
    }
    json sv = json::array();
    for (Eigen::Index i = 0; i < h.singular_values.size(); ++i)
        sv.push_back(h.singular_values(i));
    return json{{"h_bar", std::move(rows)},
                {"points_used", h.points_used},
                {"entry_failures", h.entry_failures},
                {"singular_values", std::move(sv)},
                {"ed", h.ed},
                {"per_point_ranks", h.per_point_ranks}};
}

json selection_to_json(const SelectionResult& s) {
    json models = json::array();
    for (const auto& m : s.models) models.push_back(scored_to_json(m));
    return json{{"band_used", s.empty ? "none" : band_name(s.band_used)},
                {"fallback", s.fallback},
                {"no_models_in_ideal_or_close", s.empty},
                {"models", std::move(models)}};
}

json band_report_to_json(const BandReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back(json{{"model_id", row.model_id},
                            {"ed", row.ed},
                            {"band", band_name(row.band)},
                            {"train_fitness", row.train_fitness},
                            {"test_fitness", row.test_fitness},
                            {"normalized_test_fitness", row.normalized_test_fitness},
                            {"size", row.size},
                            {"expr", row.infix}});
    }
    json bands = json::object();
    for (const auto& [name, agg] : r.bands) {
        json b{{"count", agg.count}};
        b["median_normalized_fitness"] =
            agg.median_normalized_fitness ? json(*agg.median_normalized_fitness) : json(nullptr);
        b["median_stderr"] = agg.median_stderr ? json(*agg.median_stderr) : json(nullptr);
        bands[name] = std::move(b);
    }
    json tests = json::object();
    for (const auto& [name, t] : r.pairwise_tests) {
        json tj;
        tj["u"] = t.u ? json(*t.u) : json(nullptr);
        tj["p"] = t.p ? json(*t.p) : json(nullptr);
        tj["significant"] = t.significant;
        tests[name] = std::move(tj);
    }
    return json{{"rows", std::move(rows)}, {"bands", std::move(bands)},
                {"tests", std::move(tests)}};
}

json dataset_summary_json(const Dataset& d) {
    return json{{"name", d.name},
                {"n_rows", d.n_rows()},
                {"n_features", d.n_features()},
                {"dropped_rows", d.dropped_rows},
                {"feature_names", d.feature_names}};
}

json make_artifact(const json& run_config_echo, json payload) {
    json doc{{"schema_version", kSchemaVersion}, {"run_config", run_config_echo}};
    for (auto& [key, value] : payload.items()) doc[key] = std::move(value);
    return doc;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.parent_path() / (".tmp." + path.filename().string());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

void write_artifact(const std::filesystem::path& path, const json& doc) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DataError("bad JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

} // namespace dimgp
