#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chasd/eval.hpp"
#include "chasd/runner.hpp"
#include "chasd/trace_io.hpp"

namespace {

using chasd::DataError;
using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Flags shared by run and sweep. A flag given on the command line overrides
// the corresponding config-file key.
struct Overrides {
    double alpha = 0, beta = 0, tau = 0, k = 0, sigma = 0, temperature = 0;
    int max_len = 0, embed_dim = 0, heads = 0, vocab = 0;
    std::uint64_t seed = 0, backend_seed = 0;
    std::string mode, grid;

    CLI::Option* alpha_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* tau_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* mode_opt = nullptr;
    CLI::Option* temperature_opt = nullptr;
    CLI::Option* max_len_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* backend_seed_opt = nullptr;
    CLI::Option* vocab_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    CLI::Option* embed_dim_opt = nullptr;
    CLI::Option* heads_opt = nullptr;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
    o.alpha_opt = cmd->add_option("--alpha", o.alpha, "Contrastive strength");
    o.beta_opt = cmd->add_option("--beta", o.beta, "Candidate-set ratio");
    o.tau_opt = cmd->add_option("--tau", o.tau, "Confidence gate threshold");
    o.k_opt = cmd->add_option("--k", o.k, "Fraction of visual tokens perturbed");
    o.sigma_opt = cmd->add_option("--sigma", o.sigma, "Noise standard deviation");
    o.mode_opt = cmd->add_option("--mode", o.mode, "Token selection: greedy or sample")
                     ->check(CLI::IsMember({"greedy", "sample"}));
    o.temperature_opt =
        cmd->add_option("--temperature", o.temperature, "Sampling temperature");
    o.max_len_opt = cmd->add_option("--max-len", o.max_len, "Maximum decode length");
    o.seed_opt = cmd->add_option("--seed", o.seed, "Run seed");
    o.backend_seed_opt =
        cmd->add_option("--backend-seed", o.backend_seed, "Backend weight seed");
    o.vocab_opt = cmd->add_option("--vocab", o.vocab, "Vocabulary size");
    o.grid_opt = cmd->add_option("--grid", o.grid, "Patch grid as ROWSxCOLS, e.g. 4x4");
    o.embed_dim_opt = cmd->add_option("--embed-dim", o.embed_dim, "Embedding width");
    o.heads_opt = cmd->add_option("--heads", o.heads, "Attention head count");
}

void apply_overrides(chasd::RunConfig& cfg, const Overrides& o) {
    if (o.alpha_opt->count()) cfg.decoder.alpha = o.alpha;
    if (o.beta_opt->count()) cfg.decoder.beta = o.beta;
    if (o.tau_opt->count()) cfg.decoder.tau = o.tau;
    if (o.k_opt->count()) cfg.decoder.k = o.k;
    if (o.sigma_opt->count()) cfg.decoder.sigma = o.sigma;
    if (o.mode_opt->count()) {
        cfg.decoder.mode = o.mode == "greedy" ? chasd::SamplingMode::kGreedy
                                              : chasd::SamplingMode::kSample;
    }
    if (o.temperature_opt->count()) cfg.decoder.temperature = o.temperature;
    if (o.max_len_opt->count()) cfg.decoder.max_len = o.max_len;
    if (o.seed_opt->count()) cfg.decoder.seed = o.seed;
    if (o.backend_seed_opt->count()) cfg.backend.seed = o.backend_seed;
    if (o.vocab_opt->count()) cfg.backend.vocab_size = o.vocab;
    if (o.grid_opt->count()) {
        const auto x = o.grid.find('x');
        int rows = 0, cols = 0;
        try {
            rows = std::stoi(o.grid.substr(0, x));
            cols = std::stoi(o.grid.substr(x + 1));
        } catch (...) {
            rows = 0;
        }
        if (x == std::string::npos || rows < 1 || cols < 1) {
            throw DataError("--grid must look like ROWSxCOLS, e.g. 4x4");
        }
        cfg.backend.geometry.grid_rows = rows;
        cfg.backend.geometry.grid_cols = cols;
    }
    if (o.embed_dim_opt->count()) cfg.backend.embed_dim = o.embed_dim;
    if (o.heads_opt->count()) cfg.backend.head_count = o.heads;
    // Round-trip through the parser to re-run every range check.
    cfg = chasd::parse_config(chasd::serialize_config(cfg));
}

chasd::RunConfig load_config(const std::string& config_path, const Overrides& o) {
    chasd::RunConfig cfg =
        config_path.empty() ? chasd::parse_config("{}")
                            : chasd::parse_config(read_text_file(config_path));
    apply_overrides(cfg, o);
    return cfg;
}

// {"id": ..., "answer": "yes"|"no"} per line, keyed by id.
std::vector<std::pair<std::string, chasd::YesNo>> load_answers(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::pair<std::string, chasd::YesNo>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
            !j["id"].is_string() || !j.contains("answer") || !j["answer"].is_string()) {
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected {\"id\": ..., \"answer\": \"yes\"|\"no\"}");
        }
        out.emplace_back(j["id"].get<std::string>(),
                         chasd::parse_yes_no(j["answer"].get<std::string>()));
    }
    if (out.empty()) {
        throw DataError(path + ": no records");
    }
    return out;
}

int do_eval(const std::string& pred_path, const std::string& gold_path) {
    const auto preds = load_answers(pred_path);
    const auto golds = load_answers(gold_path);
    std::map<std::string, chasd::YesNo> gold_by_id;
    for (const auto& [id, v] : golds) {
        if (!gold_by_id.emplace(id, v).second) {
            throw DataError(gold_path + ": duplicate id \"" + id + "\"");
        }
    }
    std::vector<chasd::YesNo> p, g;
    for (const auto& [id, v] : preds) {
        const auto it = gold_by_id.find(id);
        if (it == gold_by_id.end()) {
            throw DataError("prediction id \"" + id + "\" has no gold");
        }
        p.push_back(v);
        g.push_back(it->second);
    }
    if (preds.size() != golds.size()) {
        throw DataError("prediction/gold id sets differ in size");
    }
    const chasd::ConfusionMatrix cm = chasd::confusion(p, g);
    json j;
    j["count"] = cm.total();
    j["tp"] = cm.tp;
    j["tn"] = cm.tn;
    j["fp"] = cm.fp;
    j["fn"] = cm.fn;
    j["accuracy"] = chasd::accuracy(cm);
    j["f1"] = chasd::f1(cm);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int do_mme(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<chasd::MmeCategory> cats;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("name") ||
            !j.contains("acc") || !j.contains("acc_plus") || !j["acc"].is_number() ||
            !j["acc_plus"].is_number()) {
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected {\"name\", \"acc\", \"acc_plus\"}");
        }
        cats.push_back({j["name"].get<std::string>(), j["acc"].get<double>(),
                        j["acc_plus"].get<double>()});
    }
    json out;
    out["categories"] = cats.size();
    out["mme"] = chasd::mme_score(cats);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int do_mmhal(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<double> scores;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(line, &pos);
            if (line.find_first_not_of(" \t\r", pos) != std::string::npos) {
                throw std::invalid_argument("trailing characters");
            }
            scores.push_back(v);
        } catch (const std::exception&) {
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected one number per line");
        }
    }
    json out;
    out["count"] = scores.size();
    out["mmhal"] = chasd::mmhal_average(scores);
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gated contrastive decoding over a deterministic toy vision-language backend"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Decode a dataset and write traces");
    std::string run_config, run_dataset, run_out;
    int run_workers = 1;
    Overrides run_o;
    run_cmd->add_option("--config", run_config, "JSON config file");
    run_cmd->add_option("--dataset", run_dataset, "JSON-lines job file")->required();
    run_cmd->add_option("--out", run_out, "Output directory")->required();
    run_cmd->add_option("--jobs", run_workers, "Worker threads");
    add_common_options(run_cmd, run_o);

    auto* sweep_cmd = app.add_subcommand("sweep", "Re-run a dataset across parameter values");
    std::string sweep_config, sweep_dataset, sweep_out, sweep_axis;
    std::vector<double> sweep_values;
    int sweep_workers = 1;
    Overrides sweep_o;
    sweep_cmd->add_option("--config", sweep_config, "JSON config file");
    sweep_cmd->add_option("--dataset", sweep_dataset, "JSON-lines job file")->required();
    sweep_cmd->add_option("--out", sweep_out, "Output directory")->required();
    sweep_cmd->add_option("--axis", sweep_axis, "Swept parameter: tau or k")
        ->required()
        ->check(CLI::IsMember({"tau", "k"}));
    sweep_cmd->add_option("--values", sweep_values, "Values, comma separated")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--jobs", sweep_workers, "Worker threads");
    add_common_options(sweep_cmd, sweep_o);

    auto* eval_cmd = app.add_subcommand("eval", "Yes/no accuracy and F1 from answer files");
    std::string eval_preds, eval_golds;
    eval_cmd->add_option("--predictions", eval_preds, "JSON-lines {id, answer}")->required();
    eval_cmd->add_option("--golds", eval_golds, "JSON-lines {id, answer}")->required();

    auto* amber_cmd = app.add_subcommand("amber", "Combine CHAIR and F1 percentages");
    double amber_chair = 0.0, amber_f1 = 0.0;
    amber_cmd->add_option("--chair-i", amber_chair, "Hallucination rate, 0-100")->required();
    amber_cmd->add_option("--f1", amber_f1, "Discriminative F1, 0-100")->required();

    auto* mme_cmd = app.add_subcommand("mme", "Sum per-category accuracy scores");
    std::string mme_path;
    mme_cmd->add_option("--categories", mme_path, "JSON-lines {name, acc, acc_plus}")
        ->required();

    auto* mmhal_cmd = app.add_subcommand("mmhal", "Average judge ratings");
    std::string mmhal_path;
    mmhal_cmd->add_option("--scores", mmhal_path, "One rating per line, 0-6")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) {
            const chasd::RunConfig cfg = load_config(run_config, run_o);
            const chasd::RunReport report =
                chasd::run(cfg, run_dataset, run_out, run_workers);
            json j;
            j["jobs"] = report.jobs.size();
            j["total_steps"] = report.total_steps;
            j["total_forwards"] = report.total_forwards;
            j["trigger_rate"] = report.trigger_rate;
            j["out"] = run_out;
            std::cout << j.dump(2) << "\n";
        } else if (sweep_cmd->parsed()) {
            const chasd::RunConfig cfg = load_config(sweep_config, sweep_o);
            const chasd::SweepAxis axis =
                sweep_axis == "tau" ? chasd::SweepAxis::kTau : chasd::SweepAxis::kK;
            const auto rows =
                chasd::sweep(cfg, sweep_dataset, axis, sweep_values, sweep_out,
                             sweep_workers);
            json j;
            j["axis"] = sweep_axis;
            j["rows"] = rows.size();
            j["out"] = sweep_out;
            std::cout << j.dump(2) << "\n";
        } else if (eval_cmd->parsed()) {
            return do_eval(eval_preds, eval_golds);
        } else if (amber_cmd->parsed()) {
            json j;
            j["amber"] = chasd::amber_score(amber_chair, amber_f1);
            std::cout << j.dump(2) << "\n";
        } else if (mme_cmd->parsed()) {
            return do_mme(mme_path);
        } else if (mmhal_cmd->parsed()) {
            return do_mmhal(mmhal_path);
        }
        return 0;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
