#include "chasd/trace_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chasd {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw DataError(what + ": invalid JSON");
    }
    return j;
}

double require_number(const json& j, const std::string& key) {
    if (!j.is_number()) {
        throw DataError("config: key \"" + key + "\" must be a number");
    }
    return j.get<double>();
}

int require_int(const json& j, const std::string& key) {
    if (!j.is_number_integer()) {
        throw DataError("config: key \"" + key + "\" must be an integer");
    }
    return j.get<int>();
}

} // namespace

RunConfig parse_config(const std::string& text) {
    const json j = parse_json(text, "config");
    if (!j.is_object()) {
        throw DataError("config: top level must be a JSON object");
    }
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "alpha") {
            cfg.decoder.alpha = require_number(value, key);
        } else if (key == "beta") {
            cfg.decoder.beta = require_number(value, key);
        } else if (key == "tau") {
            cfg.decoder.tau = require_number(value, key);
        } else if (key == "k") {
            cfg.decoder.k = require_number(value, key);
        } else if (key == "sigma") {
            cfg.decoder.sigma = require_number(value, key);
        } else if (key == "mode") {
            if (!value.is_string()) {
                throw DataError("config: key \"mode\" must be \"greedy\" or \"sample\"");
            }
            const std::string m = value.get<std::string>();
            if (m == "greedy") {
                cfg.decoder.mode = SamplingMode::kGreedy;
            } else if (m == "sample") {
                cfg.decoder.mode = SamplingMode::kSample;
            } else {
                throw DataError("config: key \"mode\" must be \"greedy\" or \"sample\"");
            }
        } else if (key == "temperature") {
            cfg.decoder.temperature = require_number(value, key);
        } else if (key == "max_len") {
            cfg.decoder.max_len = require_int(value, key);
        } else if (key == "eos_token") {
            cfg.decoder.eos_token = require_int(value, key);
        } else if (key == "seed") {
            if (!value.is_number_integer()) {
                throw DataError("config: key \"seed\" must be an integer");
            }
            cfg.decoder.seed = value.get<std::uint64_t>();
        } else if (key == "backend_seed") {
            if (!value.is_number_integer()) {
                throw DataError("config: key \"backend_seed\" must be an integer");
            }
            cfg.backend.seed = value.get<std::uint64_t>();
        } else if (key == "vocab_size") {
            cfg.backend.vocab_size = require_int(value, key);
        } else if (key == "grid_rows") {
            cfg.backend.geometry.grid_rows = require_int(value, key);
        } else if (key == "grid_cols") {
            cfg.backend.geometry.grid_cols = require_int(value, key);
        } else if (key == "patch_px_h") {
            cfg.backend.geometry.patch_px_h = require_int(value, key);
        } else if (key == "patch_px_w") {
            cfg.backend.geometry.patch_px_w = require_int(value, key);
        } else if (key == "channels") {
            cfg.backend.geometry.channels = require_int(value, key);
        } else if (key == "embed_dim") {
            cfg.backend.embed_dim = require_int(value, key);
        } else if (key == "head_count") {
            cfg.backend.head_count = require_int(value, key);
        } else if (key == "yes_token") {
            cfg.yes_token = require_int(value, key);
        } else {
            throw DataError("config: unknown key \"" + key + "\"");
        }
    }
    try {
        cfg.decoder.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    const auto& g = cfg.backend.geometry;
    if (g.grid_rows < 1 || g.grid_cols < 1 || g.patch_px_h < 1 ||
        g.patch_px_w < 1 || g.channels < 1) {
        throw DataError("config: geometry dimensions must be >= 1");
    }
    if (cfg.backend.vocab_size < 2) {
        throw DataError("config: vocab_size must be >= 2");
    }
    if (cfg.backend.embed_dim < 1) {
        throw DataError("config: embed_dim must be >= 1");
    }
    if (cfg.backend.head_count < 1) {
        throw DataError("config: head_count must be >= 1");
    }
    if (cfg.yes_token < 0 || cfg.yes_token >= cfg.backend.vocab_size) {
        throw DataError("config: yes_token outside vocabulary");
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    j["alpha"] = cfg.decoder.alpha;
    j["beta"] = cfg.decoder.beta;
    j["tau"] = cfg.decoder.tau;
    j["k"] = cfg.decoder.k;
    j["sigma"] = cfg.decoder.sigma;
    j["mode"] = cfg.decoder.mode == SamplingMode::kGreedy ? "greedy" : "sample";
    j["temperature"] = cfg.decoder.temperature;
    j["max_len"] = cfg.decoder.max_len;
    j["eos_token"] = cfg.decoder.eos_token;
    j["seed"] = cfg.decoder.seed;
    j["backend_seed"] = cfg.backend.seed;
    j["vocab_size"] = cfg.backend.vocab_size;
    j["grid_rows"] = cfg.backend.geometry.grid_rows;
    j["grid_cols"] = cfg.backend.geometry.grid_cols;
    j["patch_px_h"] = cfg.backend.geometry.patch_px_h;
    j["patch_px_w"] = cfg.backend.geometry.patch_px_w;
    j["channels"] = cfg.backend.geometry.channels;
    j["embed_dim"] = cfg.backend.embed_dim;
    j["head_count"] = cfg.backend.head_count;
    j["yes_token"] = cfg.yes_token;
    return j.dump();
}

std::vector<JobRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("dataset: cannot open " + path.string());
    }
    std::vector<JobRecord> jobs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json j = parse_json(line, "dataset line " + std::to_string(line_no));
        if (!j.is_object()) {
            throw DataError("dataset line " + std::to_string(line_no) +
                            ": record must be an object");
        }
        JobRecord job;
        if (j.contains("id") && j["id"].is_string()) {
            job.id = j["id"].get<std::string>();
        }
        const std::string where =
            job.id.empty() ? "dataset line " + std::to_string(line_no)
                           : "job \"" + job.id + "\"";
        if (job.id.empty()) {
            throw DataError(where + ": missing or non-string \"id\"");
        }
        if (!j.contains("prompt") || !j["prompt"].is_array() || j["prompt"].empty()) {
            throw DataError(where + ": \"prompt\" must be a nonempty array");
        }
        for (const auto& tok : j["prompt"]) {
            if (!tok.is_number_integer()) {
                throw DataError(where + ": prompt tokens must be integers");
            }
            job.prompt.push_back(tok.get<int>());
        }
        if (j.contains("pixels")) {
            if (!j["pixels"].is_array()) {
                throw DataError(where + ": \"pixels\" must be an array");
            }
            std::vector<double> px;
            for (const auto& v : j["pixels"]) {
                if (!v.is_number()) {
                    throw DataError(where + ": pixel values must be numbers");
                }
                px.push_back(v.get<double>());
            }
            job.pixels = std::move(px);
        }
        if (j.contains("visual_path")) {
            if (!j["visual_path"].is_string()) {
                throw DataError(where + ": \"visual_path\" must be a string");
            }
            job.visual_path = j["visual_path"].get<std::string>();
        }
        if (job.pixels.has_value() == job.visual_path.has_value()) {
            throw DataError(where +
                            ": record needs exactly one of \"pixels\" or \"visual_path\"");
        }
        if (j.contains("gold")) {
            if (!j["gold"].is_string()) {
                throw DataError(where + ": \"gold\" must be \"yes\" or \"no\"");
            }
            const std::string g = j["gold"].get<std::string>();
            if (g != "yes" && g != "no") {
                throw DataError(where + ": \"gold\" must be \"yes\" or \"no\"");
            }
            job.gold = g;
        }
        if (j.contains("eos")) {
            if (!j["eos"].is_number_integer()) {
                throw DataError(where + ": \"eos\" must be an integer");
            }
            job.eos_override = j["eos"].get<int>();
        }
        for (const auto& [key, _] : j.items()) {
            if (key != "id" && key != "prompt" && key != "pixels" &&
                key != "visual_path" && key != "gold" && key != "eos") {
                throw DataError(where + ": unknown key \"" + key + "\"");
            }
        }
        jobs.push_back(std::move(job));
    }
    return jobs;
}

VisualGrid materialize_visual(const JobRecord& job, const PatchGeometry& geometry,
                              const std::filesystem::path& base_dir) {
    VisualGrid grid = VisualGrid::zeros(geometry);
    if (job.pixels) {
        if (job.pixels->size() != geometry.pixel_count()) {
            throw DataError("job \"" + job.id + "\": pixels has " +
                            std::to_string(job.pixels->size()) + " values, geometry needs " +
                            std::to_string(geometry.pixel_count()));
        }
        grid.pixels = *job.pixels;
        return grid;
    }
    const std::filesystem::path p = base_dir / *job.visual_path;
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw DataError("job \"" + job.id + "\": cannot open visual file " + p.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    const std::size_t expected = geometry.pixel_count() * sizeof(float);
    if (bytes.size() != expected) {
        throw DataError("job \"" + job.id + "\": visual file " + p.string() + " has " +
                        std::to_string(bytes.size()) + " bytes, geometry needs " +
                        std::to_string(expected));
    }
    for (std::size_t i = 0; i < geometry.pixel_count(); ++i) {
        float f;
        std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof(float));
        grid.pixels[i] = static_cast<double>(f);
    }
    return grid;
}

std::string step_to_json(const StepTrace& step) {
    json j;
    j["type"] = "step";
    j["t"] = step.t;
    j["token"] = step.token;
    j["p_max"] = step.p_max;
    j["triggered"] = step.triggered;
    j["mask_indices"] = step.mask_indices;
    j["candidate_count"] = step.candidate_count;
    j["forward_calls"] = step.forward_calls;
    return j.dump();
}

StepTrace step_from_json(const std::string& line) {
    const json j = parse_json(line, "trace step");
    if (!j.is_object() || j.value("type", "") != "step") {
        throw DataError("trace step: line is not a step record");
    }
    StepTrace s;
    try {
        s.t = j.at("t").get<int>();
        s.token = j.at("token").get<int>();
        s.p_max = j.at("p_max").get<double>();
        s.triggered = j.at("triggered").get<bool>();
        s.mask_indices = j.at("mask_indices").get<std::vector<std::size_t>>();
        s.candidate_count = j.at("candidate_count").get<int>();
        s.forward_calls = j.at("forward_calls").get<int>();
    } catch (const json::exception& e) {
        throw DataError(std::string("trace step: ") + e.what());
    }
    if (s.triggered != (s.forward_calls == 2) ||
        s.triggered != !s.mask_indices.empty()) {
        throw DataError("trace step: trigger/forwards/mask fields inconsistent");
    }
    return s;
}

void write_trace_file(const std::filesystem::path& path, const TraceFile& tf) {
    std::ofstream out(path, std::ios::binary);  // binary: keep \n on all platforms
    if (!out) {
        throw std::runtime_error("cannot write trace file " + path.string());
    }
    json header = json::parse(serialize_config(tf.config));
    header["type"] = "header";
    header["job_id"] = tf.job_id;
    header["prompt"] = tf.prompt;
    header["eos_token"] = tf.eos_token;  // effective value (job override applied)
    out << header.dump() << "\n";
    for (const StepTrace& s : tf.trace.steps) {
        out << step_to_json(s) << "\n";
    }
    json summary;
    summary["type"] = "summary";
    summary["steps"] = tf.trace.steps.size();
    summary["tokens"] = tf.trace.tokens;
    summary["total_forwards"] = tf.trace.total_forwards;
    summary["trigger_rate"] = tf.trace.trigger_rate;
    out << summary.dump() << "\n";
    if (!out) {
        throw std::runtime_error("failed writing trace file " + path.string());
    }
}

TraceFile read_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open trace file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("trace file " + path.string() + " is empty");
    }
    json header = parse_json(line, "trace header");
    if (header.value("type", "") != "header") {
        throw DataError("trace file " + path.string() + ": first line is not a header");
    }
    TraceFile tf;
    tf.job_id = header.value("job_id", "");
    tf.prompt = header.value("prompt", std::vector<int>{});
    tf.eos_token = header.value("eos_token", 0);
    header.erase("type");
    header.erase("job_id");
    header.erase("prompt");
    // eos_token stays: it is also a config key, restored by parse_config.
    tf.config = parse_config(header.dump());
    tf.config.decoder.eos_token = tf.eos_token;

    bool saw_summary = false;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json j = parse_json(line, "trace line");
        const std::string type = j.value("type", "");
        if (type == "step") {
            tf.trace.steps.push_back(step_from_json(line));
        } else if (type == "summary") {
            saw_summary = true;
            tf.trace.tokens = j.at("tokens").get<std::vector<int>>();
            tf.trace.total_forwards = j.at("total_forwards").get<long long>();
            tf.trace.trigger_rate = j.at("trigger_rate").get<double>();
            if (j.at("steps").get<std::size_t>() != tf.trace.steps.size()) {
                throw DataError("trace file " + path.string() +
                                ": summary step count disagrees with step lines");
            }
        } else {
            throw DataError("trace file " + path.string() + ": unknown line type \"" +
                            type + "\"");
        }
    }
    if (!saw_summary) {
        throw DataError("trace file " + path.string() + ": missing summary line");
    }
    long long forwards = 0;
    for (std::size_t i = 0; i < tf.trace.steps.size(); ++i) {
        forwards += tf.trace.steps[i].forward_calls;
        if (tf.trace.tokens.size() != tf.trace.steps.size() ||
            tf.trace.steps[i].token != tf.trace.tokens[i]) {
            throw DataError("trace file " + path.string() +
                            ": summary tokens disagree with step lines");
        }
    }
    if (forwards != tf.trace.total_forwards) {
        throw DataError("trace file " + path.string() +
                        ": summary forward count disagrees with step lines");
    }
    return tf;
}

} // namespace chasd
