#include "chasd/runner.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "chasd/rng.hpp"

namespace chasd {

namespace {

using nlohmann::json;

bool safe_job_id(const std::string& id) {
    if (id.empty()) {
        return false;
    }
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (!ok) {
            return false;
        }
    }
    return id != "." && id != "..";
}

json summary_to_json(const JobSummary& s) {
    json j;
    j["id"] = s.id;
    j["length"] = s.length;
    j["triggered"] = s.triggered;
    j["trigger_rate"] = s.trigger_rate;
    j["total_forwards"] = s.total_forwards;
    j["tokens"] = s.tokens;
    j["step1_triggered"] = s.step1_triggered;
    j["prediction"] = s.prediction;
    if (s.gold) {
        j["gold"] = *s.gold;
    }
    return j;
}

void write_report_json(const std::filesystem::path& path, const RunReport& r) {
    json j;
    j["jobs"] = json::array();
    for (const JobSummary& s : r.jobs) {
        j["jobs"].push_back(summary_to_json(s));
    }
    j["total_steps"] = r.total_steps;
    j["total_triggered"] = r.total_triggered;
    j["total_forwards"] = r.total_forwards;
    j["trigger_rate"] = r.trigger_rate;
    j["step1_triggered"] = r.step1_triggered;
    if (r.confusion) {
        json m;
        m["tp"] = r.confusion->tp;
        m["tn"] = r.confusion->tn;
        m["fp"] = r.confusion->fp;
        m["fn"] = r.confusion->fn;
        m["accuracy"] = accuracy(*r.confusion);
        const std::int64_t f1_denom =
            2 * r.confusion->tp + r.confusion->fp + r.confusion->fn;
        if (f1_denom > 0) {
            m["f1"] = f1(*r.confusion);
        } else {
            m["f1"] = nullptr;
        }
        j["metrics"] = m;
    }
    j["wall_seconds"] = r.wall_seconds;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write report " + path.string());
    }
    out << j.dump(2) << "\n";
}

} // namespace

std::uint64_t job_seed(std::uint64_t run_seed, const std::string& job_id) {
    return rng::mix64(run_seed ^ rng::hash_label(job_id));
}

RunReport run(const RunConfig& config, const std::filesystem::path& dataset_path,
              const std::filesystem::path& out_dir, int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    config.decoder.validate();
    if (workers < 1) {
        throw std::invalid_argument("run: workers must be >= 1");
    }
    const std::vector<JobRecord> jobs = load_dataset(dataset_path);
    if (jobs.empty()) {
        throw DataError("dataset " + dataset_path.string() + " contains no jobs");
    }
    for (const JobRecord& job : jobs) {
        if (!safe_job_id(job.id)) {
            throw DataError("job id \"" + job.id +
                            "\" is not filesystem-safe (use [A-Za-z0-9._-])");
        }
    }
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base_dir = dataset_path.parent_path();
    const ToyBackend backend(config.backend);

    std::vector<JobSummary> summaries(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) {
                return;
            }
            try {
                const JobRecord& job = jobs[i];
                const VisualGrid visual =
                    materialize_visual(job, config.backend.geometry, base_dir);
                DecoderConfig dc = config.decoder;
                dc.seed = job_seed(config.decoder.seed, job.id);
                if (job.eos_override) {
                    dc.eos_token = *job.eos_override;
                }
                const DecodeTrace trace = decode(backend, job.prompt, visual, dc);

                TraceFile tf;
                tf.job_id = job.id;
                tf.config = config;
                tf.config.decoder.seed = dc.seed;
                tf.prompt = job.prompt;
                tf.eos_token = dc.eos_token;
                tf.trace = trace;
                write_trace_file(out_dir / (job.id + ".trace.jsonl"), tf);

                JobSummary& s = summaries[i];
                s.id = job.id;
                s.length = static_cast<long long>(trace.steps.size());
                for (const StepTrace& st : trace.steps) {
                    if (st.triggered) {
                        ++s.triggered;
                    }
                }
                s.trigger_rate = trace.trigger_rate;
                s.total_forwards = trace.total_forwards;
                s.tokens = trace.tokens;
                s.step1_triggered = trace.steps.front().triggered;
                s.prediction = trace.tokens.front() == config.yes_token ? "yes" : "no";
                s.gold = job.gold;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };

    const int pool = std::min<int>(workers, static_cast<int>(jobs.size()));
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int i = 0; i < pool; ++i) {
        threads.emplace_back(worker);
    }
    for (std::thread& t : threads) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    RunReport report;
    report.jobs = std::move(summaries);
    std::vector<YesNo> preds, golds;
    for (const JobSummary& s : report.jobs) {
        report.total_steps += s.length;
        report.total_triggered += s.triggered;
        report.total_forwards += s.total_forwards;
        if (s.step1_triggered) {
            ++report.step1_triggered;
        }
        if (s.gold) {
            preds.push_back(parse_yes_no(s.prediction));
            golds.push_back(parse_yes_no(*s.gold));
        }
    }
    report.trigger_rate = static_cast<double>(report.total_triggered) /
                          static_cast<double>(report.total_steps);
    if (!preds.empty()) {
        report.confusion = confusion(preds, golds);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report_json(out_dir / "report.json", report);
    return report;
}

std::vector<SweepRow> sweep(const RunConfig& config,
                            const std::filesystem::path& dataset_path,
                            SweepAxis axis, const std::vector<double>& values,
                            const std::filesystem::path& out_dir, int workers) {
    if (values.empty()) {
        throw DataError("sweep: no values given");
    }
    std::filesystem::create_directories(out_dir);
    const std::string axis_name = axis == SweepAxis::kTau ? "tau" : "k";
    std::vector<SweepRow> rows;
    json sweep_json;
    sweep_json["axis"] = axis_name;
    sweep_json["rows"] = json::array();
    for (double value : values) {
        RunConfig cfg = config;
        if (axis == SweepAxis::kTau) {
            cfg.decoder.tau = value;
        } else {
            cfg.decoder.k = value;
        }
        try {
            cfg.decoder.validate();
        } catch (const std::invalid_argument& e) {
            throw DataError(std::string("sweep value ") + json(value).dump() + ": " +
                            e.what());
        }
        const std::string subdir = axis_name + "_" + json(value).dump();
        const RunReport report = run(cfg, dataset_path, out_dir / subdir, workers);

        SweepRow row;
        row.value = value;
        row.total_forwards = report.total_forwards;
        row.trigger_rate = report.trigger_rate;
        row.step1_triggered = report.step1_triggered;
        if (report.confusion) {
            row.accuracy = accuracy(*report.confusion);
            const std::int64_t f1_denom =
                2 * report.confusion->tp + report.confusion->fp + report.confusion->fn;
            if (f1_denom > 0) {
                row.f1 = f1(*report.confusion);
            }
        }
        rows.push_back(row);

        json rj;
        rj["value"] = row.value;
        rj["total_forwards"] = row.total_forwards;
        rj["trigger_rate"] = row.trigger_rate;
        rj["step1_triggered"] = row.step1_triggered;
        rj["accuracy"] = row.accuracy ? json(*row.accuracy) : json(nullptr);
        rj["f1"] = row.f1 ? json(*row.f1) : json(nullptr);
        sweep_json["rows"].push_back(rj);
    }
    std::ofstream out(out_dir / "sweep.json", std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write sweep.json in " + out_dir.string());
    }
    out << sweep_json.dump(2) << "\n";
    return rows;
}

} // namespace chasd
