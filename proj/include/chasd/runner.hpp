#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chasd/eval.hpp"
#include "chasd/trace_io.hpp"

namespace chasd {

struct JobSummary {
    std::string id;
    long long length = 0;
    long long triggered = 0;
    double trigger_rate = 0.0;
    long long total_forwards = 0;
    std::vector<int> tokens;
    bool step1_triggered = false;
    std::string prediction;           // "yes" | "no", from the first token
    std::optional<std::string> gold;
};

struct RunReport {
    std::vector<JobSummary> jobs;  // dataset order
    long long total_steps = 0;
    long long total_triggered = 0;
    long long total_forwards = 0;
    double trigger_rate = 0.0;
    long long step1_triggered = 0;  // jobs whose first step fired the gate
    std::optional<ConfusionMatrix> confusion;  // present iff any job has a gold
    double wall_seconds = 0.0;
};

// Seed for one job: deterministic in (run seed, job id), independent of job
// order and of every other job.
std::uint64_t job_seed(std::uint64_t run_seed, const std::string& job_id);

// Decode every job in the dataset, writing <id>.trace.jsonl per job and
// report.json into out_dir. Jobs run on `workers` threads; outputs are
// identical for any worker count.
RunReport run(const RunConfig& config, const std::filesystem::path& dataset_path,
              const std::filesystem::path& out_dir, int workers = 1);

enum class SweepAxis { kTau, kK };

struct SweepRow {
    double value = 0.0;
    long long total_forwards = 0;
    double trigger_rate = 0.0;
    long long step1_triggered = 0;
    std::optional<double> accuracy;
    std::optional<double> f1;
};

// Re-run the dataset once per value of the chosen parameter, everything else
// (seeds included) held fixed. Each value gets a subdirectory of out_dir;
// sweep.json collects one row per value.
std::vector<SweepRow> sweep(const RunConfig& config,
                            const std::filesystem::path& dataset_path,
                            SweepAxis axis, const std::vector<double>& values,
                            const std::filesystem::path& out_dir, int workers = 1);

} // namespace chasd
