#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chasd/backend.hpp"
#include "chasd/decoder.hpp"

namespace chasd {

// Problems with user-supplied inputs (configs, datasets, prediction files).
// The CLI maps these to exit code 2; everything else unexpected maps to 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything a run needs: decoding parameters, the backend recipe, and the
// token treated as the "yes" answer when jobs carry yes/no golds.
struct RunConfig {
    DecoderConfig decoder;
    ToyBackendSpec backend;
    int yes_token = 1;

    bool operator==(const RunConfig&) const = default;
};

// One decode request. The image arrives either inline (`pixels`, flat in the
// backend's channel-major layout) or as a path to a raw little-endian
// float32 file, resolved relative to the dataset file.
struct JobRecord {
    std::string id;
    std::vector<int> prompt;
    std::optional<std::vector<double>> pixels;
    std::optional<std::string> visual_path;
    std::optional<std::string> gold;  // "yes" | "no"
    std::optional<int> eos_override;
};

// Parse a JSON config document. Missing keys take defaults; unknown keys and
// out-of-range values raise DataError naming the key.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

// JSON-lines dataset, one JobRecord per line. Errors name the record id (or
// the line number when no id parsed).
std::vector<JobRecord> load_dataset(const std::filesystem::path& path);

// Turn a JobRecord's visual field into pixels, reading the raw file if the
// record points at one.
VisualGrid materialize_visual(const JobRecord& job, const PatchGeometry& geometry,
                              const std::filesystem::path& base_dir);

std::string step_to_json(const StepTrace& step);
StepTrace step_from_json(const std::string& line);

struct TraceFile {
    std::string job_id;
    RunConfig config;
    std::vector<int> prompt;
    int eos_token = 0;
    DecodeTrace trace;
};

// JSON-lines trace: a header line (config + job identity), one line per
// step, and a summary line whose aggregates are revalidated on read.
void write_trace_file(const std::filesystem::path& path, const TraceFile& tf);
TraceFile read_trace_file(const std::filesystem::path& path);

} // namespace chasd
