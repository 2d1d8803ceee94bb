#pragma once

#include <array>
#include <string>
#include <vector>

#include "grid/signal.hpp"

namespace grid {

// Adapter between an on-disk CSV layout and the canonical data model.
// The manifest is a plain-text "key = value" file; '#' starts a comment.
// Recognized keys: root, classes (comma list, optional), sample_rate_hz,
// target_length, trim (end|head), time_column, fx_column .. tz_column.
struct DatasetManifest {
    std::string root;  // resolved against the manifest's directory
    std::vector<std::string> classes;  // empty -> discover subdirectories
    std::array<std::string, kNumChannels> channel_columns = {
        "Fx", "Fy", "Fz", "Tx", "Ty", "Tz"};
    std::string time_column = "time";
    double sample_rate_hz = kCanonicalRateHz;
    std::size_t target_length = kCanonicalLength;
    LengthAlign trim = LengthAlign::End;
};

DatasetManifest parse_manifest(const std::string& path);

// One recording: a CSV with a header row naming the columns and one row
// per sample. Errors cite the file and line number.
FTSignal read_recording_csv(const std::string& path,
                            const DatasetManifest& manifest);

// Walks root/<class>/*.csv, parses and length-fits every recording,
// validates it, and labels it by its subdirectory. When the class set is
// not given by the manifest, subdirectories are ordered lexicographically,
// except that the known material list from the public dataset keeps its
// canonical order.
Dataset ingest(const DatasetManifest& manifest);

// Loads either a binary dataset container or a manifest file, sniffed by
// the magic bytes.
Dataset load_dataset_any(const std::string& path);

}  // namespace grid
