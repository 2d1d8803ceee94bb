#include "grid/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "grid/container.hpp"
#include "grid/model_io.hpp"

namespace fs = std::filesystem;

namespace grid {

namespace {

// Confusion-matrix order of the public dataset's materials.
const std::vector<std::string> kPublicDatasetClassOrder = {
    "dry_peas",  "rice",      "wheat_flour",     "clay_granules",
    "oat_flakes", "potting_gravel", "sunflower_seeds", "breadcrumbs",
    "macaroni",  "fine_sugar", "cat_litter"};

std::string trim_ws(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string normalize_class_name(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        else
            out.push_back('_');
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& field, const std::string& file,
                    std::size_t line_no) {
    const std::string t = trim_ws(field);
    double value = 0.0;
    const auto* begin = t.data();
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error(file + ":" + std::to_string(line_no) +
                                 ": not a number: '" + field + "'");
    return value;
}

}  // namespace

DatasetManifest parse_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim_ws(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        kv[trim_ws(line.substr(0, eq))] = trim_ws(line.substr(eq + 1));
    }

    DatasetManifest m;
    const fs::path base = fs::path(path).parent_path();
    const std::string root = kv.count("root") ? kv["root"] : ".";
    m.root = fs::path(root).is_absolute() ? root : (base / root).string();

    if (kv.count("classes") && !kv["classes"].empty()) {
        for (const auto& part : split_csv_line(kv["classes"])) {
            const std::string name = trim_ws(part);
            if (!name.empty()) m.classes.push_back(name);
        }
    }
    if (kv.count("sample_rate_hz"))
        m.sample_rate_hz = std::stod(kv["sample_rate_hz"]);
    if (kv.count("target_length"))
        m.target_length = static_cast<std::size_t>(std::stoul(kv["target_length"]));
    if (kv.count("trim")) {
        const std::string t = kv["trim"];
        if (t == "end" || t == "tail")
            m.trim = LengthAlign::End;
        else if (t == "head")
            m.trim = LengthAlign::Head;
        else
            throw std::runtime_error(path + ": trim must be 'end' or 'head'");
    }
    if (kv.count("time_column")) m.time_column = kv["time_column"];
    const char* keys[kNumChannels] = {"fx_column", "fy_column", "fz_column",
                                      "tx_column", "ty_column", "tz_column"};
    for (std::size_t c = 0; c < kNumChannels; ++c)
        if (kv.count(keys[c])) m.channel_columns[c] = kv[keys[c]];
    return m;
}

FTSignal read_recording_csv(const std::string& path,
                            const DatasetManifest& manifest) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open recording: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    std::array<std::size_t, kNumChannels> col{};
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto it = std::find_if(header.begin(), header.end(),
                                     [&](const std::string& h) {
                                         return trim_ws(h) ==
                                                manifest.channel_columns[c];
                                     });
        if (it == header.end())
            throw std::runtime_error(path + ":1: unknown column '" +
                                     manifest.channel_columns[c] +
                                     "' not found in header");
        col[c] = static_cast<std::size_t>(it - header.begin());
    }

    FTSignal sig;
    sig.sample_rate_hz = manifest.sample_rate_hz;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim_ws(line).empty()) continue;
        const auto fields = split_csv_line(line);
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            if (col[c] >= fields.size())
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": row has too few columns");
            sig.channels[c].push_back(
                parse_double(fields[col[c]], path, line_no));
        }
    }
    if (sig.channels[0].empty())
        throw std::runtime_error(path + ": no data rows");
    return sig;
}

Dataset ingest(const DatasetManifest& manifest) {
    if (!fs::is_directory(manifest.root))
        throw std::runtime_error("dataset root is not a directory: " +
                                 manifest.root);

    std::vector<std::string> classes = manifest.classes;
    if (classes.empty()) {
        for (const auto& entry : fs::directory_iterator(manifest.root))
            if (entry.is_directory())
                classes.push_back(entry.path().filename().string());
        std::sort(classes.begin(), classes.end());

        // The public dataset keeps its canonical confusion-matrix order.
        if (classes.size() == kPublicDatasetClassOrder.size()) {
            std::vector<std::string> normalized;
            for (const auto& c : classes)
                normalized.push_back(normalize_class_name(c));
            std::vector<std::string> sorted_known = kPublicDatasetClassOrder;
            std::sort(sorted_known.begin(), sorted_known.end());
            std::vector<std::string> sorted_norm = normalized;
            std::sort(sorted_norm.begin(), sorted_norm.end());
            if (sorted_norm == sorted_known) {
                std::vector<std::string> reordered;
                for (const auto& want : kPublicDatasetClassOrder) {
                    for (std::size_t i = 0; i < classes.size(); ++i)
                        if (normalized[i] == want) {
                            reordered.push_back(classes[i]);
                            break;
                        }
                }
                classes = std::move(reordered);
            }
        }
    }
    if (classes.empty())
        throw std::runtime_error("no class subdirectories under " +
                                 manifest.root);

    Dataset ds;
    ds.classes = classes;
    for (const auto& cls : classes) {
        const fs::path dir = fs::path(manifest.root) / cls;
        if (!fs::is_directory(dir))
            throw std::runtime_error("missing class directory: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".csv")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw std::runtime_error("class '" + cls + "' has zero samples in " +
                                     dir.string());

        for (const auto& file : files) {
            FTSignal sig = read_recording_csv(file.string(), manifest);
            sig = fit_to_length(sig, manifest.target_length, manifest.trim);
            const auto valid = validate_signal(sig);
            if (!valid.ok)
                throw std::runtime_error(file.string() + ": invalid signal: " +
                                         valid.violations.front());
            LabeledSample sample;
            sample.signal = std::move(sig);
            sample.label = cls;
            sample.source_id = (fs::path(cls) / file.filename()).string();
            ds.samples.push_back(std::move(sample));
        }
    }
    return ds;
}

Dataset load_dataset_any(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    in.close();
    if (in.gcount() == 4 && std::memcmp(magic, kContainerMagic, 4) == 0)
        return load_dataset(path);
    return ingest(parse_manifest(path));
}

}  // namespace grid
