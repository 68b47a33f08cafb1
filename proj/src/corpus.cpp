#include "textaug/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "textaug/errors.hpp"
#include "textaug/rng.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

using nlohmann::json;

std::string role_name(DatasetRole role) {
    switch (role) {
        case DatasetRole::base: return "base";
        case DatasetRole::novel: return "novel";
        case DatasetRole::augmented_novel: return "augmented-novel";
    }
    return "unknown";
}

std::optional<int> Dataset::label_index(const std::string& label) const {
    auto it = std::find(label_space.begin(), label_space.end(), label);
    if (it == label_space.end()) return std::nullopt;
    return static_cast<int>(it - label_space.begin());
}

const LabeledSample* Dataset::find(const std::string& id) const {
    for (const auto& s : samples) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

std::vector<std::size_t> Dataset::indices_of_label(const std::string& label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label == label) out.push_back(i);
    }
    return out;
}

void Dataset::finalize() {
    label_space.clear();
    std::unordered_set<std::string> seen_labels;
    std::unordered_set<std::string> seen_ids;
    for (const auto& s : samples) {
        if (trim(s.text).empty()) {
            throw IngestError("sample '" + s.id + "' has empty text");
        }
        if (!seen_ids.insert(s.id).second) {
            throw IngestError("duplicate sample id '" + s.id + "'");
        }
        if (seen_labels.insert(s.label).second) {
            label_space.push_back(s.label);
        }
    }
}

DatasetFormat dataset_format_of(const std::string& name) {
    if (name == "jsonl") return DatasetFormat::jsonl;
    if (name == "csv") return DatasetFormat::csv;
    throw ConfigError("unknown dataset format '" + name + "'");
}

namespace {

// Record-wise CSV reader: comma separated, double quotes with "" escapes,
// quoted fields may span lines. Header row required.
std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool in_quote = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quote) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get(c);
                } else {
                    in_quote = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quote = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get(c);
            row.push_back(std::move(field));
            field.clear();
            if (!(row.size() == 1 && row[0].empty())) records.push_back(row);
            row.clear();
        } else {
            field.push_back(c);
        }
    }
    if (in_quote) throw IngestError("unterminated quoted CSV field");
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        if (!(row.size() == 1 && row[0].empty())) records.push_back(row);
    }
    (void)any;
    return records;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& text_field,
                 const std::string& label_field) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    auto records = read_csv_records(in);
    if (records.empty()) throw IngestError("no records in '" + path.string() + "'");

    const auto& header = records.front();
    auto column = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw IngestError("CSV header of '" + path.string() + "' lacks column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    std::size_t text_col = column(text_field);
    std::size_t label_col = column(label_field);
    std::optional<std::size_t> id_col;
    if (auto it = std::find(header.begin(), header.end(), "id"); it != header.end()) {
        id_col = static_cast<std::size_t>(it - header.begin());
    }

    Dataset d;
    if (records.size() == 1) throw IngestError("no records in '" + path.string() + "'");
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto row_name = std::to_string(r);
        if (text_col >= rec.size() || label_col >= rec.size()) {
            throw IngestError("row " + row_name + " of '" + path.string() + "' is missing fields");
        }
        LabeledSample s;
        s.text = rec[text_col];
        s.label = rec[label_col];
        s.id = (id_col && *id_col < rec.size() && !rec[*id_col].empty())
                   ? rec[*id_col]
                   : std::to_string(r - 1);
        if (trim(s.text).empty()) {
            throw IngestError("row " + row_name + " of '" + path.string() + "' has empty text");
        }
        d.samples.push_back(std::move(s));
    }
    d.finalize();
    return d;
}

Dataset load_jsonl(const std::filesystem::path& path, const std::string& text_field,
                   const std::string& label_field) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    Dataset d;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto row_name = std::to_string(row + 1);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw IngestError("line " + row_name + " of '" + path.string() +
                              "' is not valid JSON: " + e.what());
        }
        if (!obj.contains(text_field)) {
            throw IngestError("line " + row_name + " of '" + path.string() + "' lacks field '" +
                              text_field + "'");
        }
        if (!obj.contains(label_field)) {
            throw IngestError("line " + row_name + " of '" + path.string() + "' lacks field '" +
                              label_field + "'");
        }
        LabeledSample s;
        s.text = obj[text_field].is_string() ? obj[text_field].get<std::string>() : obj[text_field].dump();
        s.label = obj[label_field].is_string() ? obj[label_field].get<std::string>() : obj[label_field].dump();
        if (obj.contains("id")) {
            s.id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
        } else {
            s.id = std::to_string(row);
        }
        if (trim(s.text).empty()) {
            throw IngestError("line " + row_name + " of '" + path.string() + "' has empty text");
        }
        d.samples.push_back(std::move(s));
        ++row;
    }
    if (d.samples.empty()) throw IngestError("no records in '" + path.string() + "'");
    d.finalize();
    return d;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const std::string& text_field, const std::string& label_field) {
    if (!std::filesystem::exists(path)) {
        throw IngestError("dataset file '" + path.string() + "' does not exist");
    }
    switch (format) {
        case DatasetFormat::jsonl: return load_jsonl(path, text_field, label_field);
        case DatasetFormat::csv: return load_csv(path, text_field, label_field);
    }
    throw ConfigError("unhandled dataset format");
}

void save_dataset_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
    for (const auto& s : dataset.samples) {
        json obj{{"id", s.id}, {"label", s.label}, {"text", s.text}};
        out << obj.dump() << '\n';
    }
}

std::size_t KShotDraw::total() const {
    std::size_t n = 0;
    for (const auto& [cls, ids] : selected_ids) n += ids.size();
    return n;
}

KShotDraw k_shot_sample(const Dataset& dataset, int k, std::uint64_t seed) {
    if (k <= 0) throw ConfigError("k must be positive, got " + std::to_string(k));
    KShotDraw draw;
    draw.k = k;
    draw.seed = seed;
    Rng root(seed);
    for (const auto& cls : dataset.label_space) {
        auto idx = dataset.indices_of_label(cls);
        if (idx.size() < static_cast<std::size_t>(k)) {
            throw ConfigError("class '" + cls + "' has " + std::to_string(idx.size()) +
                              " samples, fewer than k=" + std::to_string(k));
        }
        Rng rng = root.derive("kshot", cls);
        auto picks = rng.choose(idx.size(), static_cast<std::size_t>(k));
        std::vector<std::string> ids;
        ids.reserve(picks.size());
        for (auto p : picks) ids.push_back(dataset.samples[idx[p]].id);
        draw.selected_ids.emplace(cls, std::move(ids));
    }
    return draw;
}

namespace {

std::unordered_set<std::string> draw_id_set(const KShotDraw& draw) {
    std::unordered_set<std::string> ids;
    for (const auto& [cls, list] : draw.selected_ids) ids.insert(list.begin(), list.end());
    return ids;
}

}  // namespace

Dataset select_draw(const Dataset& dataset, const KShotDraw& draw) {
    auto ids = draw_id_set(draw);
    Dataset out;
    out.role = dataset.role;
    for (const auto& s : dataset.samples) {
        if (ids.count(s.id)) out.samples.push_back(s);
    }
    out.finalize();
    return out;
}

Dataset reject_draw(const Dataset& dataset, const KShotDraw& draw) {
    auto ids = draw_id_set(draw);
    Dataset out;
    out.role = dataset.role;
    for (const auto& s : dataset.samples) {
        if (!ids.count(s.id)) out.samples.push_back(s);
    }
    out.finalize();
    return out;
}

Dataset merge_augmented(const Dataset& novel_fewshot, const AugmentedSet& variants) {
    std::unordered_map<std::string, const LabeledSample*> by_id;
    for (const auto& s : novel_fewshot.samples) by_id[s.id] = &s;

    Dataset out;
    out.role = DatasetRole::augmented_novel;
    out.samples = novel_fewshot.samples;
    for (const auto& entry : variants.entries) {
        auto it = by_id.find(entry.source_id);
        if (it == by_id.end()) {
            throw IngestError("variant source id '" + entry.source_id +
                              "' not present in the few-shot dataset");
        }
        if (entry.label != it->second->label) {
            throw IngestError("variant label '" + entry.label + "' does not match source '" +
                              entry.source_id + "' label '" + it->second->label + "'");
        }
        std::size_t k = 0;
        for (const auto& v : entry.variants) {
            LabeledSample s;
            s.id = entry.source_id + "/aug" + std::to_string(k++);
            s.text = v.text;
            s.label = entry.label;
            out.samples.push_back(std::move(s));
        }
    }
    out.finalize();
    return out;
}

void require_disjoint_labels(const Dataset& base, const Dataset& novel) {
    std::set<std::string> base_labels(base.label_space.begin(), base.label_space.end());
    for (const auto& l : novel.label_space) {
        if (base_labels.count(l)) {
            throw ConfigError("base and novel label spaces overlap on '" + l + "'");
        }
    }
}

}  // namespace textaug
