#include "textaug/augmented_set.hpp"

#include <fstream>

#include <json.hpp>

#include "textaug/errors.hpp"

namespace textaug {

using nlohmann::json;

std::size_t AugmentedSet::total_variants() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.variants.size();
    return n;
}

std::size_t AugmentedSet::failure_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (!e.error.empty()) ++n;
    }
    return n;
}

void write_augmented_jsonl(const AugmentedSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
    for (const auto& e : set.entries) {
        json variants = json::array();
        for (const auto& v : e.variants) {
            variants.push_back({{"text", v.text},
                                {"method", v.method},
                                {"seed", v.seed},
                                {"identity", v.identity},
                                {"trace", v.trace}});
        }
        json obj{{"source_id", e.source_id},
                 {"source_text", e.source_text},
                 {"label", e.label},
                 {"variants", variants}};
        if (!e.error.empty()) obj["error"] = e.error;
        out << obj.dump() << '\n';
    }
}

AugmentedSet read_augmented_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    AugmentedSet set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw IngestError("line " + std::to_string(lineno) + " of '" + path.string() +
                              "' is not valid JSON: " + e.what());
        }
        AugmentEntry entry;
        entry.source_id = obj.at("source_id").get<std::string>();
        entry.source_text = obj.at("source_text").get<std::string>();
        entry.label = obj.at("label").get<std::string>();
        if (obj.contains("error")) entry.error = obj["error"].get<std::string>();
        for (const auto& vj : obj.at("variants")) {
            Variant v;
            v.text = vj.at("text").get<std::string>();
            v.method = vj.at("method").get<std::string>();
            v.seed = vj.value("seed", std::uint64_t{0});
            v.identity = vj.value("identity", false);
            if (vj.contains("trace")) {
                v.trace = vj["trace"].get<std::map<std::string, std::string>>();
            }
            entry.variants.push_back(std::move(v));
        }
        set.entries.push_back(std::move(entry));
    }
    return set;
}

}  // namespace textaug
