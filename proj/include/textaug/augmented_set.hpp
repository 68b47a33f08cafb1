#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace textaug {

// One generated variant with full provenance. `identity` marks outputs
// equal to the source because no eligible edit position existed; those
// are flagged, never dropped.
struct Variant {
    std::string text;
    std::string method;
    std::uint64_t seed = 0;
    bool identity = false;
    std::map<std::string, std::string> trace;
};

struct AugmentEntry {
    std::string source_id;
    std::string source_text;
    std::string label;
    std::vector<Variant> variants;
    std::string error;  // non-empty when the sample failed terminally
};

struct AugmentedSet {
    std::vector<AugmentEntry> entries;

    std::size_t total_variants() const;
    std::size_t failure_count() const;
};

void write_augmented_jsonl(const AugmentedSet& set, const std::filesystem::path& path);
AugmentedSet read_augmented_jsonl(const std::filesystem::path& path);

}  // namespace textaug
