#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace textaug {

// QWERTY adjacency, letters plus the digit row. Neighbor strings are
// sorted so draws over them are deterministic.
struct KeyboardLayout {
    std::map<char, std::string> adjacency;

    const std::string* neighbors(char c) const;

    static KeyboardLayout qwerty();
    static KeyboardLayout from_file(const std::filesystem::path& path);
};

// Plausible character misreads of an OCR engine.
struct ConfusionTable {
    std::map<char, std::string> confusions;

    const std::string* misreads(char c) const;

    static ConfusionTable builtin();
    static ConfusionTable from_file(const std::filesystem::path& path);
};

// Frequently misspelled words and their misspellings.
struct MisspellTable {
    std::map<std::string, std::vector<std::string>> entries;

    const std::vector<std::string>* misspellings(const std::string& word) const;

    static MisspellTable builtin();
    static MisspellTable from_file(const std::filesystem::path& path);
};

// Synonym sets, symmetrized at load: w2 in syn(w1) <=> w1 in syn(w2).
struct Thesaurus {
    std::map<std::string, std::vector<std::string>> synsets;
    std::string source_tag;

    const std::vector<std::string>* synonyms(const std::string& word) const;

    // Lines "word<TAB>syn1,syn2,...".
    static Thesaurus from_file(const std::filesystem::path& path, std::string tag = {});
};

}  // namespace textaug
