#include "textaug/resources.hpp"

#include <algorithm>
#include <fstream>

#include "textaug/errors.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

namespace {

void sort_unique(std::string& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Shared "key<TAB>v1,v2,..." reader.
std::map<std::string, std::vector<std::string>> read_tab_table(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open resource file '" + path.string() + "'");
    std::map<std::string, std::vector<std::string>> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + " of '" + path.string() +
                              "' has no TAB separator");
        }
        std::string key = trim(line.substr(0, tab));
        std::vector<std::string> values;
        for (auto& v : split(line.substr(tab + 1), ',')) {
            auto t = trim(v);
            if (!t.empty()) values.push_back(t);
        }
        if (key.empty() || values.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + " of '" + path.string() +
                              "' has an empty key or value list");
        }
        auto& slot = table[key];
        slot.insert(slot.end(), values.begin(), values.end());
    }
    return table;
}

std::map<char, std::string> char_table_from_file(const std::filesystem::path& path) {
    std::map<char, std::string> out;
    for (const auto& [key, values] : read_tab_table(path)) {
        if (key.size() != 1) {
            throw ConfigError("'" + path.string() + "': key '" + key + "' is not a single character");
        }
        std::string alts;
        for (const auto& v : values) {
            if (v.size() != 1) {
                throw ConfigError("'" + path.string() + "': value '" + v +
                                  "' is not a single character");
            }
            alts += v;
        }
        sort_unique(alts);
        out[key[0]] = alts;
    }
    return out;
}

}  // namespace

const std::string* KeyboardLayout::neighbors(char c) const {
    auto it = adjacency.find(c);
    return it == adjacency.end() ? nullptr : &it->second;
}

KeyboardLayout KeyboardLayout::qwerty() {
    static const std::vector<std::string> rows = {"1234567890", "qwertyuiop", "asdfghjkl",
                                                  "zxcvbnm"};
    KeyboardLayout layout;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
            std::string adj;
            auto take = [&](std::size_t rr, long ii) {
                if (rr >= rows.size() || ii < 0 || ii >= static_cast<long>(rows[rr].size())) return;
                adj.push_back(rows[rr][static_cast<std::size_t>(ii)]);
            };
            long li = static_cast<long>(i);
            take(r, li - 1);
            take(r, li + 1);
            if (r > 0) {
                take(r - 1, li - 1);
                take(r - 1, li);
                take(r - 1, li + 1);
            }
            take(r + 1, li - 1);
            take(r + 1, li);
            take(r + 1, li + 1);
            sort_unique(adj);
            layout.adjacency[rows[r][i]] = adj;
        }
    }
    return layout;
}

KeyboardLayout KeyboardLayout::from_file(const std::filesystem::path& path) {
    KeyboardLayout layout;
    layout.adjacency = char_table_from_file(path);
    return layout;
}

const std::string* ConfusionTable::misreads(char c) const {
    auto it = confusions.find(c);
    return it == confusions.end() ? nullptr : &it->second;
}

ConfusionTable ConfusionTable::builtin() {
    ConfusionTable t;
    t.confusions = {
        {'0', "oO"}, {'o', "0"},  {'O', "0D"}, {'1', "Il"}, {'l', "1I"}, {'I', "1l"},
        {'i', "l"},  {'5', "S"},  {'S', "5"},  {'8', "B"},  {'B', "8"},  {'2', "Z"},
        {'Z', "2"},  {'6', "G"},  {'G', "6"},  {'9', "gq"}, {'g', "9q"}, {'q', "9g"},
        {'D', "0O"}, {'u', "v"},  {'v', "u"},  {'c', "e"},  {'e', "c"},  {'a', "o"},
        {'n', "h"},  {'h', "n"},  {'E', "F"},  {'F', "E"},  {'t', "f"},  {'f', "t"},
        {'C', "G"},  {'k', "x"},  {'x', "k"},  {'m', "n"},
    };
    return t;
}

ConfusionTable ConfusionTable::from_file(const std::filesystem::path& path) {
    ConfusionTable t;
    t.confusions = char_table_from_file(path);
    return t;
}

const std::vector<std::string>* MisspellTable::misspellings(const std::string& word) const {
    auto it = entries.find(word);
    if (it == entries.end()) {
        it = entries.find(to_lower_ascii(word));
        if (it == entries.end()) return nullptr;
    }
    return &it->second;
}

MisspellTable MisspellTable::builtin() {
    MisspellTable t;
    t.entries = {
        {"accommodate", {"accomodate"}}, {"achieve", {"acheive"}},
        {"across", {"accross"}},         {"aggressive", {"agressive"}},
        {"apparently", {"apparantly"}},  {"appearance", {"appearence"}},
        {"argument", {"arguement"}},     {"basically", {"basicly"}},
        {"because", {"becouse"}},        {"beginning", {"begining"}},
        {"believe", {"beleive"}},        {"bizarre", {"bizzare"}},
        {"business", {"buisness"}},      {"calendar", {"calender"}},
        {"cemetery", {"cemetary"}},      {"colleague", {"collegue"}},
        {"coming", {"comming"}},         {"committee", {"commitee"}},
        {"completely", {"completly"}},   {"conscious", {"concious"}},
        {"curiosity", {"curiousity"}},   {"definitely", {"definately"}},
        {"disappear", {"dissapear"}},    {"disappoint", {"dissapoint"}},
        {"embarrass", {"embarass"}},     {"environment", {"enviroment"}},
        {"existence", {"existance"}},    {"finally", {"finaly"}},
        {"foreign", {"foriegn"}},        {"forty", {"fourty"}},
        {"forward", {"foward"}},         {"friend", {"freind"}},
        {"further", {"futher"}},         {"government", {"goverment"}},
        {"guard", {"gaurd"}},            {"happened", {"happend"}},
        {"immediately", {"immediatly"}}, {"independent", {"independant"}},
        {"interrupt", {"interupt"}},     {"knowledge", {"knowlege"}},
        {"necessary", {"neccessary"}},   {"occasion", {"occassion"}},
        {"occurred", {"occured"}},       {"piece", {"peice"}},
        {"possession", {"posession"}},   {"preferred", {"prefered"}},
        {"really", {"realy"}},           {"receive", {"recieve"}},
        {"remember", {"rember"}},        {"sense", {"sence"}},
        {"separate", {"seperate"}},      {"successful", {"succesful"}},
        {"surprise", {"suprise"}},       {"tomorrow", {"tommorow"}},
        {"tongue", {"tounge"}},          {"truly", {"truely"}},
        {"until", {"untill"}},           {"weird", {"wierd"}},
        {"which", {"wich"}},
    };
    return t;
}

MisspellTable MisspellTable::from_file(const std::filesystem::path& path) {
    MisspellTable t;
    for (auto& [key, values] : read_tab_table(path)) {
        auto v = values;
        sort_unique(v);
        t.entries[key] = std::move(v);
    }
    return t;
}

const std::vector<std::string>* Thesaurus::synonyms(const std::string& word) const {
    auto it = synsets.find(word);
    if (it == synsets.end()) {
        it = synsets.find(to_lower_ascii(word));
        if (it == synsets.end()) return nullptr;
    }
    return &it->second;
}

Thesaurus Thesaurus::from_file(const std::filesystem::path& path, std::string tag) {
    Thesaurus th;
    th.source_tag = tag.empty() ? path.filename().string() : std::move(tag);
    th.synsets = read_tab_table(path);
    // symmetrize
    std::map<std::string, std::vector<std::string>> sym = th.synsets;
    for (const auto& [word, syns] : th.synsets) {
        for (const auto& s : syns) {
            if (s != word) sym[s].push_back(word);
        }
    }
    for (auto& [word, syns] : sym) {
        syns.erase(std::remove(syns.begin(), syns.end(), word), syns.end());
        sort_unique(syns);
    }
    std::erase_if(sym, [](const auto& kv) { return kv.second.empty(); });
    th.synsets = std::move(sym);
    return th;
}

}  // namespace textaug
