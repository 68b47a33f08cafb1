#include "textaug/embed_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "textaug/errors.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

using nlohmann::json;

namespace {

bool all_zero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double parse_number(const std::string& tok, const std::string& where) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw IngestError(where + ": '" + tok + "' is not a number");
    }
    return value;
}

}  // namespace

bool EmbeddingStore::contains(const std::string& word) const {
    return vectors_.count(word) > 0;
}

std::optional<std::string> EmbeddingStore::resolve(const std::string& word) const {
    if (vectors_.count(word)) return word;
    std::string lower = to_lower_ascii(word);
    if (lower != word && vectors_.count(lower)) return lower;
    return std::nullopt;
}

const std::vector<double>& EmbeddingStore::vector_of(const std::string& word) const {
    auto it = vectors_.find(word);
    if (it == vectors_.end()) throw DomainError("word '" + word + "' not in vocabulary");
    return it->second;
}

bool EmbeddingStore::has_sentence_vector(const std::string& sample_id) const {
    return sentences_.count(sample_id) > 0;
}

const std::vector<double>& EmbeddingStore::sentence_vector(const std::string& sample_id) const {
    auto it = sentences_.find(sample_id);
    if (it == sentences_.end()) throw DomainError("no sentence vector for id '" + sample_id + "'");
    return it->second;
}

void EmbeddingStore::check_dim(std::size_t n, const std::string& where) {
    if (dim_ == 0) {
        dim_ = static_cast<int>(n);
        if (dim_ == 0) throw IngestError(where + ": zero-dimensional vector");
    } else if (n != static_cast<std::size_t>(dim_)) {
        throw IngestError(where + ": expected " + std::to_string(dim_) + " values, got " +
                          std::to_string(n));
    }
}

void EmbeddingStore::insert_word(const std::string& word, std::vector<double> vec) {
    check_dim(vec.size(), "word '" + word + "'");
    if (all_zero(vec)) throw IngestError("word '" + word + "' has an all-zero vector");
    auto [it, inserted] = vectors_.insert_or_assign(word, std::move(vec));
    (void)it;
    if (inserted) {
        words_.insert(std::upper_bound(words_.begin(), words_.end(), word), word);
    } else {
        ++duplicates_;
    }
}

void EmbeddingStore::insert_sentence(const std::string& sample_id, std::vector<double> vec) {
    check_dim(vec.size(), "sentence '" + sample_id + "'");
    if (all_zero(vec)) throw IngestError("sentence '" + sample_id + "' has an all-zero vector");
    sentences_.insert_or_assign(sample_id, std::move(vec));
}

EmbeddingStore EmbeddingStore::load_word2vec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    EmbeddingStore store;
    store.source_tag_ = path.filename().string();
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        std::vector<std::string> toks;
        std::string tok;
        while (row >> tok) toks.push_back(tok);
        std::string where = "line " + std::to_string(lineno) + " of '" + path.string() + "'";
        if (first && toks.size() == 2) {
            // optional "count dim" header
            bool numeric = true;
            for (const auto& t : toks) {
                for (char c : t) {
                    if (!std::isdigit(static_cast<unsigned char>(c))) numeric = false;
                }
            }
            if (numeric) {
                first = false;
                continue;
            }
        }
        first = false;
        if (toks.size() < 2) throw IngestError(where + ": too few fields");
        std::vector<double> vec;
        vec.reserve(toks.size() - 1);
        for (std::size_t i = 1; i < toks.size(); ++i) vec.push_back(parse_number(toks[i], where));
        try {
            store.insert_word(toks[0], std::move(vec));
        } catch (const IngestError& e) {
            throw IngestError(where + ": " + e.what());
        }
    }
    if (store.vocab_size() == 0) throw IngestError("no vectors in '" + path.string() + "'");
    return store;
}

EmbeddingStore EmbeddingStore::load_sentence_jsonl(const std::filesystem::path& path) {
    EmbeddingStore store;
    store.source_tag_ = path.filename().string();
    store.merge_sentence_jsonl(path);
    return store;
}

void EmbeddingStore::merge_sentence_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::string where = "line " + std::to_string(lineno) + " of '" + path.string() + "'";
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw IngestError(where + ": invalid JSON: " + e.what());
        }
        if (!obj.contains("id") || !obj.contains("vector")) {
            throw IngestError(where + ": expected fields 'id' and 'vector'");
        }
        std::string id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
        std::vector<double> vec = obj["vector"].get<std::vector<double>>();
        try {
            insert_sentence(id, std::move(vec));
        } catch (const IngestError& e) {
            throw IngestError(where + ": " + e.what());
        }
    }
}

EmbeddingStore load_vectors(const std::filesystem::path& path, VectorFormat format) {
    switch (format) {
        case VectorFormat::word2vec_text: return EmbeddingStore::load_word2vec(path);
        case VectorFormat::jsonl_id_vector: return EmbeddingStore::load_sentence_jsonl(path);
    }
    throw ConfigError("unhandled vector format");
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DomainError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw DomainError("cosine undefined for a zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::pair<std::string, double>> top_n_neighbors(const EmbeddingStore& store,
                                                            const std::string& word, int n) {
    auto resolved = store.resolve(word);
    if (!resolved) throw DomainError("word '" + word + "' not in vocabulary");
    if (n < 0) throw DomainError("top_n_neighbors: n must be non-negative");
    const auto& query = store.vector_of(*resolved);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(store.vocab_size());
    for (const auto& candidate : store.vocabulary()) {
        if (candidate == *resolved) continue;
        scored.emplace_back(candidate, cosine(query, store.vector_of(candidate)));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (scored.size() > static_cast<std::size_t>(n)) scored.resize(static_cast<std::size_t>(n));
    return scored;
}

std::vector<double> sentence_embed(const EmbeddingStore& store, const std::string& text,
                                   const std::string& sample_id) {
    if (!sample_id.empty() && store.has_sentence_vector(sample_id)) {
        return store.sentence_vector(sample_id);
    }
    std::vector<std::string> resolved;
    for (const auto& tok : tokenize(text)) {
        if (auto r = store.resolve(tok)) resolved.push_back(*r);
    }
    if (resolved.empty()) {
        throw DomainError("no in-vocabulary token in text and no sentence vector" +
                          (sample_id.empty() ? std::string() : " for id '" + sample_id + "'"));
    }
    // canonical summation order => exact permutation invariance
    std::sort(resolved.begin(), resolved.end());
    std::vector<double> sum(static_cast<std::size_t>(store.dim()), 0.0);
    for (const auto& word : resolved) {
        const auto& v = store.vector_of(word);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
    for (auto& x : sum) x /= static_cast<double>(resolved.size());
    return sum;
}

}  // namespace textaug
