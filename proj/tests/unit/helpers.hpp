#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace test_helpers {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(FIXTURES_DIR) / name;
}

// Scratch file removed on scope exit.
class TempFile {
public:
    explicit TempFile(const std::string& name, const std::string& content) {
        path_ = std::filesystem::temp_directory_path() / ("textaug-test-" + name);
        std::ofstream out(path_);
        out << content;
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() / ("textaug-test-" + name);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace test_helpers
