#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

namespace textaug {

// Offline stand-in for the chat-completion, fill-mask and translation
// services, driven by a scripted fixture. Serves the same wire formats
// plus GET /__calls (per-endpoint counters) and POST /__reset.
//
// Fixture schema:
//   {
//     "chat": {
//       "rules": [{"if_contains": "...", "content": "..." or ["...", ...],
//                  "status_sequence": [429, 429, 200]}],
//       "default_content": "..."
//     },
//     "fill_mask": {"rules": [{"if_contains": "...", "token": "..."}],
//                   "default_token": "..."},
//     "translate": {"rules": [{"text": "...", "source": "en", "target": "de",
//                              "out": "..."}],
//                   "identity_default": true}
//   }
// A rule's n-th call answers with status_sequence[n] (the last entry
// repeats) and cycles through its contents.
class MockService {
public:
    explicit MockService(nlohmann::json fixture);
    ~MockService();

    MockService(MockService&&) noexcept;
    MockService& operator=(MockService&&) noexcept;

    static MockService from_file(const std::filesystem::path& path);

    // Binds 127.0.0.1 (an ephemeral port when port == 0) and serves on a
    // background thread. Returns the bound port.
    int start(int port = 0);
    void stop();
    int port() const;

    std::string base_url() const;
    std::string chat_url() const;
    std::string fill_mask_url() const;
    std::string translate_url() const;

    struct Counters {
        int chat = 0;
        int fill_mask = 0;
        int translate = 0;
    };
    Counters counters() const;
    void reset();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace textaug
