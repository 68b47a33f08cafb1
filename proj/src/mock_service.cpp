#include "textaug/mock_service.hpp"

#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "textaug/errors.hpp"

namespace textaug {

using nlohmann::json;

struct MockService::Impl {
    struct ChatRule {
        std::string if_contains;
        std::vector<std::string> contents;
        std::vector<int> statuses;
        int calls = 0;
    };
    struct MaskRule {
        std::string if_contains;
        std::string token;
    };
    struct TranslateRule {
        std::string text, source, target, out;
    };

    std::vector<ChatRule> chat_rules;
    std::string chat_default;
    std::vector<MaskRule> mask_rules;
    std::string mask_default;
    std::vector<TranslateRule> translate_rules;
    bool translate_identity_default = true;

    httplib::Server server;
    std::thread worker;
    int bound_port = 0;

    mutable std::mutex mutex;
    Counters counters;

    void load(const json& fixture) {
        if (fixture.contains("chat")) {
            const auto& chat = fixture["chat"];
            chat_default = chat.value("default_content", std::string{});
            for (const auto& r : chat.value("rules", json::array())) {
                ChatRule rule;
                rule.if_contains = r.value("if_contains", std::string{});
                if (r.contains("content")) {
                    if (r["content"].is_array()) {
                        for (const auto& c : r["content"]) rule.contents.push_back(c.get<std::string>());
                    } else {
                        rule.contents.push_back(r["content"].get<std::string>());
                    }
                }
                for (const auto& s : r.value("status_sequence", json::array())) {
                    rule.statuses.push_back(s.get<int>());
                }
                chat_rules.push_back(std::move(rule));
            }
        }
        if (fixture.contains("fill_mask")) {
            const auto& fm = fixture["fill_mask"];
            mask_default = fm.value("default_token", std::string{});
            for (const auto& r : fm.value("rules", json::array())) {
                mask_rules.push_back({r.value("if_contains", std::string{}),
                                      r.value("token", std::string{})});
            }
        }
        if (fixture.contains("translate")) {
            const auto& tr = fixture["translate"];
            translate_identity_default = tr.value("identity_default", true);
            for (const auto& r : tr.value("rules", json::array())) {
                translate_rules.push_back({r.value("text", std::string{}),
                                           r.value("source", std::string{}),
                                           r.value("target", std::string{}),
                                           r.value("out", std::string{})});
            }
        }
    }

    void route() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            {
                std::lock_guard lock(mutex);
                ++counters.chat;
            }
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception&) {
                res.status = 400;
                res.set_content(R"({"error":"invalid json"})", "application/json");
                return;
            }
            std::string last_user;
            for (const auto& m : body.value("messages", json::array())) {
                if (m.value("role", std::string{}) == "user") {
                    last_user = m.value("content", std::string{});
                }
            }
            std::lock_guard lock(mutex);
            for (auto& rule : chat_rules) {
                if (!rule.if_contains.empty() &&
                    last_user.find(rule.if_contains) == std::string::npos) {
                    continue;
                }
                int call = rule.calls++;
                int status = 200;
                if (!rule.statuses.empty()) {
                    status = rule.statuses[std::min<std::size_t>(
                        static_cast<std::size_t>(call), rule.statuses.size() - 1)];
                }
                if (status != 200) {
                    res.status = status;
                    res.set_content(R"({"error":"scripted failure"})", "application/json");
                    return;
                }
                std::string content =
                    rule.contents.empty()
                        ? chat_default
                        : rule.contents[static_cast<std::size_t>(call) % rule.contents.size()];
                json reply{{"choices",
                            json::array({json{{"message", {{"role", "assistant"},
                                                           {"content", content}}}}})}};
                res.set_content(reply.dump(), "application/json");
                return;
            }
            if (!chat_default.empty()) {
                json reply{{"choices",
                            json::array({json{{"message", {{"role", "assistant"},
                                                           {"content", chat_default}}}}})}};
                res.set_content(reply.dump(), "application/json");
                return;
            }
            res.status = 404;
            res.set_content(R"({"error":"no matching chat rule"})", "application/json");
        });

        server.Post("/fill_mask", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(mutex);
                ++counters.fill_mask;
            }
            json body = json::parse(req.body, nullptr, false);
            std::string text = body.is_object() ? body.value("text_with_mask", std::string{}) : "";
            std::lock_guard lock(mutex);
            std::string token = mask_default;
            for (const auto& rule : mask_rules) {
                if (!rule.if_contains.empty() && text.find(rule.if_contains) == std::string::npos) {
                    continue;
                }
                token = rule.token;
                break;
            }
            if (token.empty()) {
                res.status = 404;
                res.set_content(R"({"error":"no matching fill-mask rule"})", "application/json");
                return;
            }
            json reply{{"candidates", json::array({json{{"token", token}, {"score", 1.0}}})}};
            res.set_content(reply.dump(), "application/json");
        });

        server.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(mutex);
                ++counters.translate;
            }
            json body = json::parse(req.body, nullptr, false);
            std::string text = body.is_object() ? body.value("text", std::string{}) : "";
            std::string source = body.is_object() ? body.value("source", std::string{}) : "";
            std::string target = body.is_object() ? body.value("target", std::string{}) : "";
            std::lock_guard lock(mutex);
            for (const auto& rule : translate_rules) {
                if (rule.text == text && rule.source == source && rule.target == target) {
                    res.set_content(json{{"text", rule.out}}.dump(), "application/json");
                    return;
                }
            }
            if (translate_identity_default) {
                res.set_content(json{{"text", text}}.dump(), "application/json");
                return;
            }
            res.status = 404;
            res.set_content(R"({"error":"no matching translation rule"})", "application/json");
        });

        server.Get("/__calls", [this](const httplib::Request&, httplib::Response& res) {
            std::lock_guard lock(mutex);
            json reply{{"chat", counters.chat},
                       {"fill_mask", counters.fill_mask},
                       {"translate", counters.translate}};
            res.set_content(reply.dump(), "application/json");
        });

        server.Post("/__reset", [this](const httplib::Request&, httplib::Response& res) {
            std::lock_guard lock(mutex);
            counters = Counters{};
            for (auto& rule : chat_rules) rule.calls = 0;
            res.set_content(R"({"ok":true})", "application/json");
        });
    }
};

MockService::MockService(json fixture) : impl_(std::make_unique<Impl>()) {
    impl_->load(fixture);
    impl_->route();
}

MockService::~MockService() {
    if (impl_) stop();
}

MockService::MockService(MockService&&) noexcept = default;
MockService& MockService::operator=(MockService&&) noexcept = default;

MockService MockService::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open fixture file '" + path.string() + "'");
    json fixture;
    try {
        in >> fixture;
    } catch (const json::exception& e) {
        throw ConfigError("fixture file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return MockService(fixture);
}

int MockService::start(int port) {
    if (port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) {
            throw ServiceError("cannot bind mock server to port " + std::to_string(port));
        }
        impl_->bound_port = port;
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->bound_port;
}

void MockService::stop() {
    if (impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

int MockService::port() const {
    return impl_->bound_port;
}

std::string MockService::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->bound_port);
}

std::string MockService::chat_url() const {
    return base_url() + "/v1/chat/completions";
}

std::string MockService::fill_mask_url() const {
    return base_url() + "/fill_mask";
}

std::string MockService::translate_url() const {
    return base_url() + "/translate";
}

MockService::Counters MockService::counters() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->counters;
}

void MockService::reset() {
    std::lock_guard lock(impl_->mutex);
    impl_->counters = Counters{};
    for (auto& rule : impl_->chat_rules) rule.calls = 0;
}

}  // namespace textaug
