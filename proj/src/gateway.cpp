#include "miir/gateway.hpp"

#include <chrono>
#include <cmath>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "miir/common.hpp"

namespace miir {

using nlohmann::json;

void GatewayConfig::validate() const {
    if (timeout_ms <= 0) throw ConfigError("gateway timeout must be positive");
    if (retries < 0) throw ConfigError("gateway retries must be >= 0");
    if (nucleus_p <= 0.0 || nucleus_p > 1.0) throw ConfigError("nucleus_p must lie in (0,1]");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

struct GatewayClient::Impl {
    explicit Impl(const GatewayConfig& cfg): client(cfg.base_url), slots(cfg.max_in_flight) {
        client.set_connection_timeout(0, cfg.timeout_ms * 1000);
        client.set_read_timeout(0, cfg.timeout_ms * 1000);
        client.set_write_timeout(0, cfg.timeout_ms * 1000);
        client.set_keep_alive(true);
    }
    httplib::Client client;
    std::counting_semaphore<256> slots;
};

GatewayClient::GatewayClient(GatewayConfig config): config_(std::move(config)) {
    config_.validate();
    impl_ = std::make_unique<Impl>(config_);
}

GatewayClient::~GatewayClient() = default;

std::string GatewayClient::post(const std::string& path, const std::string& body) const {
    int attempts = 0;
    int backoff = config_.backoff_ms;
    while (true) {
        ++attempts;
        impl_->slots.acquire();
        auto res = impl_->client.Post(path, body, "application/json");
        impl_->slots.release();
        if (res) {
            if (res->status < 200 || res->status >= 300) {
                std::string detail = res->body;
                try {
                    detail = json::parse(res->body).value("error", res->body);
                } catch (const json::exception&) {
                }
                throw GatewayError("gateway " + path + " returned status " + std::to_string(res->status) + ": " +
                                       detail,
                                   attempts);
            }
            return res->body;
        }
        if (attempts > config_.retries) {
            throw GatewayError("gateway " + path + " unreachable after " + std::to_string(attempts) +
                                   " attempts: " + httplib::to_string(res.error()),
                               attempts);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
    }
}

namespace {

json parse_response(const std::string& body, const std::string& verb) {
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError("gateway /" + verb + " returned malformed JSON: " + e.what());
    }
}

}  // namespace

std::string GatewayClient::generate(const std::string& prompt) const {
    const json req = {{"prompt", prompt}, {"nucleus_p", config_.nucleus_p}};
    const auto res = parse_response(post("/generate", req.dump()), "generate");
    if (!res.contains("text") || !res.at("text").is_string()) {
        throw ProtocolError("gateway /generate response lacks a string `text` field");
    }
    return res.at("text").get<std::string>();
}

std::string GatewayClient::answer_text(const std::string& prompt) const {
    const json req = {{"prompt", prompt}};
    const auto res = parse_response(post("/answer", req.dump()), "answer");
    if (!res.contains("text") || !res.at("text").is_string()) {
        throw ProtocolError("gateway /answer response lacks a string `text` field");
    }
    return res.at("text").get<std::string>();
}

std::vector<std::vector<double>> GatewayClient::embed(const std::vector<std::string>& texts) const {
    const json req = {{"texts", texts}};
    const auto res = parse_response(post("/embed", req.dump()), "embed");
    if (!res.contains("vectors") || !res.at("vectors").is_array()) {
        throw ProtocolError("gateway /embed response lacks a `vectors` array");
    }
    try {
        return res.at("vectors").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("gateway /embed vectors are not numeric arrays: ") + e.what());
    }
}

double GatewayClient::score(const std::string& prompt) const {
    const json req = {{"prompt", prompt}};
    const auto res = parse_response(post("/score", req.dump()), "score");
    if (!res.contains("logprob_true") || !res.at("logprob_true").is_number()) {
        throw ProtocolError("gateway /score response lacks a numeric `logprob_true` field");
    }
    return res.at("logprob_true").get<double>();
}

}  // namespace miir
