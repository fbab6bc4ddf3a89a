#pragma once

#include <memory>
#include <string>
#include <vector>

namespace miir {

struct GatewayConfig {
    std::string base_url = "http://127.0.0.1:8230";
    int timeout_ms = 10000;
    int retries = 3;           ///< transport retries beyond the first attempt
    int backoff_ms = 100;      ///< initial backoff, doubled per retry
    double nucleus_p = 0.95;   ///< decoding hint forwarded to /generate
    int max_in_flight = 4;

    void validate() const;
};

/// HTTP JSON client for the model gateway. One protocol, four verbs:
///   POST /generate {prompt, nucleus_p} -> {text}
///   POST /answer   {prompt}           -> {text}
///   POST /embed    {texts:[...]}      -> {vectors:[[...]]}
///   POST /score    {prompt}           -> {logprob_true}
/// Non-2xx responses carry {error}. Transport failures are retried with
/// exponential backoff; in-flight requests are bounded by max_in_flight.
class GatewayClient {
  public:
    explicit GatewayClient(GatewayConfig config);
    ~GatewayClient();

    GatewayClient(const GatewayClient&) = delete;
    GatewayClient& operator=(const GatewayClient&) = delete;

    std::string generate(const std::string& prompt) const;
    std::string answer_text(const std::string& prompt) const;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const;
    double score(const std::string& prompt) const;

    const GatewayConfig& config() const { return config_; }

  private:
    std::string post(const std::string& path, const std::string& body) const;

    GatewayConfig config_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace miir
