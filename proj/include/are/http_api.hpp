#ifndef ARE_HTTP_API_HPP
#define ARE_HTTP_API_HPP

#include <memory>
#include <string>

#include "json.hpp"

#include "are/pricing_service.hpp"

namespace are {

// JSON wire encoding. Limits equal to +infinity travel as the string
// "unlimited" (null is accepted on input). Field names are documented in
// docs/api.md.
nlohmann::json to_json(const LayerTerms& terms);
LayerTerms terms_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionSummary& summary);
nlohmann::json to_json(const PricingResponse& response);
PricingRequest request_from_json(const std::string& session_id, const nlohmann::json& body);
GeneratorSpec spec_from_json(const nlohmann::json& j);

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

// Transport-independent dispatch; the HTTP server and the tests both go
// through here. `method` is GET, POST or DELETE.
HttpReply handle_request(PricingService& service, const std::string& method,
                         const std::string& path, const std::string& body);

// HTTP/1.1 front end for the pricing service.
class PricingServer {
public:
    explicit PricingServer(PricingService& service);
    ~PricingServer();

    PricingServer(const PricingServer&) = delete;
    PricingServer& operator=(const PricingServer&) = delete;

    // Binds; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    // Blocks serving requests until stop().
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace are

#endif  // ARE_HTTP_API_HPP
