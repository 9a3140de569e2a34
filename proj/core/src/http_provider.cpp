#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rca/gateway.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <regex>

namespace rca {

namespace {

using nlohmann::json;

struct Endpoint {
    std::string scheme_host_port;
    std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) {
        throw ProviderError("endpoint must look like http(s)://host[:port][/path]: '" + url + "'", false);
    }
    std::string base = m[2].str();
    while (!base.empty() && base.back() == '/') base.pop_back();
    return {m[1].str(), base};
}

class OpenAICompatibleProvider : public Provider {
public:
    std::string complete(const ModelRequest& request, const RoleConfig& role) override {
        if (role.endpoint.empty()) throw ProviderError("role has no endpoint configured", false);
        const auto endpoint = split_endpoint(role.endpoint);

        httplib::Client client(endpoint.scheme_host_port);
        client.set_connection_timeout(30);
        client.set_read_timeout(600);

        httplib::Headers headers;
        if (!role.credential_env.empty()) {
            const char* key = std::getenv(role.credential_env.c_str());
            if (!key || !*key) {
                throw ProviderError("credential variable " + role.credential_env + " is not set", false);
            }
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        json body = {
            {"model", role.model},
            {"temperature", request.temperature},
            {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
        };

        auto result = client.Post(endpoint.base_path + "/chat/completions", headers, body.dump(),
                                  "application/json");
        if (!result) {
            throw ProviderError("request to " + role.endpoint + " failed: " + httplib::to_string(result.error()),
                                true);
        }
        if (result->status == 429 || result->status >= 500) {
            throw ProviderError("provider returned HTTP " + std::to_string(result->status), true);
        }
        if (result->status != 200) {
            throw ProviderError("provider returned HTTP " + std::to_string(result->status) + ": " +
                                    result->body.substr(0, 500),
                                false);
        }
        const auto reply = json::parse(result->body, nullptr, false);
        try {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw ProviderError("unexpected response shape: " + result->body.substr(0, 500), false);
        }
    }
};

}  // namespace

std::shared_ptr<Provider> make_http_provider() { return std::make_shared<OpenAICompatibleProvider>(); }

}  // namespace rca
