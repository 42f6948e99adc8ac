#include <httplib.h>
#include <nlohmann/json.hpp>

#include "expertloop/core/error.hpp"
#include "expertloop/llm/completion_provider.hpp"

namespace expertloop::llm {

std::string HttpCompletionProvider::complete(const PromptBundle& bundle) {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    nlohmann::json body{
        {"model", options_.model},
        {"temperature", 0},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", bundle.system_prompt}},
                                {{"role", "user"}, {"content", bundle.query_prompt}}})},
    };
    auto res = client.Post(options_.path, headers, body.dump(), "application/json");
    if (!res) throw Error(Errc::ProviderFailure, "transport error: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error(Errc::ProviderFailure, "HTTP " + std::to_string(res->status));

    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw Error(Errc::ProviderFailure, "response body is not JSON");
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ProviderFailure, std::string("unexpected response shape: ") + e.what());
    }
}

}  // namespace expertloop::llm
