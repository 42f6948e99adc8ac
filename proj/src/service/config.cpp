#include "expertloop/service/config.hpp"

#include <fstream>
#include <set>

#include "expertloop/core/error.hpp"

namespace expertloop::service {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<TimeOfDay> times(const nlohmann::json& j) {
    std::vector<TimeOfDay> out;
    for (const auto& t : j) out.push_back(TimeOfDay::parse(t.get<std::string>()));
    return out;
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw Error(Errc::InvalidArgument, "unknown config key " + where + key);
    }
}

}  // namespace

ServiceConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error(Errc::InvalidArgument, "config must be a JSON object");
    reject_unknown(j,
                   {"timezone", "escalation_delay", "reminder_delay", "digest_times", "seeker_reminder_times",
                    "kb_digest_time", "kb_apply_time", "allow_reroute_to_doctor", "retrieval_k", "providers",
                    "corpus_dir", "log_path", "review_dir", "audio_dir", "outbound_url", "outbound_path",
                    "admin_token", "listen_host", "listen_port", "scheduler_interval", "experts"},
                   "");
    ServiceConfig c;
    try {
        if (j.contains("timezone")) c.zone = LocalZone::parse(j["timezone"].get<std::string>());
        if (j.contains("escalation_delay")) c.escalation_delay = parse_duration(j["escalation_delay"].get<std::string>());
        if (j.contains("reminder_delay")) c.reminder_delay = parse_duration(j["reminder_delay"].get<std::string>());
        if (j.contains("digest_times")) c.digest_times = times(j["digest_times"]);
        if (j.contains("seeker_reminder_times")) c.seeker_reminder_times = times(j["seeker_reminder_times"]);
        if (j.contains("kb_digest_time")) c.kb_digest_time = TimeOfDay::parse(j["kb_digest_time"].get<std::string>());
        if (j.contains("kb_apply_time")) c.kb_apply_time = TimeOfDay::parse(j["kb_apply_time"].get<std::string>());
        c.allow_reroute_to_doctor = j.value("allow_reroute_to_doctor", c.allow_reroute_to_doctor);
        c.retrieval_k = j.value("retrieval_k", c.retrieval_k);
        if (j.contains("providers")) {
            const auto& p = j["providers"];
            reject_unknown(p,
                           {"llm", "llm_base_url", "llm_path", "llm_model", "llm_api_key_env", "embedding",
                            "embedding_dimension", "translator", "translations", "missing_phrase_policy",
                            "speech_to_text", "audio_fixtures", "text_to_speech"},
                           "providers.");
            auto& o = c.providers;
            o.llm = p.value("llm", o.llm);
            o.llm_base_url = p.value("llm_base_url", o.llm_base_url);
            o.llm_path = p.value("llm_path", o.llm_path);
            o.llm_model = p.value("llm_model", o.llm_model);
            o.llm_api_key_env = p.value("llm_api_key_env", o.llm_api_key_env);
            o.embedding = p.value("embedding", o.embedding);
            o.embedding_dimension = p.value("embedding_dimension", o.embedding_dimension);
            o.translator = p.value("translator", o.translator);
            o.translations = resolve(base_dir, p.value("translations", std::string()));
            o.missing_phrase_policy = p.value("missing_phrase_policy", o.missing_phrase_policy);
            o.speech_to_text = p.value("speech_to_text", o.speech_to_text);
            o.audio_fixtures = resolve(base_dir, p.value("audio_fixtures", std::string()));
            o.text_to_speech = p.value("text_to_speech", o.text_to_speech);
            if (o.llm != "mock" && o.llm != "http") throw Error(Errc::InvalidArgument, "providers.llm: " + o.llm);
            if (o.missing_phrase_policy != "tag" && o.missing_phrase_policy != "fail") {
                throw Error(Errc::InvalidArgument, "providers.missing_phrase_policy: " + o.missing_phrase_policy);
            }
        }
        c.corpus_dir = resolve(base_dir, j.value("corpus_dir", std::string()));
        c.log_path = resolve(base_dir, j.value("log_path", std::string()));
        c.review_dir = resolve(base_dir, j.value("review_dir", std::string()));
        c.audio_dir = resolve(base_dir, j.value("audio_dir", std::string()));
        c.outbound_url = j.value("outbound_url", c.outbound_url);
        c.outbound_path = j.value("outbound_path", c.outbound_path);
        c.admin_token = j.value("admin_token", c.admin_token);
        c.listen_host = j.value("listen_host", c.listen_host);
        c.listen_port = j.value("listen_port", c.listen_port);
        if (j.contains("scheduler_interval")) c.scheduler_interval = parse_duration(j["scheduler_interval"].get<std::string>());
        for (const auto& e : j.value("experts", nlohmann::json::array())) {
            c.experts.push_back({e.at("user_id").get<std::string>(), parse_role(e.at("role").get<std::string>()),
                                 e.at("channel_address").get<std::string>(), e.value("display_name", "")});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("config: ") + e.what());
    }
    return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidArgument, "cannot read config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, "config " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

}  // namespace expertloop::service
