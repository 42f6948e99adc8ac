#include "expertloop/sim/runner.hpp"

#include <fstream>
#include <map>

#include "expertloop/channel/wire.hpp"
#include "expertloop/core/error.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/core/text.hpp"
#include "expertloop/kb/review_sheet.hpp"
#include "expertloop/language/providers.hpp"
#include "expertloop/service/service.hpp"

#ifndef EXPERTLOOP_DEFAULT_CONFIG
#define EXPERTLOOP_DEFAULT_CONFIG "data/config.json"
#endif

namespace expertloop::sim {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\n') out += "\\n";
        else out += c;
    }
    return out;
}

std::string str_arg(const Step& step, const char* key, bool required = true) {
    auto it = step.args.find(key);
    if (it == step.args.end() || it->is_null()) {
        if (required) throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": missing '" + key + "'");
        return {};
    }
    return it->is_string() ? it->get<std::string>() : it->dump();
}

bool payload_matches(const nlohmann::json& payload, const nlohmann::json& where) {
    for (const auto& [k, v] : where.items()) {
        if (!payload.contains(k)) return false;
        const auto& p = payload[k];
        auto ps = p.is_string() ? p.get<std::string>() : p.dump();
        auto vs = v.is_string() ? v.get<std::string>() : v.dump();
        if (ps != vs) return false;
    }
    return true;
}

// Text a recipient sees in a payload, for matching.
std::string visible_text(const nlohmann::json& w) {
    auto kind = w.value("kind", "");
    if (kind == "text" || kind == "tagged_reply" || kind == "buttons") return w.value("text", "");
    if (kind == "suggestions") return w.value("header", "") + "\n" + text::join(w.value("options", std::vector<std::string>{}), "\n");
    if (kind == "audio") return w.value("audio_ref", "");
    if (kind == "reaction") return w.value("glyph", "");
    return "";
}

class Runner {
public:
    Runner(const ScenarioScript& script, const RunOptions& options) : script_(script), options_(options) {
        auto path = options.config_path.empty() ? std::filesystem::path(default_config_path()) : options.config_path;
        std::ifstream in(path);
        if (!in) throw Error(Errc::ScriptError, "cannot read config " + path.string());
        auto base = nlohmann::json::parse(in);
        base.merge_patch(script.config);
        config_ = service::parse_config(base, path.parent_path());
        config_.log_path.clear();
        config_.review_dir.clear();
        config_.audio_dir.clear();
        config_.outbound_url.clear();
        sink_ = std::make_shared<channel::CapturingSink>();
        review_ = std::make_shared<kb::MemoryReviewSink>();
        for (const auto& e : config_.experts) alias_to_address_[e.user_id] = e.channel_address;
    }

    RunResult run() {
        RunResult result;
        build({}, script_.start);
        for (const auto& p : script_.profiles) onboard(p.form, p.patient_alias, p.attendant_alias, script_.start);
        for (std::size_t i = 0; i < script_.steps.size(); ++i) {
            if (options_.restart_after_step == i) restart(script_.steps[i].at);
            execute(script_.steps[i], result);
        }
        if (options_.restart_after_step && *options_.restart_after_step >= script_.steps.size()) {
            restart(script_.steps.empty() ? script_.start : script_.steps.back().at);
        }
        result.events = log_->records();
        collect(result);
        for (const auto& e : script_.expectations) result.expectations.push_back(evaluate(e, result));
        result.snapshot = service_->snapshot();
        return result;
    }

private:
    void build(std::vector<EventRecord> records, Timestamp now) {
        log_ = std::make_shared<MemoryEventLog>(records);
        service::ServiceOverrides o;
        o.log = log_;
        o.replay = std::move(records);
        o.outbound = sink_;
        o.review_sink = review_;
        o.sleeper = [](Seconds) {};
        service_ = std::make_unique<service::Service>(config_, std::move(o));
        service_->start(now);
    }

    void restart(Timestamp now) {
        auto records = log_->records();
        service_.reset();
        build(std::move(records), now);
    }

    void onboard(const nlohmann::json& form_json, const std::string& patient_alias, const std::string& attendant_alias,
                 Timestamp now) {
        auto form = onboarding::parse_form(form_json);
        service_->onboard(form, now);
        if (!patient_alias.empty() && form.patient_phone) alias_to_address_[patient_alias] = *form.patient_phone;
        if (!attendant_alias.empty() && form.attendant_phone) alias_to_address_[attendant_alias] = *form.attendant_phone;
    }

    std::string address_of(const Step& step) const {
        auto it = alias_to_address_.find(step.actor);
        if (it == alias_to_address_.end()) {
            throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": unknown actor '" + step.actor + "'");
        }
        return it->second;
    }

    UserProfile profile_of(const Step& step) const {
        auto p = service_->registry().find_by_address(address_of(step));
        if (!p) throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": actor not registered");
        return *p;
    }

    workflow::VerificationTask task_ref(const Step& step, const std::string& ref) const {
        auto tasks = service_->workflow().tasks();
        if (tasks.empty()) throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": no tasks yet");
        if (ref.empty() || ref == "last") return tasks.back();
        auto n = std::stoul(ref);
        if (n < 1 || n > tasks.size()) {
            throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": no task " + ref);
        }
        return tasks[n - 1];
    }

    std::optional<MessageId> last_buttons_for(const UserId& user) const {
        const auto& records = log_->records();
        for (auto it = records.rbegin(); it != records.rend(); ++it) {
            const auto& ev = it->event;
            if (ev.kind != event_kind::kOutboundDispatched || ev.payload.value("user_id", "") != user) continue;
            if (ev.payload["payload"].value("kind", "") == "buttons") return ev.payload["payload"]["message_id"].get<std::string>();
        }
        return std::nullopt;
    }

    channel::InboundMessage inbound(const Step& step, channel::InboundKind kind) {
        channel::InboundMessage m;
        m.sender = address_of(step);
        m.message_id = "wamid.in" + std::to_string(++inbound_seq_);
        m.timestamp = step.at;
        m.kind = kind;
        return m;
    }

    void execute(const Step& step, RunResult& result) {
        auto expected = str_arg(step, "expect_error", false);
        try {
            perform(step);
            if (!expected.empty()) {
                result.errors.push_back("line " + std::to_string(step.line) + ": expected " + expected + ", got success");
            }
        } catch (const Error& e) {
            if (e.code() == Errc::ScriptError) throw;
            if (expected != to_string(e.code())) {
                result.errors.push_back("line " + std::to_string(step.line) + ": " + e.what());
            }
        }
    }

    void perform(const Step& step) {
        const auto& a = step.action;
        if (a == "advance_clock") {
            service_->advance_to(step.at);
        } else if (a == "restart") {
            restart(step.at);
        } else if (a == "onboard") {
            if (!step.args.contains("form")) throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": missing 'form'");
            onboard(step.args["form"], str_arg(step, "patient", false), str_arg(step, "attendant", false), step.at);
        } else if (a == "send_text" || a == "submit_correction_text") {
            auto m = inbound(step, channel::InboundKind::Text);
            m.text = str_arg(step, "text");
            if (a == "submit_correction_text" && step.args.contains("task")) {
                auto t = task_ref(step, str_arg(step, "task"));
                if (t.correction_request_message) m.context_message_id = t.correction_request_message;
            }
            service_->handle_inbound(m, step.at);
        } else if (a == "send_audio_fixture" || a == "send_audio_bytes") {
            auto m = inbound(step, channel::InboundKind::Audio);
            m.audio = a == "send_audio_fixture" ? language::MockSpeechToText::fixture_audio(str_arg(step, "fixture"))
                                                : str_arg(step, "bytes");
            service_->handle_inbound(m, step.at);
        } else if (a == "tap_suggestion") {
            auto m = inbound(step, channel::InboundKind::SuggestionPick);
            m.suggestion_index = std::stoi(str_arg(step, "index"));
            service_->handle_inbound(m, step.at);
        } else if (a == "press_button") {
            auto m = inbound(step, channel::InboundKind::ButtonPress);
            m.button_label = str_arg(step, "label");
            auto expert = profile_of(step);
            auto context = str_arg(step, "context", false);
            if (step.args.contains("task")) {
                auto t = task_ref(step, str_arg(step, "task"));
                auto it = t.button_messages.find(expert.user_id);
                if (it != t.button_messages.end()) m.context_message_id = it->second;
            } else if (context != "none") {
                m.context_message_id = last_buttons_for(expert.user_id);
            }
            service_->handle_inbound(m, step.at);
        } else if (a == "api_decision") {
            auto t = task_ref(step, str_arg(step, "task", false));
            service_->decide(profile_of(step).user_id, t.task_id, parse_decision(str_arg(step, "decision")), step.at);
        } else if (a == "api_correction") {
            auto t = task_ref(step, str_arg(step, "task", false));
            service_->correct(profile_of(step).user_id, t.task_id, str_arg(step, "text"), step.at);
        } else if (a == "upload_review") {
            upload_review(step);
        }
    }

    void upload_review(const Step& step) {
        std::vector<kb::ReviewRow> rows;
        if (step.args.value("approve_all", false)) {
            if (review_->sheets.empty()) throw Error(Errc::ScriptError, "line " + std::to_string(step.line) + ": no review sheet emitted yet");
            rows = review_->sheets.back().rows;
            for (auto& r : rows) r.should_update = kb::ShouldUpdate::Yes;
        } else {
            for (const auto& r : step.args.value("rows", nlohmann::json::array())) {
                Step sub = step;
                sub.args = r;
                auto t = task_ref(step, str_arg(sub, "task", false));
                auto emitted = service_->kb().emitted_row(t.task_id);
                kb::ReviewRow row = emitted ? *emitted : kb::ReviewRow{t.task_id};
                row.should_update = kb::parse_should_update(str_arg(sub, "should_update", false));
                if (r.contains("final_answer_for_kb")) row.final_answer_for_kb = str_arg(sub, "final_answer_for_kb");
                rows.push_back(row);
            }
        }
        // through the CSV codec, as an uploaded sheet would arrive
        service_->review(kb::parse_csv(kb::render_csv(rows)), step.at);
    }

    std::string alias_for_user(const UserId& user) const {
        auto p = service_->registry().find(user);
        if (!p) return user;
        for (const auto& [alias, address] : alias_to_address_) {
            if (address == p->channel_address) return alias;
        }
        return user;
    }

    std::string ref(const std::string& message_id) {
        auto [it, inserted] = refs_.emplace(message_id, refs_.size() + 1);
        return "#" + std::to_string(it->second);
    }

    void collect(RunResult& result) {
        std::string out;
        for (const auto& rec : result.events) {
            const auto& ev = rec.event;
            auto when = format_rfc3339(ev.at, config_.zone).substr(0, 19);
            when[10] = ' ';
            if (ev.kind == event_kind::kTaskCreated) {
                result.edges.insert({"", "AwaitingOperating"});
            } else if (ev.kind == event_kind::kTaskTransition) {
                result.edges.insert({ev.payload["from"].get<std::string>(), ev.payload["to"].get<std::string>()});
            } else if (ev.kind == event_kind::kInboundReceived) {
                const auto& p = ev.payload;
                auto kind = p.value("kind", "");
                std::string line = when + " " + alias_for_user(p.value("user_id", "")) + " -> bot " + kind + " " +
                                   ref(p.value("message_id", ""));
                if (p.contains("context_message_id")) line += " re " + ref(p["context_message_id"].get<std::string>());
                if (kind == "audio") line += ": <audio " + p.value("audio_ref", "").substr(0, 12) + ">";
                else if (kind == "suggestion") line += ": " + std::to_string(p.value("suggestion_index", 0));
                else line += ": " + escape(p.value("text", ""));
                out += line + "\n";
            } else if (ev.kind == event_kind::kOutboundDispatched) {
                const auto& w = ev.payload["payload"];
                auto to = alias_for_user(ev.payload.value("user_id", ""));
                result.outbound.push_back({ev.at, rec.offset, to, w});
                auto kind = w.value("kind", "");
                std::string line = when + " bot -> " + to + " " + kind + " " + ref(w.value("message_id", ""));
                if (w.contains("target_message_id")) line += " re " + ref(w["target_message_id"].get<std::string>());
                if (kind == "buttons") {
                    line += ": " + escape(w.value("text", ""));
                    for (const auto& b : w["buttons"]) line += " [" + b.get<std::string>() + "]";
                } else if (kind == "suggestions") {
                    line += ": " + escape(w.value("header", ""));
                    int i = 0;
                    for (const auto& o : w["options"]) line += " | " + std::to_string(++i) + ") " + o.get<std::string>();
                } else if (kind == "audio") {
                    line += ": <audio " + w.value("audio_ref", "").substr(0, 12) + ">";
                } else {
                    line += ": " + escape(visible_text(w));
                }
                out += line + "\n";
            }
        }
        result.transcript = std::move(out);
    }

    bool text_matches(const nlohmann::json& args, const std::string& text) const {
        if (args.contains("equals") && text != args["equals"].get<std::string>()) return false;
        if (args.contains("contains") && text.find(args["contains"].get<std::string>()) == std::string::npos) return false;
        return true;
    }

    ExpectationResult evaluate(const Expectation& e, const RunResult& r) {
        ExpectationResult out{e, false, {}};
        const auto& args = e.args;
        auto where = "line " + std::to_string(e.line) + " " + e.kind;
        try {
            if (e.kind == "message" || e.kind == "no_message") {
                auto to = args.value("to", "");
                std::size_t n = 0;
                for (const auto& o : r.outbound) {
                    if (!to.empty() && o.recipient != to) continue;
                    if (args.contains("kind") && o.payload.value("kind", "") != args["kind"].get<std::string>()) continue;
                    if (!text_matches(args, visible_text(o.payload))) continue;
                    ++n;
                }
                if (e.kind == "no_message") {
                    out.passed = n == 0;
                } else if (args.contains("count")) {
                    out.passed = n == args["count"].get<std::size_t>();
                } else {
                    out.passed = n > 0;
                }
                out.detail = where + ": " + std::to_string(n) + " matching message(s) to " + (to.empty() ? "anyone" : to);
            } else if (e.kind == "reaction") {
                auto to = args.value("to", "");
                std::optional<MessageId> target;
                for (const auto& o : r.outbound) {
                    if (o.recipient != to || o.payload.value("kind", "") == "reaction") continue;
                    if (text_matches(args, visible_text(o.payload))) target = o.payload["message_id"].get<std::string>();
                }
                if (!target) {
                    out.detail = where + ": no message to " + to + " matches";
                } else {
                    auto msg = service_->conversations().message(*target);
                    auto glyph = msg && msg->reaction ? *msg->reaction : std::string("(none)");
                    out.passed = glyph == args.value("glyph", "");
                    out.detail = where + ": reaction on " + ref(*target) + " is " + glyph;
                }
            } else if (e.kind == "event") {
                std::size_t n = 0;
                for (const auto& rec : r.events) {
                    if (rec.event.kind != args.value("kind", "")) continue;
                    if (args.contains("where") && !payload_matches(rec.event.payload, args["where"])) continue;
                    if (args.contains("at") && format_rfc3339(rec.event.at, config_.zone) != args["at"].get<std::string>()) continue;
                    ++n;
                }
                out.passed = args.contains("count") ? n == args["count"].get<std::size_t>() : n > 0;
                out.detail = where + ": " + std::to_string(n) + " matching event(s)";
            } else if (e.kind == "task") {
                auto tasks = service_->workflow().tasks();
                auto idx = args.contains("index") ? args["index"].get<std::size_t>() : tasks.size();
                if (idx < 1 || idx > tasks.size()) {
                    out.detail = where + ": no task " + std::to_string(idx);
                } else {
                    const auto& t = tasks[idx - 1];
                    nlohmann::json j = t;
                    out.passed = true;
                    for (const auto& [k, v] : args.items()) {
                        if (k == "index") continue;
                        if (!j.contains(k) || !payload_matches(j, {{k, v}})) out.passed = false;
                    }
                    out.detail = where + ": task " + std::to_string(idx) + " is " + std::string(to_string(t.state));
                }
            }
        } catch (const std::exception& ex) {
            out.passed = false;
            out.detail = where + ": " + ex.what();
        }
        return out;
    }

    const ScenarioScript& script_;
    const RunOptions& options_;
    service::ServiceConfig config_;
    std::shared_ptr<MemoryEventLog> log_;
    std::shared_ptr<channel::CapturingSink> sink_;
    std::shared_ptr<kb::MemoryReviewSink> review_;
    std::unique_ptr<service::Service> service_;
    std::map<std::string, ChannelAddress> alias_to_address_;
    std::map<std::string, std::size_t> refs_;
    std::size_t inbound_seq_ = 0;
};

}  // namespace

bool RunResult::passed() const {
    if (!errors.empty()) return false;
    for (const auto& e : expectations) {
        if (!e.passed) return false;
    }
    return true;
}

RunResult run_scenario(const ScenarioScript& script, const RunOptions& options) {
    return Runner(script, options).run();
}

std::set<Edge> all_task_edges() {
    std::set<Edge> out{{"", "AwaitingOperating"}};
    const TaskState states[] = {TaskState::AwaitingOperating, TaskState::Escalated,     TaskState::ApprovedYes,
                                TaskState::AwaitingCorrection, TaskState::CorrectedDone, TaskState::Rerouted};
    for (auto from : states) {
        for (auto to : states) {
            if (is_legal_transition(from, to)) out.insert({std::string(to_string(from)), std::string(to_string(to))});
        }
    }
    return out;
}

std::string default_config_path() { return EXPERTLOOP_DEFAULT_CONFIG; }

}  // namespace expertloop::sim
