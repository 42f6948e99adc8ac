#include "expertloop/service/service.hpp"

#include <cstdlib>

#include <spdlog/spdlog.h>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"
#include "expertloop/knowledge/corpus.hpp"
#include "expertloop/service/event_log.hpp"

namespace expertloop::service {

namespace {

std::optional<Decision> decision_for_label(std::string_view label) {
    auto l = text::trim(label);
    if (text::iequals(l, channel::kButtonYes)) return Decision::Yes;
    if (text::iequals(l, channel::kButtonNo)) return Decision::No;
    if (text::iequals(l, channel::kButtonToDoctor) || text::iequals(l, channel::kButtonToCoordinator)) {
        return Decision::Reroute;
    }
    return std::nullopt;
}

std::optional<LanguageCode> menu_choice(std::string_view text) {
    auto t = text::trim(text);
    if (t.size() != 1 || t[0] < '1' || t[0] > '5') return std::nullopt;
    return kAllLanguages[t[0] - '1'];
}

nlohmann::json task_json(const workflow::VerificationTask& t, const workflow::VerificationWorkflow& wf) {
    nlohmann::json j = t;
    if (auto q = wf.query(t.query_id)) {
        j["question"] = q->english_text;
        j["seeker_id"] = q->seeker_id;
        j["query_type"] = to_string(q->query_type);
    }
    if (auto a = wf.answer(t.answer_id)) {
        j["answer"] = a->answer.english_answer;
        j["answer_status"] = to_string(a->answer.status);
        j["citations"] = a->answer.citations;
    }
    return j;
}

}  // namespace

int http_status_for(Errc code) {
    switch (code) {
        case Errc::UnknownTask:
        case Errc::UnknownUser:
        case Errc::UnknownRow: return 404;
        case Errc::NotAssignedExpert:
        case Errc::WrongExpert: return 403;
        case Errc::AlreadyDecided:
        case Errc::CorrectionPendingElsewhere:
        case Errc::WrongState:
        case Errc::RerouteDisabled:
        case Errc::InactiveSeeker:
        case Errc::DuplicateReview:
        case Errc::DuplicateEnrollment:
        case Errc::ExpertLanguageLocked: return 409;
        case Errc::InvalidArgument:
        case Errc::InvalidForm:
        case Errc::SchemaViolation:
        case Errc::OversizeBody:
        case Errc::MissingFinalAnswer: return 400;
        case Errc::ProviderFailure:
        case Errc::EmbeddingProviderFailure: return 502;
        default: return 500;
    }
}

Service::Service(ServiceConfig config, ServiceOverrides o) : config_(std::move(config)) {
    if (o.log) {
        log_ = o.log;
        replay_ = std::move(o.replay);
    } else if (!config_.log_path.empty()) {
        auto file = std::make_shared<FileEventLog>(config_.log_path);
        replay_ = file->existing();
        log_ = file;
    } else {
        log_ = std::make_shared<MemoryEventLog>();
    }
    journal_ = std::make_unique<Journal>(*log_);

    if (o.outbound) outbound_ = o.outbound;
    else if (!config_.outbound_url.empty()) outbound_ = std::make_shared<channel::HttpSink>(config_.outbound_url, config_.outbound_path);
    else outbound_ = std::make_shared<channel::NullSink>();
    if (o.review_sink) review_sink_ = o.review_sink;
    else if (!config_.review_dir.empty()) review_sink_ = std::make_shared<kb::FileReviewSink>(config_.review_dir);
    else review_sink_ = std::make_shared<kb::MemoryReviewSink>();

    const auto& p = config_.providers;
    std::shared_ptr<const knowledge::EmbeddingProvider> embedder =
        knowledge::make_embedding_provider(p.embedding, p.embedding_dimension);
    store_ = std::make_unique<knowledge::KnowledgeStore>(embedder);

    auto llm = o.llm;
    if (!llm) {
        if (p.llm == "http") {
            llm::HttpProviderOptions h;
            h.base_url = p.llm_base_url;
            h.path = p.llm_path;
            h.model = p.llm_model;
            if (const char* key = std::getenv(p.llm_api_key_env.c_str())) h.api_key = key;
            llm = std::make_shared<llm::HttpCompletionProvider>(h);
        } else {
            llm = std::make_shared<llm::MockCompletionProvider>();
        }
    }
    gateway_ = std::make_unique<llm::LlmGateway>(llm, llm::GatewayConfig{}, o.sleeper);

    auto policy = p.missing_phrase_policy == "fail" ? language::MissingPhrasePolicy::Fail
                                                    : language::MissingPhrasePolicy::TagPassThrough;
    auto translator = o.translator;
    if (!translator) {
        translator = p.translations.empty()
                         ? std::make_shared<language::MockTranslator>(policy)
                         : std::make_shared<language::MockTranslator>(language::MockTranslator::from_file(p.translations, policy));
    }
    auto stt = o.speech_to_text;
    if (!stt) {
        stt = p.audio_fixtures.empty()
                  ? std::make_shared<language::MockSpeechToText>()
                  : std::make_shared<language::MockSpeechToText>(language::MockSpeechToText::from_file(p.audio_fixtures));
    }
    auto tts = o.text_to_speech ? o.text_to_speech : std::make_shared<language::MockTextToSpeech>();
    language_ = std::make_unique<language::LanguageServices>(stt, tts, translator,
                                                             std::make_shared<language::AudioStore>(config_.audio_dir));

    messenger_ = std::make_unique<channel::Messenger>(*journal_, *outbound_, *language_);
    conversations_ = std::make_unique<channel::ConversationStore>(*journal_);

    onboarding::OnboardingConfig oc;
    oc.zone = config_.zone;
    oc.reminder_times = config_.seeker_reminder_times;
    registry_ = std::make_unique<onboarding::ProfileRegistry>(*journal_, *messenger_, oc, config_.experts);

    workflow::WorkflowConfig wc;
    wc.escalation_delay = config_.escalation_delay;
    wc.reminder_delay = config_.reminder_delay;
    wc.digest_times = config_.digest_times;
    wc.zone = config_.zone;
    wc.allow_reroute_to_doctor = config_.allow_reroute_to_doctor;
    wc.retrieval_k = config_.retrieval_k;
    workflow_ = std::make_unique<workflow::VerificationWorkflow>(*journal_, *messenger_, *registry_, *store_,
                                                                 *gateway_, *language_, wc);

    kb::KbUpdateConfig kc{config_.zone, config_.kb_digest_time, config_.kb_apply_time};
    kb_ = std::make_unique<kb::KbUpdatePipeline>(*journal_, *workflow_, *store_, *review_sink_, kc);

    journal_->subscribe(event_kind::kSchedulerStarted, [this](const EventRecord& r) {
        registry_->set_origin(r.event.at);
        workflow_->set_origin(r.event.at);
        kb_->set_origin(r.event.at);
        clock_ = std::max(clock_, r.event.at);
    });
}

void Service::start(Timestamp now) {
    std::lock_guard lock(mutex_);
    if (started_) throw Error(Errc::InvalidArgument, "service already started");
    std::optional<Timestamp> origin;
    for (const auto& rec : replay_) {
        if (rec.event.kind == event_kind::kSchedulerStarted) {
            origin = rec.event.at;
            break;
        }
    }
    // The corpus is ingested at the scheduler origin so that chunk ages, and
    // with them search tie-breaks, are the same after every restart.
    if (!config_.corpus_dir.empty()) {
        auto docs = knowledge::load_corpus(config_.corpus_dir);
        knowledge::ingest_corpus(*store_, docs, origin.value_or(now));
    }
    for (const auto& rec : replay_) {
        journal_->replay(rec);
        clock_ = std::max(clock_, rec.event.at);
    }
    replay_.clear();
    if (!origin) journal_->record({event_kind::kSchedulerStarted, now, nlohmann::json::object()});
    started_ = true;
    spdlog::debug("service started at {}, {} knowledge chunks", format_rfc3339(now, config_.zone),
                  store_->chunk_count());
}

Timestamp Service::clock() const {
    std::lock_guard lock(mutex_);
    return clock_;
}

void Service::advance_to(Timestamp now) {
    std::lock_guard lock(mutex_);
    advance_locked(now);
}

void Service::advance_locked(Timestamp now) {
    if (!started_) throw Error(Errc::InvalidArgument, "service not started");
    for (;;) {
        auto next = next_due();
        if (!next || *next > now) break;
        workflow_->tick(*next);
        registry_->due_notifications(*next);
        kb_->tick(*next);
        clock_ = std::max(clock_, *next);
    }
    clock_ = std::max(clock_, now);
}

std::optional<Timestamp> Service::next_due() const {
    std::lock_guard lock(mutex_);
    std::optional<Timestamp> best;
    for (auto t : {workflow_->next_due(), registry_->next_due(), kb_->next_due()}) {
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

void Service::notify(const UserProfile& user, std::string_view text, Timestamp now) {
    if (is_seeker(user.role)) {
        messenger_->send_text(user, std::string(text), false, now);
    } else {
        messenger_->send(user, channel::send_text(user.channel_address, std::string(text)), now);
    }
}

nlohmann::json Service::handle_inbound(const channel::InboundMessage& m, Timestamp now) {
    std::lock_guard lock(mutex_);
    advance_locked(now);
    auto profile = registry_->find_by_address(m.sender);
    if (!profile) {
        spdlog::info("ignoring message from unregistered address {}", m.sender);
        return {{"status", "ignored"}, {"reason", "unknown sender"}};
    }
    nlohmann::json payload{{"user_id", profile->user_id},
                           {"message_id", m.message_id},
                           {"kind", channel::render_webhook(m).at("kind")}};
    switch (m.kind) {
        case channel::InboundKind::Text: payload["text"] = m.text; break;
        case channel::InboundKind::Audio: payload["audio_ref"] = language_->audio().put(m.audio, now); break;
        case channel::InboundKind::ButtonPress: payload["text"] = m.button_label; break;
        case channel::InboundKind::SuggestionPick: payload["suggestion_index"] = m.suggestion_index; break;
    }
    if (m.kind == channel::InboundKind::Audio) payload["text"] = "";
    if (m.context_message_id) payload["context_message_id"] = *m.context_message_id;
    journal_->record({event_kind::kInboundReceived, now, payload});
    return is_seeker(profile->role) ? route_seeker(*profile, m, now) : route_expert(*profile, m, now);
}

nlohmann::json Service::route_seeker(const UserProfile& seeker, const channel::InboundMessage& m, Timestamp now) {
    if (!seeker.is_active(now)) {
        notify(seeker, onboarding::kAccessEnded, now);
        return {{"status", "inactive"}};
    }
    if (m.kind == channel::InboundKind::Text && text::iequals(text::trim(m.text), onboarding::kChangeLanguageCommand)) {
        registry_->open_language_menu(seeker.user_id, now);
        return {{"status", "language_menu"}};
    }
    if (m.kind == channel::InboundKind::Text && registry_->language_menu_open(seeker.user_id)) {
        if (auto choice = menu_choice(m.text)) {
            registry_->set_language(seeker.user_id, *choice, now);
            return {{"status", "language_changed"}, {"language", to_string(*choice)}};
        }
    }
    language::NormalizedInbound in;
    try {
        switch (m.kind) {
            case channel::InboundKind::Text:
                if (text::trim(m.text).empty()) return {{"status", "ignored"}, {"reason", "empty text"}};
                in = language_->normalize_text(m.text, seeker.language);
                break;
            case channel::InboundKind::Audio: in = language_->normalize_audio(m.audio, seeker.language, now); break;
            case channel::InboundKind::SuggestionPick: {
                auto label = messenger_->suggestion(seeker.user_id, m.suggestion_index);
                if (!label) return {{"status", "ignored"}, {"reason", "no such suggestion"}};
                in = language_->normalize_tap(*label, seeker.language);
                break;
            }
            case channel::InboundKind::ButtonPress: return {{"status", "ignored"}, {"reason", "seekers have no buttons"}};
        }
    } catch (const Error& e) {
        if (e.code() != Errc::TranscriptionFailure && e.code() != Errc::TranslationFailure) throw;
        notify(seeker, m.kind == channel::InboundKind::Audio ? language::kAudioNotUnderstood : kTextNotUnderstood, now);
        return {{"status", "not_understood"}, {"error", to_string(e.code())}};
    }
    auto plan = workflow_->handle_seeker_message(seeker, in, m.message_id, now);
    nlohmann::json out{{"status", plan.failed ? "provider_failure" : "answered"},
                       {"query_type", to_string(plan.query_type)}};
    if (plan.query_id) out["query_id"] = *plan.query_id;
    if (plan.task_id) out["task_id"] = *plan.task_id;
    return out;
}

nlohmann::json Service::route_expert(const UserProfile& expert, const channel::InboundMessage& m, Timestamp now) {
    auto reply_error = [&](const Error& e) -> nlohmann::json {
        switch (e.code()) {
            case Errc::AlreadyDecided: notify(expert, kAlreadyVerified, now); break;
            case Errc::CorrectionPendingElsewhere: notify(expert, kBeingCorrected, now); break;
            case Errc::RerouteDisabled: notify(expert, kRerouteOff, now); break;
            case Errc::NotAssignedExpert:
            case Errc::WrongExpert: notify(expert, kNotYourTask, now); break;
            case Errc::ProviderFailure: notify(expert, workflow::kTryAgainNotice, now); break;
            default: throw e;
        }
        return {{"status", "rejected"}, {"error", to_string(e.code())}};
    };
    if (m.kind == channel::InboundKind::ButtonPress) {
        auto decision = decision_for_label(m.button_label);
        if (!decision) return {{"status", "ignored"}, {"reason", "unknown button"}};
        auto task = workflow_->task_for_button(expert.user_id, m.context_message_id);
        if (!task) {
            notify(expert, kNoPendingVerification, now);
            return {{"status", "no_task"}};
        }
        try {
            auto r = workflow_->submit_decision(expert.user_id, *task, *decision, now);
            nlohmann::json out{{"status", "decided"}, {"task_id", r.task_id}, {"state", to_string(r.to)}};
            if (r.successor_task_id) out["successor_task_id"] = *r.successor_task_id;
            return out;
        } catch (const Error& e) {
            return reply_error(e);
        }
    }
    if (m.kind == channel::InboundKind::Text) {
        auto task = workflow_->task_awaiting_correction(expert.user_id, m.context_message_id);
        if (!task) {
            notify(expert, workflow::kNoCorrectionPending, now);
            return {{"status", "no_task"}};
        }
        try {
            auto r = workflow_->submit_correction(expert.user_id, *task, m.text, now);
            return {{"status", "corrected"}, {"task_id", r.task_id}, {"final_answer", r.final_answer}};
        } catch (const Error& e) {
            if (e.code() == Errc::WrongState) {
                notify(expert, workflow::kNoCorrectionPending, now);
                return {{"status", "rejected"}, {"error", to_string(e.code())}};
            }
            return reply_error(e);
        }
    }
    return {{"status", "ignored"}, {"reason", "unsupported message kind for experts"}};
}

onboarding::RegistrationResult Service::onboard(const onboarding::OnboardingForm& form, Timestamp now) {
    std::lock_guard lock(mutex_);
    advance_locked(now);
    return registry_->register_form(form, now);
}

workflow::TransitionResult Service::decide(const UserId& expert, const TaskId& task, Decision decision,
                                           Timestamp now) {
    std::lock_guard lock(mutex_);
    advance_locked(now);
    return workflow_->submit_decision(expert, task, decision, now);
}

workflow::CorrectionResult Service::correct(const UserId& expert, const TaskId& task, const std::string& text,
                                            Timestamp now) {
    std::lock_guard lock(mutex_);
    advance_locked(now);
    return workflow_->submit_correction(expert, task, text, now);
}

std::size_t Service::review(const std::vector<kb::ReviewRow>& rows, Timestamp now) {
    std::lock_guard lock(mutex_);
    advance_locked(now);
    return kb_->ingest_review(rows, now);
}

nlohmann::json Service::tasks_json(const std::string& state_filter, const std::optional<UserId>& expert) const {
    std::lock_guard lock(mutex_);
    std::optional<TaskState> exact;
    if (state_filter != "pending" && state_filter != "all" && !state_filter.empty()) {
        exact = parse_task_state(state_filter);
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : workflow_->tasks()) {
        if (state_filter == "pending" && t.is_terminal()) continue;
        if (exact && t.state != *exact) continue;
        if (expert) {
            bool assigned = t.operating_expert_id == *expert || (t.escalation_expert_id == *expert && t.escalated_at);
            if (!assigned) continue;
        }
        out.push_back(task_json(t, *workflow_));
    }
    return out;
}

nlohmann::json Service::conversation_json(const UserId& user) const {
    std::lock_guard lock(mutex_);
    if (!registry_->find(user)) throw Error(Errc::UnknownUser, user);
    return conversations_->to_json(user);
}

nlohmann::json Service::snapshot() const {
    std::lock_guard lock(mutex_);
    return {{"workflow", workflow_->snapshot()},
            {"profiles", registry_->snapshot()},
            {"kb", kb_->snapshot()},
            {"faq_chunks", store_->chunk_count(knowledge::Tier::ExpertFAQ)}};
}

}  // namespace expertloop::service
