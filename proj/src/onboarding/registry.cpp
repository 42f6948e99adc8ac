#include "expertloop/onboarding/registry.hpp"

#include <algorithm>
#include <mutex>

#include "expertloop/core/error.hpp"
#include "expertloop/core/text.hpp"

namespace expertloop::onboarding {

namespace {

using namespace std::chrono;

std::optional<std::string> nonempty(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(Errc::InvalidForm, std::string(key) + " must be a string");
    auto v = text::trim(it->get<std::string>());
    if (v.empty()) return std::nullopt;
    return v;
}

template <typename F>
auto form_field(const char* key, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidForm) throw;
        throw Error(Errc::InvalidForm, std::string("invalid ") + key + ": " + e.what());
    }
}

}  // namespace

OnboardingForm parse_form(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::InvalidForm, "form must be a JSON object");
    OnboardingForm f;
    f.patient_phone = nonempty(j, "patient_phone");
    f.attendant_phone = nonempty(j, "attendant_phone");
    if (auto v = nonempty(j, "patient_language")) f.patient_language = form_field("patient_language", [&] { return parse_language(*v); });
    if (auto v = nonempty(j, "attendant_language")) f.attendant_language = form_field("attendant_language", [&] { return parse_language(*v); });
    f.operating_doctor_id = nonempty(j, "operating_doctor_id").value_or("");
    f.operating_coordinator_id = nonempty(j, "operating_coordinator_id").value_or("");
    if (auto v = nonempty(j, "surgery_date")) f.surgery_date = form_field("surgery_date", [&] { return parse_date(*v); });
    if (auto d = j.find("demographics"); d != j.end() && d->is_object()) {
        auto get = [&](const char* key) {
            auto it = d->find(key);
            if (it == d->end() || it->is_null()) return std::string();
            return it->is_string() ? it->get<std::string>() : it->dump();
        };
        f.demographics = {get("age"), get("gender"), get("education")};
    }
    return f;
}

nlohmann::json to_json(const OnboardingForm& f) {
    nlohmann::json j{{"patient_language", to_string(f.patient_language)},
                     {"attendant_language", to_string(f.attendant_language)},
                     {"operating_doctor_id", f.operating_doctor_id},
                     {"operating_coordinator_id", f.operating_coordinator_id},
                     {"demographics",
                      {{"age", f.demographics.age}, {"gender", f.demographics.gender}, {"education", f.demographics.education}}}};
    if (f.patient_phone) j["patient_phone"] = *f.patient_phone;
    if (f.attendant_phone) j["attendant_phone"] = *f.attendant_phone;
    if (f.surgery_date) j["surgery_date"] = format_date(*f.surgery_date);
    return j;
}

ProfileRegistry::ProfileRegistry(Journal& journal, channel::Messenger& messenger, OnboardingConfig config,
                                 std::vector<ExpertConfig> experts)
    : journal_(&journal), messenger_(&messenger), config_(std::move(config)) {
    std::size_t kb_experts = 0;
    for (const auto& e : experts) {
        if (!is_expert(e.role)) throw Error(Errc::InvalidArgument, "configured expert " + e.user_id + " has a seeker role");
        if (e.role == Role::KnowledgeBaseExpert) ++kb_experts;
        add_expert(e);
    }
    if (kb_experts != 1) throw Error(Errc::InvalidArgument, "exactly one knowledge base expert must be configured");
    journal.subscribe(event_kind::kProfileChanged, [this](const EventRecord& r) { apply_profile(r); });
    journal.subscribe(event_kind::kLanguageMenuOpened, [this](const EventRecord& r) { apply_menu(r); });
    journal.subscribe(event_kind::kSeekerReminderFired, [this](const EventRecord& r) { apply_reminder(r); });
}

void ProfileRegistry::add_expert(const ExpertConfig& e) {
    UserProfile p;
    p.user_id = e.user_id;
    p.role = e.role;
    p.language = LanguageCode::EN;
    p.channel_address = e.channel_address;
    p.display_demographics = e.display_name;
    p.validate();
    if (profiles_.count(p.user_id)) throw Error(Errc::InvalidArgument, "duplicate expert id " + p.user_id);
    for (const auto& [id, other] : profiles_) {
        if (other.channel_address == p.channel_address) {
            throw Error(Errc::InvalidArgument, "duplicate channel address " + p.channel_address);
        }
    }
    profiles_[p.user_id] = p;
}

void ProfileRegistry::set_origin(Timestamp origin) {
    std::unique_lock lock(mutex_);
    if (!origin_set_) {
        reminder_watermark_ = std::max(reminder_watermark_, origin);
        origin_set_ = true;
    }
}

RegistrationResult ProfileRegistry::register_form(const OnboardingForm& form, Timestamp now) {
    if (!form.patient_phone && !form.attendant_phone) throw Error(Errc::InvalidForm, "at least one phone is required");
    if (form.patient_phone && form.attendant_phone && *form.patient_phone == *form.attendant_phone) {
        throw Error(Errc::InvalidForm, "patient and attendant phones must differ");
    }
    if (!form.surgery_date) throw Error(Errc::InvalidForm, "surgery_date is required");

    auto today = sys_days(config_.zone.local_date(now));
    auto surgery = sys_days(*form.surgery_date);
    if (surgery > today + days(config_.enrollment_horizon_days)) {
        throw Error(Errc::InvalidForm, "surgery_date is more than " + std::to_string(config_.enrollment_horizon_days) +
                                           " days ahead");
    }
    auto active_until = config_.zone.local_midnight(Date(surgery + days(config_.access_days_after_surgery)));
    if (active_until <= now) throw Error(Errc::InvalidForm, "access period for this surgery date has already ended");

    std::vector<UserProfile> created;
    {
        std::shared_lock lock(mutex_);
        auto check_expert = [&](const UserId& id, Role role, const char* what) {
            auto it = profiles_.find(id);
            if (it == profiles_.end() || it->second.role != role) {
                throw Error(Errc::InvalidForm, std::string(what) + " '" + id + "' is not a configured expert");
            }
        };
        check_expert(form.operating_doctor_id, Role::OperatingDoctor, "operating_doctor_id");
        check_expert(form.operating_coordinator_id, Role::OperatingCoordinator, "operating_coordinator_id");
        for (const auto* phone : {&form.patient_phone, &form.attendant_phone}) {
            if (!*phone) continue;
            for (const auto& [id, p] : profiles_) {
                if (p.channel_address != **phone) continue;
                if (is_expert(p.role) || (!p.deactivated && p.is_active(now))) {
                    throw Error(Errc::DuplicateEnrollment, "phone " + **phone + " is already enrolled");
                }
            }
        }
    }

    std::vector<std::string> demo;
    for (const auto* s : {&form.demographics.age, &form.demographics.gender, &form.demographics.education}) {
        if (!s->empty()) demo.push_back(*s);
    }
    auto make = [&](Role role, const ChannelAddress& phone, LanguageCode lang) {
        UserProfile p;
        p.user_id = journal_->next_id("usr", now);
        p.role = role;
        p.language = lang;
        p.channel_address = phone;
        p.display_demographics = text::join(demo, "/");
        p.surgery_date = form.surgery_date;
        p.operating_doctor_id = form.operating_doctor_id;
        p.operating_coordinator_id = form.operating_coordinator_id;
        p.active_until = active_until;
        p.enrolled_at = now;
        p.validate();
        journal_->record({event_kind::kProfileChanged, now, {{"reason", "enrolled"}, {"profile", p}}});
        return p;
    };
    if (form.patient_phone) created.push_back(make(Role::Patient, *form.patient_phone, form.patient_language));
    if (form.attendant_phone) created.push_back(make(Role::Attendant, *form.attendant_phone, form.attendant_language));

    RegistrationResult result;
    for (const auto& p : created) {
        messenger_->send_text(p, std::string(kWelcome), false, now);
        messenger_->offer_suggestions(p, config_.starter_faqs, now);
        messenger_->send_text(p, std::string(kLanguageHint), false, now);
        result.created.push_back(p.user_id);
    }
    return result;
}

UserProfile ProfileRegistry::set_language(const UserId& user, LanguageCode language, Timestamp now) {
    auto p = find(user);
    if (!p) throw Error(Errc::UnknownUser, user);
    if (is_expert(p->role)) throw Error(Errc::ExpertLanguageLocked, "experts communicate in English only");
    if (p->deactivated || !p->is_active(now)) throw Error(Errc::InactiveSeeker, user);
    p->language = language;
    journal_->record({event_kind::kProfileChanged, now, {{"reason", "language"}, {"profile", *p}}});
    messenger_->send_text(*p, std::string(kLanguageChanged), false, now);
    return *p;
}

void ProfileRegistry::open_language_menu(const UserId& user, Timestamp now) {
    auto p = find(user);
    if (!p) throw Error(Errc::UnknownUser, user);
    journal_->record({event_kind::kLanguageMenuOpened, now, {{"user_id", user}, {"open", true}}});
    messenger_->send(*p, channel::send_text(p->channel_address, std::string(kLanguageMenu)), now);
}

bool ProfileRegistry::language_menu_open(const UserId& user) const {
    std::shared_lock lock(mutex_);
    auto it = menu_open_.find(user);
    return it != menu_open_.end() && it->second;
}

std::vector<Timestamp> ProfileRegistry::pending_firings(Timestamp now) const {
    std::vector<Timestamp> out = config_.zone.firings_between(reminder_watermark_, now, config_.reminder_times);
    for (const auto& [id, p] : profiles_) {
        if (is_seeker(p.role) && !p.deactivated && p.active_until && *p.active_until <= now) out.push_back(*p.active_until);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t ProfileRegistry::due_notifications(Timestamp now) {
    std::vector<Timestamp> firings;
    {
        std::shared_lock lock(mutex_);
        firings = pending_firings(now);
    }
    std::size_t processed = 0;
    for (auto t : firings) {
        // deactivations first, so a seeker whose access ends at t is not reminded at t
        std::vector<UserProfile> snapshot = all();
        for (auto p : snapshot) {
            if (is_seeker(p.role) && !p.deactivated && p.active_until && *p.active_until == t) {
                p.deactivated = true;
                journal_->record({event_kind::kProfileChanged, t, {{"reason", "deactivated"}, {"profile", p}}});
                ++processed;
            }
        }
        auto slots = config_.zone.firings_between(t - seconds(1), t, config_.reminder_times);
        if (slots.empty() || t <= reminder_watermark_) continue;
        std::vector<UserProfile> recipients;
        auto slot_day = config_.zone.local_date(t);
        for (const auto& p : all()) {
            if (!is_seeker(p.role) || p.deactivated || !p.is_active(t)) continue;
            if (!p.enrolled_at || *p.enrolled_at > t) continue;
            // the enrollment day gets the welcome message instead
            if (config_.zone.local_date(*p.enrolled_at) == slot_day) continue;
            recipients.push_back(p);
        }
        std::vector<std::string> ids;
        for (const auto& p : recipients) ids.push_back(p.user_id);
        journal_->record({event_kind::kSeekerReminderFired, t, {{"slot", format_rfc3339(t)}, {"user_ids", ids}}});
        for (const auto& p : recipients) messenger_->send_text(p, std::string(kDailyReminder), false, t);
        ++processed;
    }
    return processed;
}

std::optional<Timestamp> ProfileRegistry::next_due() const {
    std::shared_lock lock(mutex_);
    std::optional<Timestamp> best = config_.zone.next_firing(reminder_watermark_, config_.reminder_times);
    for (const auto& [id, p] : profiles_) {
        if (is_seeker(p.role) && !p.deactivated && p.active_until && (!best || *p.active_until < *best)) {
            best = *p.active_until;
        }
    }
    return best;
}

void ProfileRegistry::apply_profile(const EventRecord& rec) {
    auto p = rec.event.payload.at("profile").get<UserProfile>();
    std::unique_lock lock(mutex_);
    menu_open_[p.user_id] = false;
    profiles_[p.user_id] = std::move(p);
}

void ProfileRegistry::apply_menu(const EventRecord& rec) {
    const auto& p = rec.event.payload;
    std::unique_lock lock(mutex_);
    menu_open_[p.at("user_id").get<std::string>()] = p.at("open").get<bool>();
}

void ProfileRegistry::apply_reminder(const EventRecord& rec) {
    std::unique_lock lock(mutex_);
    reminder_watermark_ = std::max(reminder_watermark_, rec.event.at);
}

std::optional<UserProfile> ProfileRegistry::find_unlocked(const UserId& id) const {
    auto it = profiles_.find(id);
    if (it == profiles_.end()) return std::nullopt;
    return it->second;
}

std::optional<UserProfile> ProfileRegistry::find(const UserId& id) const {
    std::shared_lock lock(mutex_);
    return find_unlocked(id);
}

std::optional<UserProfile> ProfileRegistry::find_by_address(const ChannelAddress& address) const {
    std::shared_lock lock(mutex_);
    // prefer the live enrollment when a phone re-enrolled after deactivation
    std::optional<UserProfile> found;
    for (const auto& [id, p] : profiles_) {
        if (p.channel_address != address) continue;
        if (!found || (found->deactivated && !p.deactivated) ||
            (found->deactivated == p.deactivated && p.enrolled_at > found->enrolled_at)) {
            found = p;
        }
    }
    return found;
}

std::optional<UserProfile> ProfileRegistry::escalation_expert(Track track) const {
    std::shared_lock lock(mutex_);
    auto role = track == Track::DoctorTrack ? Role::EscalationDoctor : Role::EscalationCoordinator;
    for (const auto& [id, p] : profiles_) {
        if (p.role == role) return p;
    }
    return std::nullopt;
}

std::optional<UserProfile> ProfileRegistry::knowledge_base_expert() const {
    std::shared_lock lock(mutex_);
    for (const auto& [id, p] : profiles_) {
        if (p.role == Role::KnowledgeBaseExpert) return p;
    }
    return std::nullopt;
}

std::vector<UserProfile> ProfileRegistry::all() const {
    std::shared_lock lock(mutex_);
    std::vector<UserProfile> out;
    for (const auto& [id, p] : profiles_) out.push_back(p);
    return out;
}

nlohmann::json ProfileRegistry::snapshot() const {
    std::shared_lock lock(mutex_);
    nlohmann::json profiles = nlohmann::json::object();
    for (const auto& [id, p] : profiles_) profiles[id] = p;
    return {{"profiles", profiles}, {"reminder_watermark", format_rfc3339(reminder_watermark_)}};
}

}  // namespace expertloop::onboarding
