#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expertloop/channel/messenger.hpp"
#include "expertloop/core/directory.hpp"
#include "expertloop/core/journal.hpp"
#include "expertloop/core/time.hpp"

namespace expertloop::onboarding {

inline constexpr std::string_view kWelcome =
    "Welcome to the cataract surgery assistant! You can ask any question about your cataract surgery by text or "
    "voice message. Your doctor or coordinator checks every answer.";
inline constexpr std::string_view kLanguageHint = "To change your language, send \"Change language\".";
inline constexpr std::string_view kChangeLanguageCommand = "Change language";
inline constexpr std::string_view kLanguageMenu =
    "Reply with a number to choose your language:\n1. English\n2. हिन्दी (Hindi)\n3. ಕನ್ನಡ (Kannada)\n"
    "4. தமிழ் (Tamil)\n5. తెలుగు (Telugu)";
inline constexpr std::string_view kLanguageChanged = "Your language has been changed.";
inline constexpr std::string_view kDailyReminder =
    "Hello! Please feel free to ask any cataract surgery related questions.";
inline constexpr std::string_view kAccessEnded =
    "Your access to the cataract surgery assistant has ended. For further questions, please contact the hospital.";

struct Demographics {
    std::string age;
    std::string gender;
    std::string education;
};

struct OnboardingForm {
    std::optional<ChannelAddress> patient_phone;
    std::optional<ChannelAddress> attendant_phone;
    LanguageCode patient_language = LanguageCode::EN;
    LanguageCode attendant_language = LanguageCode::EN;
    UserId operating_doctor_id;
    UserId operating_coordinator_id;
    std::optional<Date> surgery_date;
    Demographics demographics;
};

// Throws InvalidForm for missing or malformed fields.
OnboardingForm parse_form(const nlohmann::json& j);
nlohmann::json to_json(const OnboardingForm& form);

struct ExpertConfig {
    UserId user_id;
    Role role = Role::OperatingDoctor;
    ChannelAddress channel_address;
    std::string display_name;
};

struct OnboardingConfig {
    LocalZone zone;
    std::vector<TimeOfDay> reminder_times{TimeOfDay::parse("07:30"), TimeOfDay::parse("16:00")};
    int enrollment_horizon_days = 14;
    int access_days_after_surgery = 7;
    std::vector<std::string> starter_faqs{
        "How long is the recovery time after cataract surgery?",
        "Will I feel any pain during the surgery?",
        "What are the risks associated with cataract surgery?",
    };
};

struct RegistrationResult {
    std::vector<UserId> created;
};

// Profiles of seekers (from onboarding) and experts (from configuration),
// plus seeker-facing scheduled notifications.
class ProfileRegistry final : public ProfileDirectory {
public:
    // Throws InvalidArgument unless the expert list has exactly one knowledge
    // base expert and every expert profile is valid.
    ProfileRegistry(Journal& journal, channel::Messenger& messenger, OnboardingConfig config,
                    std::vector<ExpertConfig> experts);

    RegistrationResult register_form(const OnboardingForm& form, Timestamp now);
    UserProfile set_language(const UserId& user, LanguageCode language, Timestamp now);

    void open_language_menu(const UserId& user, Timestamp now);
    bool language_menu_open(const UserId& user) const;

    // Fires reminders and deactivations due in (watermark, now]; returns the
    // number of firings processed.
    std::size_t due_notifications(Timestamp now);
    std::optional<Timestamp> next_due() const;

    // ProfileDirectory
    std::optional<UserProfile> find(const UserId& id) const override;
    std::optional<UserProfile> find_by_address(const ChannelAddress& address) const override;
    std::optional<UserProfile> escalation_expert(Track track) const override;
    std::optional<UserProfile> knowledge_base_expert() const override;
    std::vector<UserProfile> all() const override;

    const OnboardingConfig& config() const { return config_; }
    void set_origin(Timestamp origin);

    nlohmann::json snapshot() const;

private:
    void apply_profile(const EventRecord& rec);
    void apply_menu(const EventRecord& rec);
    void apply_reminder(const EventRecord& rec);
    std::optional<UserProfile> find_unlocked(const UserId& id) const;
    void add_expert(const ExpertConfig& e);
    std::vector<Timestamp> pending_firings(Timestamp now) const;

    Journal* journal_;
    channel::Messenger* messenger_;
    OnboardingConfig config_;
    mutable std::shared_mutex mutex_;
    std::map<UserId, UserProfile> profiles_;
    std::map<UserId, bool> menu_open_;
    Timestamp reminder_watermark_{};
    bool origin_set_ = false;
};

}  // namespace expertloop::onboarding
