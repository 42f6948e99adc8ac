#include "expertloop/core/error.hpp"

namespace expertloop {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::DuplicateDocument: return "DuplicateDocument";
        case Errc::EmptyDocument: return "EmptyDocument";
        case Errc::EmbeddingProviderFailure: return "EmbeddingProviderFailure";
        case Errc::ProviderFailure: return "ProviderFailure";
        case Errc::MalformedOutput: return "MalformedOutput";
        case Errc::TranscriptionFailure: return "TranscriptionFailure";
        case Errc::TranslationFailure: return "TranslationFailure";
        case Errc::SynthesisFailure: return "SynthesisFailure";
        case Errc::UnknownTask: return "UnknownTask";
        case Errc::NotAssignedExpert: return "NotAssignedExpert";
        case Errc::AlreadyDecided: return "AlreadyDecided";
        case Errc::CorrectionPendingElsewhere: return "CorrectionPendingElsewhere";
        case Errc::WrongState: return "WrongState";
        case Errc::WrongExpert: return "WrongExpert";
        case Errc::RerouteDisabled: return "RerouteDisabled";
        case Errc::InactiveSeeker: return "InactiveSeeker";
        case Errc::IllegalTransition: return "IllegalTransition";
        case Errc::UnknownRow: return "UnknownRow";
        case Errc::MissingFinalAnswer: return "MissingFinalAnswer";
        case Errc::DuplicateReview: return "DuplicateReview";
        case Errc::SchemaViolation: return "SchemaViolation";
        case Errc::OversizeBody: return "OversizeBody";
        case Errc::DuplicateEnrollment: return "DuplicateEnrollment";
        case Errc::InvalidForm: return "InvalidForm";
        case Errc::UnknownUser: return "UnknownUser";
        case Errc::ExpertLanguageLocked: return "ExpertLanguageLocked";
        case Errc::StorageFailure: return "StorageFailure";
        case Errc::CorruptLog: return "CorruptLog";
        case Errc::ScriptError: return "ScriptError";
    }
    return "Unknown";
}

}  // namespace expertloop
