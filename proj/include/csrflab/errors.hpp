#pragma once

#include <stdexcept>
#include <string>

namespace csrflab {

// Base for every failure the lab raises. Attack failures are *not* errors;
// they are recorded as outcomes.
class LabError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CSRFLAB_DEFINE_ERROR(Name)                 \
    class Name : public LabError {                 \
    public:                                        \
        explicit Name(const std::string& what)     \
            : LabError(#Name ": " + what) {}       \
    }

// http-core
CSRFLAB_DEFINE_ERROR(MalformedMessage);
CSRFLAB_DEFINE_ERROR(IllegalHeader);
CSRFLAB_DEFINE_ERROR(MalformedEncoding);
CSRFLAB_DEFINE_ERROR(BadUrl);

// forum-target
CSRFLAB_DEFINE_ERROR(DuplicateUser);
CSRFLAB_DEFINE_ERROR(BadUsername);
CSRFLAB_DEFINE_ERROR(SnapshotError);

// transport / emulator
CSRFLAB_DEFINE_ERROR(ConnectionFailed);
CSRFLAB_DEFINE_ERROR(PermissionDenied);
CSRFLAB_DEFINE_ERROR(AssetNotFound);
CSRFLAB_DEFINE_ERROR(AssetEscape);
CSRFLAB_DEFINE_ERROR(TooManyRedirects);
CSRFLAB_DEFINE_ERROR(BadEncoding);
CSRFLAB_DEFINE_ERROR(UnsupportedMime);
CSRFLAB_DEFINE_ERROR(NoSuchForm);
CSRFLAB_DEFINE_ERROR(NoSuchField);
CSRFLAB_DEFINE_ERROR(ReentrantLoad);

// harness
CSRFLAB_DEFINE_ERROR(LoginFailed);
CSRFLAB_DEFINE_ERROR(NoCookieCaptured);
CSRFLAB_DEFINE_ERROR(ScenarioSetupFailed);
CSRFLAB_DEFINE_ERROR(SnapshotMismatch);

#undef CSRFLAB_DEFINE_ERROR

}  // namespace csrflab
