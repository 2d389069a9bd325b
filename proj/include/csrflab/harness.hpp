#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csrflab/forged_client.hpp"
#include "csrflab/forum.hpp"
#include "csrflab/transport.hpp"
#include "csrflab/webview.hpp"

namespace csrflab {

inline constexpr std::string_view kLabVersion = "1.0.0";

// Attack payload titles: the malicious HTML form and the postUrl body.
inline constexpr std::string_view kFormAttackTitle = "WebView Attack from android";
inline constexpr std::string_view kPostUrlAttackTitle = "WebViewAttackTitle";
inline constexpr std::string_view kPostUrlAttackMessage = "HttpAttackMessage";

enum class ScenarioId { A1_load_url_asset_form, A2_load_data, A3_post_url, A4_forged_client };

inline constexpr ScenarioId kAllScenarios[] = {ScenarioId::A1_load_url_asset_form, ScenarioId::A2_load_data,
                                               ScenarioId::A3_post_url, ScenarioId::A4_forged_client};

std::string_view to_string(ScenarioId id);
// Accepts the short form ("A1") or the full name.
std::optional<ScenarioId> parse_scenario(std::string_view text);

enum class TransportKind { Tcp, InProcess };

struct LabConfig {
    std::uint64_t seed = 1;
    std::string victim = "sohini";
    std::string victim_password = "victim-password";
    std::string peer = "user1";
    std::string peer_password = "peer-password";
    std::string admin_token = "lab-admin-token";
    TransportKind transport = TransportKind::Tcp;
};

struct ScenarioOptions {
    bool spoof_origin = false;
    // Whether the malicious app installs its cookie-capturing hook.
    bool install_hook = true;
};

// Records what the hosting application sees at each navigation:
// the destination URL and getCookie(url) at that moment.
class CookieCapture {
public:
    struct Entry {
        std::string url;
        std::optional<std::string> cookie;
    };

    // Hook for `view` that records and never overrides.
    NavigationHook hook_for(WebView& view);

    const std::vector<Entry>& entries() const { return entries_; }
    std::optional<std::string> last_cookie() const;

private:
    std::vector<Entry> entries_;
};

// A fresh forum server plus a WebView wired to it.
class Lab {
public:
    Lab(const LabConfig& config, DefensePolicy policy);
    ~Lab();

    Lab(const Lab&) = delete;
    Lab& operator=(const Lab&) = delete;

    ForumServer& server() { return *server_; }
    WebView& view() { return *view_; }
    CookieCapture& capture() { return capture_; }
    const std::shared_ptr<Transport>& transport() const { return transport_; }
    const std::filesystem::path& asset_root() const { return asset_root_; }

    // "http://forum.local:8080" followed by `path`.
    std::string url(std::string_view path) const;

    // admin_state fetched over the wire with the admin bearer token.
    std::string admin_state() const;

    // Registers a user through POST register.php.
    void register_user(const std::string& username, const std::string& password) const;

    void install_hook();

private:
    LabConfig config_;
    std::unique_ptr<ForumServer> server_;
    std::unique_ptr<HttpListener> listener_;
    std::shared_ptr<Transport> transport_;
    std::filesystem::path asset_root_;
    std::unique_ptr<WebView> view_;
    CookieCapture capture_;
};

// Victim signs in through the emulator: load the login page, fill the form,
// follow the redirect. Throws LoginFailed when the server answers 401.
LoadResult drive_login(WebView& view, std::string_view login_page_url, const std::string& username,
                       const std::string& password);

// drive_login, then returns the cookie string the hook captured on the
// redirect hop. Throws LoginFailed, NoCookieCaptured.
std::string victim_login(WebView& view, const CookieCapture& capture, std::string_view login_page_url,
                         const std::string& username, const std::string& password);

struct Verification {
    bool success = false;
    // New posts attributed to the expected sender.
    std::vector<PostRecord> evidence;
};

// Compares two admin_state snapshots. Throws SnapshotMismatch when `after`
// cannot be a later state of the server that produced `before`.
Verification verify_outcome(std::string_view state_before, std::string_view state_after,
                            std::string_view expected_sender, std::string_view expected_title);

struct AttackOutcome {
    ScenarioId scenario = ScenarioId::A1_load_url_asset_form;
    DefensePolicy defense = DefensePolicy::None;
    bool spoof = false;
    bool success = false;
    int http_status = 0;
    std::vector<PostRecord> evidence;
    std::string notes;
    bool setup_failed = false;
    // admin_state around the attack; not part of the report.
    std::string state_before;
    std::string state_after;
};

// Throws ScenarioSetupFailed when a precondition step fails.
AttackOutcome run_scenario(const LabConfig& config, ScenarioId id, DefensePolicy defense,
                           ScenarioOptions options = {});

struct ExpectedCell {
    ScenarioId scenario;
    bool spoof;
    DefensePolicy defense;
    bool success;
    int status;
};

// Outcome grid implied by the defense and emulator rules.
std::vector<ExpectedCell> expected_grid();

struct MatrixReport {
    std::uint64_t seed = 0;
    std::string version{kLabVersion};
    std::vector<AttackOutcome> cells;

    // Stable key order: {seed, version, cells:[{scenario, defense, spoof,
    // success, status, evidence, notes}]}.
    std::string to_json() const;

    const AttackOutcome* find(ScenarioId scenario, DefensePolicy defense, bool spoof) const;
    bool has_setup_failures() const;
};

// Every defense x {A1, A2, A3, A4, A4+spoof}, each on a fresh server.
// `base_options.install_hook = false` drops the capture hook, which makes
// the A4 cells fail setup.
MatrixReport run_matrix(const LabConfig& config, ScenarioOptions base_options = {});

// Mismatch descriptions; empty when the report equals the expected grid.
std::vector<std::string> compare_to_expected(const MatrixReport& report);

std::string outcome_json(const AttackOutcome& outcome);

}  // namespace csrflab
