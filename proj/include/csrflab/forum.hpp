#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "csrflab/http.hpp"
#include "csrflab/uri.hpp"

namespace csrflab {

// Server-side CSRF mitigation, exactly one per server instance.
enum class DefensePolicy { None, CsrfToken, OriginCheck, SameSiteStrict };

std::string_view to_string(DefensePolicy policy);
// Accepts "none", "csrf_token", "origin_check", "samesite_strict".
std::optional<DefensePolicy> parse_policy(std::string_view text);

inline constexpr DefensePolicy kAllPolicies[] = {
    DefensePolicy::None, DefensePolicy::CsrfToken, DefensePolicy::OriginCheck,
    DefensePolicy::SameSiteStrict};

namespace forum_paths {
inline constexpr std::string_view kRegister = "/cgi-bin/Forum/register.php";
inline constexpr std::string_view kLoginForm = "/cgi-bin/Forum/login_form.php";
inline constexpr std::string_view kLogin = "/cgi-bin/Forum/login.php";
inline constexpr std::string_view kIndex = "/cgi-bin/Forum/index.php";
inline constexpr std::string_view kNewTopicForm = "/cgi-bin/Forum/new_topic_form.php";
inline constexpr std::string_view kNewPmForm = "/cgi-bin/Forum/new_pm_form.php";
inline constexpr std::string_view kNewTopic = "/cgi-bin/Forum/new_topic.php";
inline constexpr std::string_view kNewPm = "/cgi-bin/Forum/new_pm.php";
inline constexpr std::string_view kAdminState = "/admin/state";
}  // namespace forum_paths

struct User {
    std::string username;
    std::string salt;             // hex
    std::string password_digest;  // hex SHA-256 of salt || password
};

struct SessionRecord {
    std::string session_id;  // 32 lowercase hex
    std::string username;
    std::optional<std::string> csrf_token;
};

enum class PostKind { Topic, PrivateMessage };

struct PostRecord {
    PostKind kind = PostKind::Topic;
    std::string sender;
    std::optional<std::string> recipient;
    std::string title;
    std::string message;
    std::uint64_t seq = 0;

    friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

std::string_view to_string(PostKind kind);

enum class FormKind { NewTopic, NewPm };

struct ForumConfig {
    DefensePolicy policy = DefensePolicy::None;
    std::uint64_t seed = 1;
    std::string admin_token = "lab-admin-token";
    // The origin the forum believes it is served from; origin_check
    // compares Origin/Referer against it.
    Origin public_origin = Origin::web("http", "forum.local", 8080);
};

struct DefenseVerdict {
    bool allowed = true;
    std::string reason;  // "missing_or_bad_token" or "bad_origin" on deny

    static DefenseVerdict allow() { return {}; }
    static DefenseVerdict deny(std::string reason) { return {false, std::move(reason)}; }
};

// Usernames: 1-32 chars of [A-Za-z0-9_].
bool valid_username(std::string_view username);

// The deliberately vulnerable forum. Every public member takes the state
// lock, so requests are handled serializably.
class ForumServer {
public:
    explicit ForumServer(ForumConfig config);

    const ForumConfig& config() const { return config_; }

    // Throws DuplicateUser, BadUsername.
    void register_user(std::string_view username, std::string_view password);

    // Routes one request to its endpoint handler.
    HttpResponse handle(const HttpRequest& request);

    // Wire-level entry: unparseable input yields a 400 response.
    Bytes handle_bytes(std::string_view raw);

    HttpResponse login(const HttpRequest& request);
    HttpResponse render_form_page(const HttpRequest& request, FormKind form);
    HttpResponse handle_new_pm(const HttpRequest& request);
    HttpResponse handle_new_topic(const HttpRequest& request);

    // Server-side defense middleware for state-changing POSTs.
    DefenseVerdict check_defenses(std::string_view session_id, const HttpRequest& request) const;

    // Deterministic JSON: user names, session ids cut to 8 chars, all posts.
    std::string admin_state() const;

    std::vector<PostRecord> posts() const;
    std::optional<SessionRecord> session(std::string_view session_id) const;

    // Full state including secrets and generator state.
    void save_snapshot(const std::filesystem::path& path) const;
    // Throws SnapshotError.
    void load_snapshot(const std::filesystem::path& path);

private:
    struct State {
        std::vector<User> users;
        std::vector<SessionRecord> sessions;
        std::vector<PostRecord> posts;
        std::uint64_t next_seq = 1;
    };

    std::string random_hex();
    void register_locked(std::string_view username, std::string_view password);
    const User* find_user(std::string_view username) const;
    SessionRecord* find_session(std::string_view session_id);
    const SessionRecord* find_session(std::string_view session_id) const;
    SessionRecord* session_from_cookie(const HttpRequest& request);

    HttpResponse login_locked(const HttpRequest& request);
    HttpResponse register_endpoint(const HttpRequest& request);
    HttpResponse login_form_page() const;
    HttpResponse index_page(const HttpRequest& request);
    HttpResponse form_page_locked(const HttpRequest& request, FormKind form);
    HttpResponse new_post_locked(const HttpRequest& request, PostKind kind);
    HttpResponse admin_endpoint(const HttpRequest& request) const;
    DefenseVerdict check_defenses_locked(const SessionRecord& session, const HttpRequest& request) const;
    bool origin_matches(std::string_view url) const;
    std::string admin_state_locked() const;

    ForumConfig config_;
    mutable std::mutex mutex_;
    std::mt19937_64 rng_;
    State state_;
};

}  // namespace csrflab
