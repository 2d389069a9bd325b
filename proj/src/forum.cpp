#include "csrflab/forum.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "csrflab/cookies.hpp"
#include "csrflab/errors.hpp"
#include "csrflab/form.hpp"
#include "csrflab/text.hpp"
#include "json.hpp"
#include "post_json.hpp"

namespace csrflab {
namespace {

using detail::Json;
using detail::post_from_json;
using detail::post_to_json;

constexpr std::string_view kSessionCookie = "session_id";
constexpr std::string_view kHtml = "text/html; charset=utf-8";

std::string to_hex(const unsigned char* data, std::size_t size) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (std::size_t i = 0; i < size; ++i) {
        out += digits[data[i] >> 4];
        out += digits[data[i] & 0x0F];
    }
    return out;
}

std::string digest_password(std::string_view salt, std::string_view password) {
    std::string input;
    input.reserve(salt.size() + password.size());
    input += salt;
    input += password;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(input.data(), input.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw LabError("SHA-256 digest failed");
    }
    return to_hex(md, len);
}

bool constant_time_equal(std::string_view a, std::string_view b) {
    return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

HttpResponse redirect(std::string_view location) {
    auto response = make_response(302);
    response.headers.set("Location", location);
    return response;
}

HttpResponse html_page(int status, std::string_view title, std::string_view body) {
    std::string html = "<html>\n<head><title>";
    html += html_escape(title);
    html += "</title></head>\n<body>\n";
    html += body;
    html += "</body>\n</html>\n";
    return make_response(status, std::move(html), kHtml);
}

HttpResponse error_page(int status, std::string_view detail) {
    std::string title(reason_phrase(status).value_or("Error"));
    return html_page(status, title, "<p>" + html_escape(title) + ": " + html_escape(detail) + "</p>\n");
}

std::string text_input(std::string_view name) {
    return "<input type=\"text\" name=\"" + std::string(name) + "\" value=\"\"/>\n";
}

std::optional<FormPairs> decode_body(const HttpRequest& request) {
    try {
        return form_urldecode(request.body);
    } catch (const MalformedEncoding&) {
        return std::nullopt;
    }
}

std::string required(const FormPairs& fields, std::string_view key) {
    const auto* v = find_field(fields, key);
    return v ? *v : std::string{};
}

}  // namespace

std::string_view to_string(DefensePolicy policy) {
    switch (policy) {
        case DefensePolicy::None: return "none";
        case DefensePolicy::CsrfToken: return "csrf_token";
        case DefensePolicy::OriginCheck: return "origin_check";
        case DefensePolicy::SameSiteStrict: return "samesite_strict";
    }
    return "none";
}

std::optional<DefensePolicy> parse_policy(std::string_view text) {
    for (auto p : kAllPolicies) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

std::string_view to_string(PostKind kind) {
    return kind == PostKind::Topic ? "topic" : "private_message";
}

bool valid_username(std::string_view username) {
    return !username.empty() && username.size() <= 32 &&
           std::all_of(username.begin(), username.end(), [](unsigned char c) {
               return std::isalnum(c) || c == '_';
           });
}

ForumServer::ForumServer(ForumConfig config) : config_(std::move(config)), rng_(config_.seed) {}

std::string ForumServer::random_hex() {
    unsigned char bytes[16];
    for (std::size_t i = 0; i < sizeof bytes; i += 8) {
        auto word = rng_();
        for (std::size_t k = 0; k < 8; ++k) bytes[i + k] = static_cast<unsigned char>(word >> (8 * k));
    }
    return to_hex(bytes, sizeof bytes);
}

void ForumServer::register_user(std::string_view username, std::string_view password) {
    std::scoped_lock lock(mutex_);
    register_locked(username, password);
}

void ForumServer::register_locked(std::string_view username, std::string_view password) {
    if (!valid_username(username)) throw BadUsername("'" + std::string(username) + "'");
    if (find_user(username)) throw DuplicateUser("'" + std::string(username) + "'");
    User user;
    user.username = std::string(username);
    user.salt = random_hex();
    user.password_digest = digest_password(user.salt, password);
    state_.users.push_back(std::move(user));
}

const User* ForumServer::find_user(std::string_view username) const {
    for (const auto& u : state_.users) {
        if (u.username == username) return &u;
    }
    return nullptr;
}

SessionRecord* ForumServer::find_session(std::string_view session_id) {
    for (auto& s : state_.sessions) {
        if (s.session_id == session_id) return &s;
    }
    return nullptr;
}

const SessionRecord* ForumServer::find_session(std::string_view session_id) const {
    return const_cast<ForumServer*>(this)->find_session(session_id);
}

SessionRecord* ForumServer::session_from_cookie(const HttpRequest& request) {
    auto header = request.headers.get("Cookie");
    if (!header) return nullptr;
    for (const auto& [name, value] : parse_cookie_header(*header)) {
        if (name == kSessionCookie) return find_session(value);
    }
    return nullptr;
}

HttpResponse ForumServer::handle(const HttpRequest& request) {
    namespace p = forum_paths;
    std::scoped_lock lock(mutex_);
    const auto& path = request.uri.path;
    const bool get = request.method == HttpMethod::Get;
    const bool post = request.method == HttpMethod::Post;

    if (post && path == p::kRegister) return register_endpoint(request);
    if (get && path == p::kLoginForm) return login_form_page();
    if (post && path == p::kLogin) return login_locked(request);
    if (get && path == p::kIndex) return index_page(request);
    if (get && path == p::kNewTopicForm) return form_page_locked(request, FormKind::NewTopic);
    if (get && path == p::kNewPmForm) return form_page_locked(request, FormKind::NewPm);
    if (post && path == p::kNewTopic) return new_post_locked(request, PostKind::Topic);
    if (post && path == p::kNewPm) return new_post_locked(request, PostKind::PrivateMessage);
    if (get && path == p::kAdminState) return admin_endpoint(request);
    return error_page(404, "no such endpoint " + std::string(to_string(request.method)) + " " + path);
}

Bytes ForumServer::handle_bytes(std::string_view raw) {
    HttpResponse response;
    try {
        response = handle(parse_request(raw));
    } catch (const MalformedMessage& e) {
        response = error_page(400, e.what());
    }
    response.headers.set("Connection", "close");
    return serialize(response);
}

HttpResponse ForumServer::register_endpoint(const HttpRequest& request) {
    auto fields = decode_body(request);
    if (!fields) return error_page(400, "malformed form body");
    auto username = required(*fields, "username");
    auto password = required(*fields, "password");
    if (username.empty() || password.empty()) return error_page(400, "username and password required");
    try {
        register_locked(username, password);
    } catch (const LabError& e) {
        return error_page(400, e.what());
    }
    return redirect(forum_paths::kLoginForm);
}

HttpResponse ForumServer::login(const HttpRequest& request) {
    std::scoped_lock lock(mutex_);
    return login_locked(request);
}

HttpResponse ForumServer::login_locked(const HttpRequest& request) {
    auto fields = decode_body(request);
    if (!fields) return error_page(400, "malformed form body");
    const auto* username = find_field(*fields, "username");
    const auto* password = find_field(*fields, "password");
    if (!username || !password) return error_page(400, "username and password required");

    const User* user = find_user(*username);
    if (!user || !constant_time_equal(user->password_digest, digest_password(user->salt, *password))) {
        return error_page(401, "bad credentials");
    }

    SessionRecord session;
    do {
        session.session_id = random_hex();
    } while (find_session(session.session_id));
    session.username = user->username;

    std::string cookie = std::string(kSessionCookie) + "=" + session.session_id + "; Path=/";
    if (config_.policy == DefensePolicy::SameSiteStrict) cookie += "; SameSite=Strict";
    state_.sessions.push_back(std::move(session));

    auto response = redirect(forum_paths::kIndex);
    response.headers.add("Set-Cookie", cookie);
    return response;
}

HttpResponse ForumServer::login_form_page() const {
    std::string body =
        "<form id=\"login-form\" action=\"" + std::string(forum_paths::kLogin) + "\" method=\"post\">\n"
        "<input type=\"text\" name=\"username\" value=\"\"/>\n"
        "<input type=\"password\" name=\"password\" value=\"\"/>\n"
        "<input type=\"submit\" value=\"Login\"/>\n"
        "</form>\n";
    return html_page(200, "Forum login", body);
}

HttpResponse ForumServer::index_page(const HttpRequest& request) {
    std::string body;
    if (const auto* session = session_from_cookie(request)) {
        body += "<p>Logged in as " + html_escape(session->username) + "</p>\n";
    }
    body += "<ul>\n";
    for (const auto& post : state_.posts) {
        if (post.kind != PostKind::Topic) continue;
        body += "<li>" + html_escape(post.title) + " by " + html_escape(post.sender) + "</li>\n";
    }
    body += "</ul>\n";
    return html_page(200, "Forum", body);
}

HttpResponse ForumServer::render_form_page(const HttpRequest& request, FormKind form) {
    std::scoped_lock lock(mutex_);
    return form_page_locked(request, form);
}

HttpResponse ForumServer::form_page_locked(const HttpRequest& request, FormKind form) {
    auto* session = session_from_cookie(request);
    if (!session) return error_page(401, "login required");

    const bool pm = form == FormKind::NewPm;
    std::string body = "<form id=\"" + std::string(pm ? "new-pm-form" : "new-topic-form") +
                       "\" action=\"" + std::string(pm ? forum_paths::kNewPm : forum_paths::kNewTopic) +
                       "\" method=\"post\">\n";
    if (pm) body += text_input("recip");
    body += text_input("title");
    body += text_input("message");
    if (config_.policy == DefensePolicy::CsrfToken) {
        if (!session->csrf_token) session->csrf_token = random_hex();
        body += "<input type=\"hidden\" name=\"csrf_token\" value=\"" + *session->csrf_token + "\"/>\n";
    }
    body += "<input type=\"submit\" value=\"Send\"/>\n</form>\n";
    return html_page(200, pm ? "New private message" : "New topic", body);
}

DefenseVerdict ForumServer::check_defenses(std::string_view session_id, const HttpRequest& request) const {
    std::scoped_lock lock(mutex_);
    const auto* session = find_session(session_id);
    if (!session) return DefenseVerdict::deny("no_session");
    return check_defenses_locked(*session, request);
}

bool ForumServer::origin_matches(std::string_view url) const {
    try {
        return Origin::of(parse_http_uri(url)) == config_.public_origin;
    } catch (const BadUrl&) {
        return false;
    }
}

DefenseVerdict ForumServer::check_defenses_locked(const SessionRecord& session,
                                                  const HttpRequest& request) const {
    switch (config_.policy) {
        case DefensePolicy::None:
        case DefensePolicy::SameSiteStrict:
            return DefenseVerdict::allow();
        case DefensePolicy::CsrfToken: {
            auto fields = decode_body(request);
            const auto* token = fields ? find_field(*fields, "csrf_token") : nullptr;
            if (token && session.csrf_token && constant_time_equal(*token, *session.csrf_token)) {
                return DefenseVerdict::allow();
            }
            return DefenseVerdict::deny("missing_or_bad_token");
        }
        case DefensePolicy::OriginCheck: {
            auto source = request.headers.get("Origin");
            if (!source) source = request.headers.get("Referer");
            if (source && *source != "null" && origin_matches(*source)) return DefenseVerdict::allow();
            return DefenseVerdict::deny("bad_origin");
        }
    }
    return DefenseVerdict::deny("unknown_policy");
}

HttpResponse ForumServer::handle_new_pm(const HttpRequest& request) {
    std::scoped_lock lock(mutex_);
    return new_post_locked(request, PostKind::PrivateMessage);
}

HttpResponse ForumServer::handle_new_topic(const HttpRequest& request) {
    std::scoped_lock lock(mutex_);
    return new_post_locked(request, PostKind::Topic);
}

HttpResponse ForumServer::new_post_locked(const HttpRequest& request, PostKind kind) {
    // The sender is whoever the session cookie says; the body cannot change it.
    const auto* session = session_from_cookie(request);
    if (!session) return error_page(401, "login required");

    auto verdict = check_defenses_locked(*session, request);
    if (!verdict.allowed) return error_page(403, verdict.reason);

    auto fields = decode_body(request);
    if (!fields) return error_page(400, "malformed form body");
    PostRecord post;
    post.kind = kind;
    post.sender = session->username;
    post.title = required(*fields, "title");
    post.message = required(*fields, "message");
    if (post.title.empty() || post.message.empty()) return error_page(400, "title and message required");
    if (kind == PostKind::PrivateMessage) {
        auto recipient = required(*fields, "recip");
        if (recipient.empty()) return error_page(400, "recip required");
        if (!find_user(recipient)) return error_page(404, "no such user " + recipient);
        post.recipient = recipient;
    }
    post.seq = state_.next_seq++;
    state_.posts.push_back(std::move(post));
    return redirect(forum_paths::kIndex);
}

HttpResponse ForumServer::admin_endpoint(const HttpRequest& request) const {
    auto auth = request.headers.get("Authorization");
    if (!auth || !constant_time_equal(*auth, "Bearer " + config_.admin_token)) {
        return error_page(401, "admin token required");
    }
    return make_response(200, admin_state_locked(), "application/json");
}

std::string ForumServer::admin_state() const {
    std::scoped_lock lock(mutex_);
    return admin_state_locked();
}

std::string ForumServer::admin_state_locked() const {
    Json users = Json::array();
    for (const auto& u : state_.users) users.push_back(u.username);
    Json sessions = Json::array();
    for (const auto& s : state_.sessions) {
        sessions.push_back(Json{{"id", s.session_id.substr(0, 8)}, {"username", s.username}});
    }
    Json posts = Json::array();
    for (const auto& p : state_.posts) posts.push_back(post_to_json(p));
    Json root;
    root["users"] = std::move(users);
    root["sessions"] = std::move(sessions);
    root["posts"] = std::move(posts);
    return root.dump();
}

std::vector<PostRecord> ForumServer::posts() const {
    std::scoped_lock lock(mutex_);
    return state_.posts;
}

std::optional<SessionRecord> ForumServer::session(std::string_view session_id) const {
    std::scoped_lock lock(mutex_);
    if (const auto* s = find_session(session_id)) return *s;
    return std::nullopt;
}

void ForumServer::save_snapshot(const std::filesystem::path& path) const {
    std::scoped_lock lock(mutex_);
    Json root;
    Json users = Json::array();
    for (const auto& u : state_.users) {
        users.push_back(Json{{"username", u.username}, {"salt", u.salt}, {"password_digest", u.password_digest}});
    }
    Json sessions = Json::array();
    for (const auto& s : state_.sessions) {
        sessions.push_back(Json{{"id", s.session_id},
                                {"username", s.username},
                                {"csrf_token", s.csrf_token ? Json(*s.csrf_token) : Json(nullptr)}});
    }
    Json posts = Json::array();
    for (const auto& p : state_.posts) posts.push_back(post_to_json(p));
    std::ostringstream rng_state;
    rng_state << rng_;
    root["users"] = std::move(users);
    root["sessions"] = std::move(sessions);
    root["posts"] = std::move(posts);
    root["next_seq"] = state_.next_seq;
    root["rng_state"] = rng_state.str();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("cannot write " + path.string());
    out << root.dump(2) << '\n';
}

void ForumServer::load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot read " + path.string());
    State loaded;
    std::mt19937_64 rng;
    try {
        auto root = Json::parse(in);
        for (const auto& u : root.at("users")) {
            loaded.users.push_back({u.at("username").get<std::string>(), u.at("salt").get<std::string>(),
                                    u.at("password_digest").get<std::string>()});
        }
        for (const auto& s : root.at("sessions")) {
            SessionRecord rec{s.at("id").get<std::string>(), s.at("username").get<std::string>(), std::nullopt};
            if (!s.at("csrf_token").is_null()) rec.csrf_token = s.at("csrf_token").get<std::string>();
            loaded.sessions.push_back(std::move(rec));
        }
        for (const auto& p : root.at("posts")) loaded.posts.push_back(post_from_json(p));
        loaded.next_seq = root.at("next_seq").get<std::uint64_t>();
        std::istringstream rng_state(root.at("rng_state").get<std::string>());
        rng_state >> rng;
        if (!rng_state) throw SnapshotError("bad rng_state");
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotError(path.string() + ": " + e.what());
    }
    for (const auto& s : loaded.sessions) {
        bool known = std::any_of(loaded.users.begin(), loaded.users.end(),
                                 [&](const User& u) { return u.username == s.username; });
        if (!known) throw SnapshotError("session for unknown user '" + s.username + "'");
    }
    std::scoped_lock lock(mutex_);
    state_ = std::move(loaded);
    rng_ = rng;
}

}  // namespace csrflab
