#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csrflab/http.hpp"
#include "csrflab/uri.hpp"

namespace csrflab {

enum class SameSite { None, Strict };

// Host-only session cookie. No Domain attribute, no expiry.
struct Cookie {
    std::string name;
    std::string value;
    std::string domain;
    std::string path = "/";
    SameSite same_site = SameSite::None;

    friend bool operator==(const Cookie&, const Cookie&) = default;
};

// Who is asking for the request. An absent initiator means the load came
// straight from the embedding application rather than from a document.
struct RequestContext {
    std::optional<Origin> initiator_origin;
    Origin target_origin;
};

// Parses `name=value(; Path=...)(; SameSite=Strict)` with domain left
// unset. Returns nullopt on a grammar violation, with the reason in `error`.
std::optional<Cookie> parse_set_cookie(std::string_view header, std::string* error = nullptr);

class CookieStore {
public:
    struct StoreReport {
        std::size_t stored = 0;
        // Offending Set-Cookie values with the reason each was skipped.
        std::vector<std::string> rejected;
    };

    // Stores every well-formed Set-Cookie header of `response` under
    // url's host. Malformed headers are skipped and reported. No-op when
    // accepting is disabled.
    StoreReport store_from_response(const RequestUri& url, const HttpResponse& response);

    // Inserts or replaces by (name, domain, path).
    void store(Cookie cookie);

    // The hosting application's direct view of the jar: "a=1; b=2" for
    // every host/path match in storage order. SameSite is not consulted.
    // Throws BadUrl for anything but an http URL.
    std::optional<std::string> get_cookie(std::string_view url) const;
    std::optional<std::string> get_cookie(const RequestUri& url) const;

    // Cookie header the browser attaches. Same selection as get_cookie,
    // minus SameSite=Strict cookies on cross-site initiated requests.
    std::optional<std::string> cookies_for_request(const RequestContext& ctx,
                                                   std::string_view path) const;

    void clear() { entries_.clear(); }

    void set_accept_cookie(bool accept) { accept_enabled_ = accept; }
    bool accept_cookie() const { return accept_enabled_; }

    const std::vector<Cookie>& entries() const { return entries_; }

private:
    std::vector<const Cookie*> matching(std::string_view host, std::string_view path) const;

    std::vector<Cookie> entries_;
    bool accept_enabled_ = true;
};

// Parses a Cookie request header into (name, value) pairs.
std::vector<std::pair<std::string, std::string>> parse_cookie_header(std::string_view header);

}  // namespace csrflab
