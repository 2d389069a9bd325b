#include "csrflab/cookies.hpp"

#include <algorithm>

#include "csrflab/errors.hpp"
#include "csrflab/text.hpp"

namespace csrflab {
namespace {

bool valid_cookie_name(std::string_view name) {
    return !name.empty() && std::none_of(name.begin(), name.end(), [](unsigned char c) {
        return c == '=' || c == ';' || c <= 0x20 || c == 0x7f;
    });
}

bool valid_cookie_value(std::string_view value) {
    return value.find_first_of(";\r\n") == std::string_view::npos;
}

bool is_cross_site(const RequestContext& ctx) {
    return ctx.initiator_origin && !same_origin(*ctx.initiator_origin, ctx.target_origin);
}

std::optional<std::string> join(const std::vector<const Cookie*>& cookies) {
    if (cookies.empty()) return std::nullopt;
    std::string out;
    for (const auto* c : cookies) {
        if (!out.empty()) out += "; ";
        out += c->name;
        out += '=';
        out += c->value;
    }
    return out;
}

}  // namespace

std::optional<Cookie> parse_set_cookie(std::string_view header, std::string* error) {
    auto fail = [&](std::string reason) -> std::optional<Cookie> {
        if (error) *error = std::move(reason);
        return std::nullopt;
    };

    auto parts = split(header, ';');
    auto pair = trim(parts.front());
    auto eq = pair.find('=');
    if (eq == std::string_view::npos) return fail("missing '=' in name=value");

    Cookie cookie;
    cookie.name = std::string(trim(pair.substr(0, eq)));
    cookie.value = std::string(trim(pair.substr(eq + 1)));
    if (!valid_cookie_name(cookie.name)) return fail("illegal cookie name");
    if (!valid_cookie_value(cookie.value)) return fail("illegal cookie value");

    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto attr = trim(parts[i]);
        auto aeq = attr.find('=');
        if (aeq == std::string_view::npos) return fail("attribute without value: '" + std::string(attr) + "'");
        auto key = trim(attr.substr(0, aeq));
        auto val = trim(attr.substr(aeq + 1));
        if (iequals(key, "Path")) {
            if (val.empty() || val.front() != '/') return fail("Path must begin with '/'");
            cookie.path = std::string(val);
        } else if (iequals(key, "SameSite")) {
            if (!iequals(val, "Strict")) return fail("only SameSite=Strict is supported");
            cookie.same_site = SameSite::Strict;
        } else {
            return fail("unsupported attribute '" + std::string(key) + "'");
        }
    }
    return cookie;
}

CookieStore::StoreReport CookieStore::store_from_response(const RequestUri& url,
                                                          const HttpResponse& response) {
    StoreReport report;
    if (!accept_enabled_) return report;
    if (!url.is_http()) throw BadUrl("cookies are only stored for http URLs");

    for (const auto& header : response.headers.get_all("Set-Cookie")) {
        std::string reason;
        auto cookie = parse_set_cookie(header, &reason);
        if (!cookie) {
            report.rejected.push_back("MalformedSetCookie: " + reason + " in '" + header + "'");
            continue;
        }
        cookie->domain = url.host;
        store(std::move(*cookie));
        ++report.stored;
    }
    return report;
}

void CookieStore::store(Cookie cookie) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Cookie& c) {
        return c.name == cookie.name && c.domain == cookie.domain && c.path == cookie.path;
    });
    if (it != entries_.end()) {
        *it = std::move(cookie);
    } else {
        entries_.push_back(std::move(cookie));
    }
}

std::vector<const Cookie*> CookieStore::matching(std::string_view host, std::string_view path) const {
    std::vector<const Cookie*> out;
    for (const auto& c : entries_) {
        if (c.domain == host && starts_with(path, c.path)) out.push_back(&c);
    }
    return out;
}

std::optional<std::string> CookieStore::get_cookie(std::string_view url) const {
    return get_cookie(parse_http_uri(url));
}

std::optional<std::string> CookieStore::get_cookie(const RequestUri& url) const {
    if (!url.is_http()) throw BadUrl("getCookie needs an http URL");
    return join(matching(url.host, url.path));
}

std::optional<std::string> CookieStore::cookies_for_request(const RequestContext& ctx,
                                                            std::string_view path) const {
    if (ctx.target_origin.is_opaque()) return std::nullopt;
    auto selected = matching(ctx.target_origin.host(), path);
    if (is_cross_site(ctx)) {
        std::erase_if(selected, [](const Cookie* c) { return c->same_site == SameSite::Strict; });
    }
    return join(selected);
}

std::vector<std::pair<std::string, std::string>> parse_cookie_header(std::string_view header) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto part : split(header, ';')) {
        part = trim(part);
        auto eq = part.find('=');
        if (part.empty() || eq == std::string_view::npos) continue;
        out.emplace_back(std::string(trim(part.substr(0, eq))), std::string(trim(part.substr(eq + 1))));
    }
    return out;
}

}  // namespace csrflab
