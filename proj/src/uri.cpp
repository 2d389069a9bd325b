#include "csrflab/uri.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

#include "csrflab/errors.hpp"
#include "csrflab/text.hpp"

namespace csrflab {
namespace {

bool valid_host(std::string_view host) {
    if (host.empty() || host.size() > 253) return false;
    return std::all_of(host.begin(), host.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
    });
}

bool valid_path_chars(std::string_view s) {
    return std::none_of(s.begin(), s.end(), [](unsigned char c) {
        return c <= 0x20 || c == 0x7f;
    });
}

std::uint16_t parse_port(std::string_view digits, std::string_view whole) {
    unsigned value = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size() ||
        value == 0 || value > 65535) {
        throw BadUrl("bad port in '" + std::string(whole) + "'");
    }
    return static_cast<std::uint16_t>(value);
}

// RFC 3986 remove_dot_segments, applied to absolute paths only.
std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t pos = 1;
    bool trailing_slash = false;
    while (pos <= path.size()) {
        auto next = path.find('/', pos);
        if (next == std::string_view::npos) next = path.size();
        auto seg = path.substr(pos, next - pos);
        trailing_slash = false;
        if (seg == "..") {
            if (!out.empty()) out.pop_back();
            trailing_slash = true;
        } else if (seg == ".") {
            trailing_slash = true;
        } else {
            out.push_back(seg);
        }
        pos = next + 1;
    }
    std::string result;
    for (auto seg : out) {
        result += '/';
        result += seg;
    }
    if (trailing_slash || result.empty()) result += '/';
    return result;
}

}  // namespace

std::string RequestUri::authority() const {
    if (port == 80) return host;
    return host + ":" + std::to_string(port);
}

std::string RequestUri::target() const {
    return query ? path + "?" + *query : path;
}

RequestUri parse_uri(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw BadUrl("missing scheme in '" + std::string(text) + "'");
    }
    RequestUri uri;
    uri.scheme = to_lower(text.substr(0, colon));
    auto rest = text.substr(colon + 1);

    if (uri.scheme == "data") {
        uri.port = 0;
        uri.path = std::string(rest);
        return uri;
    }
    if (uri.scheme != "http" && uri.scheme != "file" && uri.scheme != "asset") {
        throw BadUrl("unsupported scheme '" + uri.scheme + "'");
    }
    if (!starts_with(rest, "//")) {
        throw BadUrl("expected '//' after scheme in '" + std::string(text) + "'");
    }
    rest.remove_prefix(2);

    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

    auto path_start = rest.find_first_of("/?");
    auto authority = rest.substr(0, path_start);
    auto tail = path_start == std::string_view::npos ? std::string_view{} : rest.substr(path_start);

    if (uri.is_http()) {
        auto port_colon = authority.rfind(':');
        auto host = authority.substr(0, port_colon);
        if (port_colon != std::string_view::npos) {
            uri.port = parse_port(authority.substr(port_colon + 1), text);
        }
        uri.host = to_lower(host);
        if (!valid_host(uri.host)) throw BadUrl("bad host in '" + std::string(text) + "'");
    } else {
        if (!authority.empty()) {
            throw BadUrl(uri.scheme + " URIs take no host: '" + std::string(text) + "'");
        }
        uri.port = 0;
    }

    auto q = tail.find('?');
    std::string_view path = tail.substr(0, q);
    if (q != std::string_view::npos) uri.query = std::string(tail.substr(q + 1));
    uri.path = path.empty() ? "/" : std::string(path);
    if (!valid_path_chars(uri.path) || (uri.query && !valid_path_chars(*uri.query))) {
        throw BadUrl("illegal characters in '" + std::string(text) + "'");
    }
    return uri;
}

RequestUri parse_http_uri(std::string_view text) {
    auto uri = parse_uri(text);
    if (!uri.is_http()) throw BadUrl("not an http URL: '" + std::string(text) + "'");
    return uri;
}

std::string to_string(const RequestUri& uri) {
    if (uri.scheme == "data") return "data:" + uri.path;
    if (uri.is_http()) return "http://" + uri.authority() + uri.target();
    return uri.scheme + "://" + uri.target();
}

RequestUri resolve_url(const RequestUri& base, std::string_view reference) {
    if (auto colon = reference.find(':'); colon != std::string_view::npos) {
        auto scheme = reference.substr(0, colon);
        bool looks_like_scheme = !scheme.empty() && std::all_of(scheme.begin(), scheme.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
        });
        if (looks_like_scheme && reference.find('/') > colon) return parse_uri(reference);
    }
    if (starts_with(reference, "//")) {
        return parse_uri(base.scheme + ":" + std::string(reference));
    }
    if (base.scheme == "data") throw BadUrl("cannot resolve against a data: URI");

    RequestUri out = base;
    if (auto hash = reference.find('#'); hash != std::string_view::npos) {
        reference = reference.substr(0, hash);
    }
    if (reference.empty()) return out;

    auto q = reference.find('?');
    std::string_view path = reference.substr(0, q);
    out.query = q == std::string_view::npos ? std::nullopt
                                            : std::optional<std::string>(reference.substr(q + 1));
    if (path.empty()) {
        out.query = out.query ? out.query : base.query;
        return out;
    }
    std::string merged;
    if (path.front() == '/') {
        merged = std::string(path);
    } else {
        auto dir = base.path.substr(0, base.path.rfind('/') + 1);
        merged = dir + std::string(path);
    }
    out.path = remove_dot_segments(merged);
    if (!valid_path_chars(out.path) || (out.query && !valid_path_chars(*out.query))) {
        throw BadUrl("illegal characters in '" + std::string(reference) + "'");
    }
    return out;
}

Origin Origin::web(std::string scheme, std::string host, std::uint16_t port) {
    Origin o;
    o.opaque_ = false;
    o.scheme_ = std::move(scheme);
    o.host_ = std::move(host);
    o.port_ = port;
    return o;
}

Origin Origin::of(const RequestUri& uri) {
    if (!uri.is_http()) return opaque();
    return web(uri.scheme, uri.host, uri.port);
}

std::string Origin::serialize() const {
    if (opaque_) return "null";
    std::string out = scheme_ + "://" + host_;
    if (port_ != 80) out += ":" + std::to_string(port_);
    return out;
}

bool same_origin(const Origin& a, const Origin& b) {
    if (a.is_opaque() || b.is_opaque()) return false;
    return a == b;
}

}  // namespace csrflab
