#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace csrflab {

// Scheme set understood by the lab: http for the network, file/asset for
// bundled documents, data for inline payloads.
struct RequestUri {
    std::string scheme = "http";
    std::string host;
    std::uint16_t port = 80;
    std::string path = "/";
    std::optional<std::string> query;

    bool is_http() const { return scheme == "http"; }

    // "host" or "host:port" when the port is not the http default.
    std::string authority() const;

    // Path plus "?query" when a query is present: the HTTP request-target.
    std::string target() const;

    friend bool operator==(const RequestUri&, const RequestUri&) = default;
};

// Throws BadUrl. Fragments are discarded.
RequestUri parse_uri(std::string_view text);

std::string to_string(const RequestUri& uri);

// Resolves a (possibly relative) reference against an http base.
// Throws BadUrl when the result is not a valid URI.
RequestUri resolve_url(const RequestUri& base, std::string_view reference);

// Parses an http URI; rejects any other scheme with BadUrl.
RequestUri parse_http_uri(std::string_view text);

// Either a (scheme, host, port) tuple or an opaque origin. Documents loaded
// from assets, files or raw data are opaque and serialize as "null".
class Origin {
public:
    static Origin opaque() { return Origin{}; }
    static Origin web(std::string scheme, std::string host, std::uint16_t port);
    static Origin of(const RequestUri& uri);

    bool is_opaque() const { return opaque_; }
    const std::string& scheme() const { return scheme_; }
    const std::string& host() const { return host_; }
    std::uint16_t port() const { return port_; }

    // Value for an Origin header.
    std::string serialize() const;

    // Structural equality (two opaque origins compare equal here).
    friend bool operator==(const Origin&, const Origin&) = default;

private:
    bool opaque_ = true;
    std::string scheme_;
    std::string host_;
    std::uint16_t port_ = 0;
};

// Same-origin in the browser sense: an opaque origin matches nothing.
bool same_origin(const Origin& a, const Origin& b);

}  // namespace csrflab
