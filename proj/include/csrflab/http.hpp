#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csrflab/uri.hpp"

namespace csrflab {

enum class HttpMethod { Get, Head, Post, Put, Delete, Trace, Options };

std::string_view to_string(HttpMethod method);
std::optional<HttpMethod> parse_method(std::string_view token);

struct Header {
    std::string name;
    std::string value;

    friend bool operator==(const Header&, const Header&) = default;
};

// Throws IllegalHeader when the name is not an RFC 7230 token or the value
// carries CR, LF or NUL.
void validate_header(std::string_view name, std::string_view value);

// Ordered header list. Names match case-insensitively and are emitted with
// their original case.
class HeaderList {
public:
    // Replaces the value of the first header whose name matches; appends
    // a new header when none does. Later duplicates are left alone.
    void set(std::string_view name, std::string_view value);

    // Always appends (duplicate Set-Cookie headers are legal).
    void add(std::string_view name, std::string_view value);

    std::optional<std::string> get(std::string_view name) const;
    std::vector<std::string> get_all(std::string_view name) const;
    std::size_t count(std::string_view name) const;
    void remove_all(std::string_view name);

    const std::vector<Header>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    friend bool operator==(const HeaderList&, const HeaderList&) = default;

private:
    std::vector<Header> entries_;
};

inline constexpr std::string_view kHttpVersion = "HTTP/1.1";

// Raw octets. Bodies are never interpreted as text by the message layer.
using Bytes = std::string;

struct HttpRequest {
    HttpMethod method = HttpMethod::Get;
    RequestUri uri;
    std::string version{kHttpVersion};
    HeaderList headers;
    Bytes body;

    friend bool operator==(const HttpRequest&, const HttpRequest&) = default;
};

struct HttpResponse {
    std::string version{kHttpVersion};
    int status = 200;
    std::string reason = "OK";
    HeaderList headers;
    Bytes body;

    friend bool operator==(const HttpResponse&, const HttpResponse&) = default;
};

// Fixed reason-phrase table for the lab's status subset; nullopt otherwise.
std::optional<std::string_view> reason_phrase(int status);

// Request for `uri` with its Host header already set.
HttpRequest make_request(HttpMethod method, const RequestUri& uri);

// Response with the table reason phrase and Content-Length set.
HttpResponse make_response(int status, Bytes body = {}, std::string_view content_type = {});

// Replaces the body and keeps Content-Length in step with it.
void set_body(HttpRequest& request, Bytes body);
void set_body(HttpResponse& response, Bytes body);

// Throw MalformedMessage.
HttpRequest parse_request(std::string_view raw);
HttpResponse parse_response(std::string_view raw);

Bytes serialize(const HttpRequest& request);
Bytes serialize(const HttpResponse& response);

// Free-function forms of HeaderList::set/get; set_header throws IllegalHeader.
template <typename Message>
Message& set_header(Message& message, std::string_view name, std::string_view value) {
    message.headers.set(name, value);
    return message;
}

template <typename Message>
std::optional<std::string> get_header(const Message& message, std::string_view name) {
    return message.headers.get(name);
}

// Returns how many bytes of `buffer` make up one complete message, or
// nullopt when more input is needed. Throws MalformedMessage when the header
// block is already unparseable.
std::optional<std::size_t> complete_message_length(std::string_view buffer);

}  // namespace csrflab
