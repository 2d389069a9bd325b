#include "csrflab/http.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "csrflab/errors.hpp"
#include "csrflab/text.hpp"

namespace csrflab {
namespace {

constexpr std::array<std::pair<HttpMethod, std::string_view>, 7> kMethods{{
    {HttpMethod::Get, "GET"},
    {HttpMethod::Head, "HEAD"},
    {HttpMethod::Post, "POST"},
    {HttpMethod::Put, "PUT"},
    {HttpMethod::Delete, "DELETE"},
    {HttpMethod::Trace, "TRACE"},
    {HttpMethod::Options, "OPTIONS"},
}};

constexpr std::array<std::pair<int, std::string_view>, 7> kReasons{{
    {200, "OK"},
    {302, "Found"},
    {400, "Bad Request"},
    {401, "Unauthorized"},
    {403, "Forbidden"},
    {404, "Not Found"},
    {500, "Internal Server Error"},
}};

constexpr std::string_view kCrlf = "\r\n";
constexpr std::string_view kTerminator = "\r\n\r\n";

bool is_tchar(unsigned char c) {
    if (std::isalnum(c)) return true;
    constexpr std::string_view extra = "!#$%&'*+-.^_`|~";
    return extra.find(static_cast<char>(c)) != std::string_view::npos;
}

struct HeadParts {
    std::string_view start_line;
    HeaderList headers;
    std::string_view body;
};

std::size_t parse_content_length(std::string_view value) {
    std::size_t n = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (value.empty() || ec != std::errc{} || end != value.data() + value.size()) {
        throw MalformedMessage("bad Content-Length '" + std::string(value) + "'");
    }
    return n;
}

// Splits start line and header block, validates headers and the body length.
HeadParts split_message(std::string_view raw) {
    auto end = raw.find(kTerminator);
    if (end == std::string_view::npos) throw MalformedMessage("missing CRLFCRLF header terminator");

    HeadParts parts;
    auto head = raw.substr(0, end);
    parts.body = raw.substr(end + kTerminator.size());

    std::size_t pos = 0;
    bool first = true;
    while (pos <= head.size()) {
        auto eol = head.find(kCrlf, pos);
        if (eol == std::string_view::npos) eol = head.size();
        auto line = head.substr(pos, eol - pos);
        pos = eol + kCrlf.size();

        if (line.find_first_of(std::string_view("\r\n\0", 3)) != std::string_view::npos) {
            throw MalformedMessage("illegal octet in message head");
        }
        if (first) {
            parts.start_line = line;
            first = false;
            continue;
        }
        if (line.empty() || line.front() == ' ' || line.front() == '\t') {
            throw MalformedMessage("empty or folded header line");
        }
        auto colon = line.find(':');
        if (colon == std::string_view::npos) throw MalformedMessage("header line without ':'");
        auto name = line.substr(0, colon);
        auto value = trim(line.substr(colon + 1));
        try {
            parts.headers.add(name, value);
        } catch (const IllegalHeader& e) {
            throw MalformedMessage(e.what());
        }
    }

    if (parts.headers.count("Transfer-Encoding") > 0) {
        throw MalformedMessage("Transfer-Encoding is not supported");
    }
    auto lengths = parts.headers.get_all("Content-Length");
    if (lengths.size() > 1) throw MalformedMessage("multiple Content-Length headers");
    std::size_t expected = lengths.empty() ? 0 : parse_content_length(lengths.front());
    if (parts.body.size() != expected) {
        throw MalformedMessage("Content-Length " + std::to_string(expected) + " but " +
                               std::to_string(parts.body.size()) + " body bytes");
    }
    return parts;
}

void append_headers(Bytes& out, const HeaderList& headers) {
    for (const auto& h : headers.entries()) {
        out += h.name;
        out += ": ";
        out += h.value;
        out += kCrlf;
    }
    out += kCrlf;
}

}  // namespace

std::string_view to_string(HttpMethod method) {
    for (auto [m, name] : kMethods) {
        if (m == method) return name;
    }
    return "GET";
}

std::optional<HttpMethod> parse_method(std::string_view token) {
    for (auto [m, name] : kMethods) {
        if (name == token) return m;
    }
    return std::nullopt;
}

void validate_header(std::string_view name, std::string_view value) {
    if (name.empty() || !std::all_of(name.begin(), name.end(),
                                     [](unsigned char c) { return is_tchar(c); })) {
        throw IllegalHeader("illegal header name '" + std::string(name) + "'");
    }
    if (value.find_first_of(std::string_view("\r\n\0", 3)) != std::string_view::npos) {
        throw IllegalHeader("CR, LF or NUL in value of header '" + std::string(name) + "'");
    }
}

void HeaderList::set(std::string_view name, std::string_view value) {
    value = trim(value);
    validate_header(name, value);
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Header& h) { return iequals(h.name, name); });
    if (it != entries_.end()) {
        it->value = std::string(value);
    } else {
        entries_.push_back({std::string(name), std::string(value)});
    }
}

void HeaderList::add(std::string_view name, std::string_view value) {
    value = trim(value);
    validate_header(name, value);
    entries_.push_back({std::string(name), std::string(value)});
}

std::optional<std::string> HeaderList::get(std::string_view name) const {
    for (const auto& h : entries_) {
        if (iequals(h.name, name)) return h.value;
    }
    return std::nullopt;
}

std::vector<std::string> HeaderList::get_all(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& h : entries_) {
        if (iequals(h.name, name)) out.push_back(h.value);
    }
    return out;
}

std::size_t HeaderList::count(std::string_view name) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [&](const Header& h) { return iequals(h.name, name); }));
}

void HeaderList::remove_all(std::string_view name) {
    std::erase_if(entries_, [&](const Header& h) { return iequals(h.name, name); });
}

std::optional<std::string_view> reason_phrase(int status) {
    for (auto [code, reason] : kReasons) {
        if (code == status) return reason;
    }
    return std::nullopt;
}

HttpRequest make_request(HttpMethod method, const RequestUri& uri) {
    if (!uri.is_http()) throw BadUrl("requests need an http URI, got '" + to_string(uri) + "'");
    HttpRequest request;
    request.method = method;
    request.uri = uri;
    request.headers.set("Host", uri.authority());
    return request;
}

HttpResponse make_response(int status, Bytes body, std::string_view content_type) {
    HttpResponse response;
    response.status = status;
    response.reason = std::string(reason_phrase(status).value_or("Internal Server Error"));
    if (!content_type.empty()) response.headers.set("Content-Type", content_type);
    set_body(response, std::move(body));
    return response;
}

void set_body(HttpRequest& request, Bytes body) {
    request.body = std::move(body);
    if (request.body.empty() && !request.headers.get("Content-Length")) return;
    request.headers.set("Content-Length", std::to_string(request.body.size()));
}

void set_body(HttpResponse& response, Bytes body) {
    response.body = std::move(body);
    response.headers.set("Content-Length", std::to_string(response.body.size()));
}

HttpRequest parse_request(std::string_view raw) {
    auto parts = split_message(raw);

    auto fields = split(parts.start_line, ' ');
    if (fields.size() != 3) throw MalformedMessage("bad request line '" + std::string(parts.start_line) + "'");
    auto method = parse_method(fields[0]);
    if (!method) throw MalformedMessage("unknown method '" + std::string(fields[0]) + "'");
    if (fields[2] != kHttpVersion) throw MalformedMessage("unsupported version '" + std::string(fields[2]) + "'");
    auto target = fields[1];
    if (target.empty() || target.front() != '/' || target.find('#') != std::string_view::npos) {
        throw MalformedMessage("bad request target '" + std::string(target) + "'");
    }

    if (parts.headers.count("Host") != 1) throw MalformedMessage("exactly one Host header is required");
    HttpRequest request;
    request.method = *method;
    request.version = std::string(fields[2]);
    try {
        request.uri = parse_http_uri("http://" + *parts.headers.get("Host") + std::string(target));
    } catch (const BadUrl& e) {
        throw MalformedMessage(e.what());
    }
    if (request.uri.target() != target) throw MalformedMessage("bad request target");
    request.headers = std::move(parts.headers);
    request.body = std::string(parts.body);
    return request;
}

HttpResponse parse_response(std::string_view raw) {
    auto parts = split_message(raw);
    auto line = parts.start_line;

    auto sp1 = line.find(' ');
    if (sp1 == std::string_view::npos) throw MalformedMessage("bad status line '" + std::string(line) + "'");
    auto version = line.substr(0, sp1);
    if (version != kHttpVersion) throw MalformedMessage("unsupported version '" + std::string(version) + "'");
    auto rest = line.substr(sp1 + 1);
    auto sp2 = rest.find(' ');
    auto code = rest.substr(0, sp2);
    int status = 0;
    auto [end, ec] = std::from_chars(code.data(), code.data() + code.size(), status);
    if (code.size() != 3 || ec != std::errc{} || end != code.data() + code.size()) {
        throw MalformedMessage("bad status code '" + std::string(code) + "'");
    }
    if (!reason_phrase(status)) throw MalformedMessage("status " + std::to_string(status) + " outside the lab subset");

    HttpResponse response;
    response.version = std::string(version);
    response.status = status;
    response.reason = sp2 == std::string_view::npos ? std::string{} : std::string(rest.substr(sp2 + 1));
    response.headers = std::move(parts.headers);
    response.body = std::string(parts.body);
    if (status == 302 && response.headers.count("Location") != 1) {
        throw MalformedMessage("302 response needs exactly one Location header");
    }
    return response;
}

Bytes serialize(const HttpRequest& request) {
    Bytes out;
    out += to_string(request.method);
    out += ' ';
    out += request.uri.target();
    out += ' ';
    out += request.version;
    out += kCrlf;
    append_headers(out, request.headers);
    out += request.body;
    return out;
}

Bytes serialize(const HttpResponse& response) {
    Bytes out;
    out += response.version;
    out += ' ';
    out += std::to_string(response.status);
    out += ' ';
    out += response.reason;
    out += kCrlf;
    append_headers(out, response.headers);
    out += response.body;
    return out;
}

std::optional<std::size_t> complete_message_length(std::string_view buffer) {
    auto end = buffer.find(kTerminator);
    if (end == std::string_view::npos) return std::nullopt;
    std::size_t head_len = end + kTerminator.size();
    std::size_t body_len = 0;
    auto head = buffer.substr(0, end);
    for (auto line : split(head, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        if (iequals(trim(line.substr(0, colon)), "Content-Length")) {
            body_len = parse_content_length(trim(line.substr(colon + 1)));
        }
    }
    if (buffer.size() < head_len + body_len) return std::nullopt;
    return head_len + body_len;
}

}  // namespace csrflab
