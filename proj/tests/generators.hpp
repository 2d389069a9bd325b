#pragma once

// Random generators for property tests over the wire format and the cookie
// jar. Everything is driven by an explicit std::mt19937 so failures replay.

#include <random>
#include <string>
#include <vector>

#include "csrflab/cookies.hpp"
#include "csrflab/form.hpp"
#include "csrflab/http.hpp"

namespace csrflab::proptest {

class Gen {
public:
    explicit Gen(std::uint32_t seed) : rng_(seed) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin() { return below(2) == 1; }

    std::string from(std::string_view alphabet, std::size_t min_len, std::size_t max_len) {
        std::string out(min_len + below(max_len - min_len + 1), ' ');
        for (auto& c : out) c = alphabet[below(alphabet.size())];
        return out;
    }

    // Arbitrary valid UTF-8, including multi-byte sequences and reserved octets.
    std::string utf8(std::size_t max_chars) {
        static const std::vector<std::string> pieces = {
            "a", "Z", "0", " ", "&", "=", "+", "%", "*", "-", ".", "_", "~", "/", "?", "#",
            "\xC3\xA9", "\xE2\x82\xAC", "\xF0\x9F\x98\x80", "\t", "\n", "\"", "'", ";"};
        std::string out;
        auto n = below(max_chars + 1);
        for (std::size_t i = 0; i < n; ++i) out += pieces[below(pieces.size())];
        return out;
    }

    std::string token(std::size_t max_len = 12) {
        return from("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.!#$%&'*+^`|~", 1, max_len);
    }

    // Printable header value without leading/trailing whitespace.
    std::string header_value() {
        auto v = from("abcdefghijklmnopqrstuvwxyz0123456789 ;=,/:\"()<>@[]{}?\t", 0, 24);
        auto first = v.find_first_not_of(" \t");
        if (first == std::string::npos) return {};
        auto last = v.find_last_not_of(" \t");
        return v.substr(first, last - first + 1);
    }

    std::string host() { return from("abcdefghijklmnopqrstuvwxyz", 1, 8) + (coin() ? ".local" : ""); }

    std::string path() {
        std::string p;
        auto segments = below(4);
        for (std::size_t i = 0; i < segments; ++i) p += "/" + from("abcdefghijklmnopqrstuvwxyz0123456789._-%", 0, 8);
        return p.empty() ? "/" : p;
    }

    FormPairs pairs(bool non_empty_keys = true) {
        FormPairs out;
        auto n = below(6);
        for (std::size_t i = 0; i < n; ++i) {
            auto key = utf8(6);
            if (non_empty_keys && key.empty()) key = "k";
            out.emplace_back(key, utf8(10));
        }
        return out;
    }

    std::string body() { return coin() ? std::string{} : from(std::string("abc=&%+\r\n\0\xff", 11), 1, 40); }

    HttpRequest request() {
        static constexpr HttpMethod methods[] = {HttpMethod::Get,    HttpMethod::Head,  HttpMethod::Post,
                                                 HttpMethod::Put,    HttpMethod::Delete, HttpMethod::Trace,
                                                 HttpMethod::Options};
        RequestUri uri;
        uri.host = host();
        uri.port = coin() ? 80 : static_cast<std::uint16_t>(1 + below(65535));
        uri.path = path();
        if (coin()) uri.query = from("abc=&+%0-9", 0, 10);
        auto req = make_request(methods[below(7)], uri);
        add_headers(req.headers);
        set_body(req, body());
        return req;
    }

    HttpResponse response() {
        static constexpr int statuses[] = {200, 302, 400, 401, 403, 404, 500};
        auto res = make_response(statuses[below(7)], body());
        if (res.status == 302) res.headers.set("Location", "/cgi-bin/Forum/index.php");
        add_headers(res.headers);
        auto cookies = below(3);
        for (std::size_t i = 0; i < cookies; ++i) res.headers.add("Set-Cookie", token() + "=" + token());
        return res;
    }

    // Jar over a small host/path universe so collisions are frequent.
    CookieStore cookie_store() {
        static const std::vector<std::string> hosts = {"forum.local", "evil.local", "other.host"};
        static const std::vector<std::string> paths = {"/", "/cgi-bin", "/cgi-bin/Forum", "/admin"};
        CookieStore store;
        auto n = below(8);
        for (std::size_t i = 0; i < n; ++i) {
            Cookie c;
            c.name = "c" + std::to_string(below(5));
            c.value = from("abcdef0123456789", 0, 8);
            c.domain = hosts[below(hosts.size())];
            c.path = paths[below(paths.size())];
            c.same_site = coin() ? SameSite::Strict : SameSite::None;
            store.store(c);
        }
        return store;
    }

private:
    void add_headers(HeaderList& headers) {
        auto n = below(5);
        for (std::size_t i = 0; i < n; ++i) {
            auto name = token();
            if (iequals_any(name)) name = "X-" + name;
            headers.add(name, header_value());
        }
    }

    static bool iequals_any(const std::string& name) {
        std::string lower;
        for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return lower == "host" || lower == "content-length" || lower == "transfer-encoding" ||
               lower == "location" || lower == "set-cookie";
    }

    std::mt19937 rng_;
};

}  // namespace csrflab::proptest
