#include "csrflab/form.hpp"

#include "csrflab/errors.hpp"

namespace csrflab {
namespace {

constexpr char kHex[] = "0123456789ABCDEF";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool passes_verbatim(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '*' || c == '-' || c == '.' || c == '_';
}

std::string unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '+') {
            out += ' ';
        } else if (c == '%') {
            int hi = i + 1 < s.size() ? hex_value(s[i + 1]) : -1;
            int lo = i + 2 < s.size() ? hex_value(s[i + 2]) : -1;
            if (hi < 0 || lo < 0) {
                throw MalformedEncoding("'%' not followed by two hex digits in '" + std::string(s) + "'");
            }
            out += static_cast<char>(hi * 16 + lo);
            i += 2;
        } else {
            out += c;
        }
    }
    return out;
}

}  // namespace

std::string form_escape(std::string_view component) {
    std::string out;
    out.reserve(component.size());
    for (unsigned char c : component) {
        if (passes_verbatim(c)) {
            out += static_cast<char>(c);
        } else if (c == ' ') {
            out += '+';
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0x0F];
        }
    }
    return out;
}

std::string form_urlencode(const FormPairs& pairs) {
    std::string out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0) out += '&';
        out += form_escape(pairs[i].first);
        out += '=';
        out += form_escape(pairs[i].second);
    }
    return out;
}

FormPairs form_urldecode(std::string_view encoded) {
    FormPairs pairs;
    std::size_t start = 0;
    while (start <= encoded.size()) {
        auto amp = encoded.find('&', start);
        if (amp == std::string_view::npos) amp = encoded.size();
        auto segment = encoded.substr(start, amp - start);
        start = amp + 1;
        if (segment.empty()) continue;
        auto eq = segment.find('=');
        if (eq == std::string_view::npos) {
            pairs.emplace_back(unescape(segment), std::string{});
        } else {
            pairs.emplace_back(unescape(segment.substr(0, eq)), unescape(segment.substr(eq + 1)));
        }
    }
    return pairs;
}

const std::string* find_field(const FormPairs& pairs, std::string_view key) {
    for (const auto& [k, v] : pairs) {
        if (k == key) return &v;
    }
    return nullptr;
}

}  // namespace csrflab
