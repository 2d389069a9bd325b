#include "csrflab/webview.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>

#include "csrflab/errors.hpp"
#include "csrflab/form.hpp"
#include "csrflab/text.hpp"

namespace csrflab {

WebView::WebView(std::shared_ptr<Transport> transport, std::filesystem::path asset_root)
    : transport_(std::move(transport)), asset_root_(std::move(asset_root)) {}

void WebView::check_reentrancy() const {
    if (in_hook_) throw ReentrantLoad("load APIs cannot be called from the navigation hook");
}

void WebView::require_network() const {
    if (!internet_permitted_) throw PermissionDenied("network access is not permitted for this WebView");
}

bool WebView::hook_overrides(const std::string& url) {
    if (!hook_) return false;
    struct Flag {
        bool& flag;
        explicit Flag(bool& f) : flag(f) { flag = true; }
        ~Flag() { flag = false; }
    } scope(in_hook_);
    return hook_(url);
}

void WebView::navigate(Navigation nav, LoadResult& result) {
    for (int hops = 0;; ++hops) {
        const auto url_text = to_string(nav.url);
        if (nav.document_initiated && hook_overrides(url_text)) {
            result.overridden = url_text;
            return;
        }
        require_network();

        auto request = make_request(nav.method, nav.url);
        request.headers.set("Connection", "close");
        if (nav.method == HttpMethod::Post) {
            request.headers.set("Content-Type", "application/x-www-form-urlencoded");
            request.headers.set("Content-Length", std::to_string(nav.body.size()));
            request.body = nav.body;
        }
        if (nav.send_origin && nav.initiator) request.headers.set("Origin", nav.initiator->serialize());
        RequestContext ctx{nav.initiator, Origin::of(nav.url)};
        if (auto cookie = cookies_.cookies_for_request(ctx, nav.url.path)) {
            request.headers.set("Cookie", *cookie);
        }

        auto response = parse_response(transport_->round_trip(nav.url, serialize(request)));
        result.exchanges.push_back({nav.method, url_text, response.status, request.headers});
        cookies_.store_from_response(nav.url, response);

        if (response.status != 302) {
            document_ = parse_html(response.body, Origin::of(nav.url), nav.url);
            return;
        }
        if (hops + 1 > kMaxRedirects) {
            throw TooManyRedirects("more than " + std::to_string(kMaxRedirects) + " redirects from " + url_text);
        }
        nav.url = resolve_url(nav.url, *response.headers.get("Location"));
        nav.method = HttpMethod::Get;
        nav.body.clear();
        nav.document_initiated = true;
    }
}

void WebView::run_auto_submit(LoadResult& result) {
    if (!document_ || !document_->auto_submit) return;
    const HtmlForm* form = find_form(*document_, *document_->auto_submit);
    if (!form) return;
    auto result_of_submit = submit_form(HtmlForm(*form), document_->origin);
    for (auto& e : result_of_submit.exchanges) result.exchanges.push_back(std::move(e));
    if (result_of_submit.overridden) result.overridden = result_of_submit.overridden;
}

void WebView::load_asset(const RequestUri& uri) {
    for (auto segment : split(uri.path, '/')) {
        if (segment == "..") throw AssetEscape("'..' in " + to_string(uri));
    }
    std::filesystem::path relative = uri.path.substr(1);
    auto full = (asset_root_ / relative).lexically_normal();

    std::error_code ec;
    auto root = std::filesystem::weakly_canonical(asset_root_, ec);
    auto resolved = std::filesystem::weakly_canonical(full, ec);
    auto [root_end, _] = std::mismatch(root.begin(), root.end(), resolved.begin(), resolved.end());
    if (ec || root_end != root.end()) throw AssetEscape(to_string(uri) + " resolves outside the asset root");

    std::ifstream in(resolved, std::ios::binary);
    if (!in || std::filesystem::is_directory(resolved)) throw AssetNotFound(to_string(uri));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    document_ = parse_html(content, Origin::opaque(), uri);
}

LoadResult WebView::load_url(std::string_view url) {
    check_reentrancy();
    auto uri = parse_uri(url);
    LoadResult result;
    if (uri.is_http()) {
        navigate({HttpMethod::Get, uri, {}, std::nullopt, false, false}, result);
    } else if (uri.scheme == "file" || uri.scheme == "asset") {
        load_asset(uri);
    } else {
        throw BadUrl("load_url does not take " + uri.scheme + " URLs");
    }
    run_auto_submit(result);
    return result;
}

LoadResult WebView::load_data(std::string_view data, std::string_view mime, std::string_view encoding) {
    check_reentrancy();
    if (!istarts_with(mime, "text/html")) throw UnsupportedMime("'" + std::string(mime) + "'");
    std::string text;
    if (iequals(encoding, "base64")) {
        text = base64_decode(data);
    } else if (iequals(encoding, "UTF-8")) {
        text = std::string(data);
    } else {
        throw BadEncoding("unsupported encoding '" + std::string(encoding) + "'");
    }
    require_utf8(text);
    document_ = parse_html(text, Origin::opaque());
    LoadResult result;
    run_auto_submit(result);
    return result;
}

LoadResult WebView::post_url(std::string_view url, Bytes body) {
    check_reentrancy();
    LoadResult result;
    navigate({HttpMethod::Post, parse_http_uri(url), std::move(body), std::nullopt, false, false}, result);
    return result;
}

LoadResult WebView::submit_form(const HtmlForm& form, const Origin& initiator) {
    check_reentrancy();
    Navigation nav;
    nav.url = parse_http_uri(form.action);
    nav.initiator = initiator;
    nav.send_origin = true;
    nav.document_initiated = true;
    if (form.method == FormMethod::Post) {
        nav.method = HttpMethod::Post;
        nav.body = form_urlencode(form.fields);
    } else {
        nav.url.query = form_urlencode(form.fields);
    }
    LoadResult result;
    navigate(std::move(nav), result);
    return result;
}

LoadResult WebView::user_submit_form(const FormSelector& selector, const FormPairs& field_values) {
    check_reentrancy();
    const HtmlForm* found = document_ ? find_form(*document_, selector) : nullptr;
    if (!found) throw NoSuchForm(to_string(selector));
    HtmlForm form = *found;
    for (const auto& [name, value] : field_values) {
        auto it = std::find_if(form.fields.begin(), form.fields.end(),
                               [&](const auto& field) { return field.first == name; });
        if (name.empty() || it == form.fields.end()) throw NoSuchField("'" + name + "' in " + to_string(selector));
        it->second = value;
    }
    return submit_form(form, document_->origin);
}

Bytes base64_decode(std::string_view text) {
    static constexpr std::string_view alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    if (text.size() % 4 != 0) throw BadEncoding("base64 length is not a multiple of 4");
    std::size_t padding = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '=') {
            if (i + 2 < text.size()) throw BadEncoding("'=' before the final quantum");
            ++padding;
        } else if (padding > 0 || alphabet.find(c) == std::string_view::npos) {
            throw BadEncoding("invalid base64 character");
        }
    }
    if (text.empty()) return {};
    Bytes out(text.size() / 4 * 3, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw BadEncoding("undecodable base64");
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

std::string base64_encode(std::string_view bytes) {
    std::string out((bytes.size() + 2) / 3 * 4 + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

void require_utf8(std::string_view bytes) {
    std::size_t i = 0;
    while (i < bytes.size()) {
        auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            throw BadEncoding("invalid UTF-8 lead byte");
        }
        if (i + len > bytes.size()) throw BadEncoding("truncated UTF-8 sequence");
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) throw BadEncoding("invalid UTF-8 continuation byte");
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            throw BadEncoding("overlong or out-of-range UTF-8 sequence");
        }
        i += len;
    }
}

}  // namespace csrflab
