#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csrflab/cookies.hpp"
#include "csrflab/html.hpp"
#include "csrflab/http.hpp"
#include "csrflab/transport.hpp"

namespace csrflab {

// One request/response pair observed by the emulator.
struct Exchange {
    HttpMethod method = HttpMethod::Get;
    std::string url;
    int status = 0;
    // Headers as sent, for inspecting Origin/Cookie attachment.
    HeaderList request_headers;
};

struct LoadResult {
    std::vector<Exchange> exchanges;
    // Set when the navigation hook suppressed a navigation to this URL.
    std::optional<std::string> overridden;
    // Status of the last exchange, 0 when nothing hit the network.
    int final_status() const { return exchanges.empty() ? 0 : exchanges.back().status; }
    // Status of the first exchange, 0 when nothing hit the network.
    int first_status() const { return exchanges.empty() ? 0 : exchanges.front().status; }
};

// Returns true to suppress the navigation to `url`.
using NavigationHook = std::function<bool(const std::string& url)>;

// Emulated embedded browser. Not thread-safe; a hook must not call back
// into the load APIs (ReentrantLoad).
class WebView {
public:
    static constexpr int kMaxRedirects = 5;

    WebView(std::shared_ptr<Transport> transport, std::filesystem::path asset_root);

    CookieStore& cookie_manager() { return cookies_; }
    const CookieStore& cookie_manager() const { return cookies_; }

    void set_internet_permitted(bool permitted) { internet_permitted_ = permitted; }
    bool internet_permitted() const { return internet_permitted_; }

    // Installs (or with an empty function, removes) the navigation hook.
    void set_navigation_hook(NavigationHook hook) { hook_ = std::move(hook); }
    bool has_navigation_hook() const { return static_cast<bool>(hook_); }

    const std::optional<DocumentContext>& current_document() const { return document_; }

    // http, file:// or asset:/// URL. Runs the document's auto-submit, if any.
    LoadResult load_url(std::string_view url);

    // Raw markup; encoding is "UTF-8" or "base64". Opaque origin.
    LoadResult load_data(std::string_view data, std::string_view mime, std::string_view encoding);

    // POST of `body` verbatim as application/x-www-form-urlencoded.
    LoadResult post_url(std::string_view url, Bytes body);

    // Document-initiated submission on behalf of `initiator`.
    LoadResult submit_form(const HtmlForm& form, const Origin& initiator);

    // Fills fields of a form in the current document and submits it with
    // the document's origin as initiator. Throws NoSuchForm, NoSuchField.
    LoadResult user_submit_form(const FormSelector& selector, const FormPairs& field_values);

private:
    struct Navigation {
        HttpMethod method = HttpMethod::Get;
        RequestUri url;
        Bytes body;
        std::optional<Origin> initiator;
        bool send_origin = false;
        bool document_initiated = false;
    };

    void check_reentrancy() const;
    void require_network() const;
    void navigate(Navigation nav, LoadResult& result);
    void run_auto_submit(LoadResult& result);
    bool hook_overrides(const std::string& url);
    void load_asset(const RequestUri& uri);

    std::shared_ptr<Transport> transport_;
    std::filesystem::path asset_root_;
    CookieStore cookies_;
    NavigationHook hook_;
    std::optional<DocumentContext> document_;
    bool internet_permitted_ = true;
    bool in_hook_ = false;
};

// Strict base64 (RFC 4648, padded). Throws BadEncoding.
Bytes base64_decode(std::string_view text);
std::string base64_encode(std::string_view bytes);

// Throws BadEncoding when `bytes` is not well-formed UTF-8.
void require_utf8(std::string_view bytes);

}  // namespace csrflab
