#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "csrflab/form.hpp"
#include "csrflab/http.hpp"
#include "csrflab/transport.hpp"

namespace csrflab {

// A request built outside any browser policy. Only headers set explicitly
// are sent; no cookie jar is ever consulted.
struct ForgedRequest {
    HttpRequest inner;
};

// Throws BadUrl for non-http URLs.
ForgedRequest build(HttpMethod method, std::string_view url,
                    const std::optional<FormPairs>& body_pairs = std::nullopt);

// Cookie header via first-match set semantics. Throws IllegalHeader.
ForgedRequest& set_cookie_header(ForgedRequest& request, std::string_view cookie_value);

class ForgedClient {
public:
    explicit ForgedClient(std::shared_ptr<Transport> transport) : transport_(std::move(transport)) {}

    // One exchange, no redirect following. Adds only Host and
    // Content-Length bookkeeping. Throws ConnectionFailed,
    // MalformedMessage.
    HttpResponse execute(const ForgedRequest& request) const;

private:
    std::shared_ptr<Transport> transport_;
};

}  // namespace csrflab
