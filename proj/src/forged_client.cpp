#include "csrflab/forged_client.hpp"

#include "csrflab/uri.hpp"

namespace csrflab {

ForgedRequest build(HttpMethod method, std::string_view url, const std::optional<FormPairs>& body_pairs) {
    ForgedRequest forged{make_request(method, parse_http_uri(url))};
    if (body_pairs) {
        forged.inner.headers.set("Content-Type", "application/x-www-form-urlencoded");
        forged.inner.headers.set("Content-Length", "0");
        set_body(forged.inner, form_urlencode(*body_pairs));
    }
    return forged;
}

ForgedRequest& set_cookie_header(ForgedRequest& request, std::string_view cookie_value) {
    set_header(request.inner, "Cookie", cookie_value);
    return request;
}

HttpResponse ForgedClient::execute(const ForgedRequest& request) const {
    HttpRequest wire = request.inner;
    if (!wire.headers.get("Host")) wire.headers.set("Host", wire.uri.authority());
    if (!wire.body.empty() || wire.headers.get("Content-Length")) {
        wire.headers.set("Content-Length", std::to_string(wire.body.size()));
    }
    return parse_response(transport_->round_trip(wire.uri, serialize(wire)));
}

}  // namespace csrflab
