#pragma once

#include "csrflab/errors.hpp"
#include "csrflab/forum.hpp"
#include "json.hpp"

namespace csrflab::detail {

using Json = nlohmann::ordered_json;

inline Json post_to_json(const PostRecord& p) {
    Json j;
    j["seq"] = p.seq;
    j["kind"] = std::string(to_string(p.kind));
    j["sender"] = p.sender;
    j["recipient"] = p.recipient ? Json(*p.recipient) : Json(nullptr);
    j["title"] = p.title;
    j["message"] = p.message;
    return j;
}

// Throws nlohmann::json::exception on missing keys, SnapshotError on a bad kind.
inline PostRecord post_from_json(const Json& j) {
    PostRecord p;
    p.seq = j.at("seq").get<std::uint64_t>();
    auto kind = j.at("kind").get<std::string>();
    if (kind == "topic") {
        p.kind = PostKind::Topic;
    } else if (kind == "private_message") {
        p.kind = PostKind::PrivateMessage;
    } else {
        throw SnapshotError("unknown post kind '" + kind + "'");
    }
    p.sender = j.at("sender").get<std::string>();
    if (!j.at("recipient").is_null()) p.recipient = j.at("recipient").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.message = j.at("message").get<std::string>();
    return p;
}

}  // namespace csrflab::detail
