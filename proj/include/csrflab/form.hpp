#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csrflab {

using FormPairs = std::vector<std::pair<std::string, std::string>>;

// application/x-www-form-urlencoded. Letters, digits and "*-._" pass
// through, space becomes '+', everything else is %XX with uppercase hex.
std::string form_urlencode(const FormPairs& pairs);
std::string form_escape(std::string_view component);

// Inverse of form_urlencode. Throws MalformedEncoding on a '%' that is not
// followed by two hex digits. Empty segments ("a=b&&c=d") are skipped and a
// segment without '=' decodes to an empty value.
FormPairs form_urldecode(std::string_view encoded);

// First value for `key`, if any.
const std::string* find_field(const FormPairs& pairs, std::string_view key);

}  // namespace csrflab
