#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csrflab/form.hpp"
#include "csrflab/uri.hpp"

namespace csrflab {

enum class FormMethod { Get, Post };

struct HtmlForm {
    std::optional<std::string> id;
    std::string action;  // absolute http URL
    FormMethod method = FormMethod::Get;
    FormPairs fields;    // named inputs, document order

    friend bool operator==(const HtmlForm&, const HtmlForm&) = default;
};

// Picks a form either by element id or by position in document.forms.
struct FormSelector {
    std::variant<std::string, std::size_t> key;

    static FormSelector by_id(std::string id) { return {std::move(id)}; }
    static FormSelector by_index(std::size_t index) { return {index}; }

    friend bool operator==(const FormSelector&, const FormSelector&) = default;
};

std::string to_string(const FormSelector& selector);

struct DocumentContext {
    Origin origin;
    std::optional<std::string> url;
    std::vector<HtmlForm> forms;
    std::optional<FormSelector> auto_submit;
    std::vector<std::string> warnings;

    friend bool operator==(const DocumentContext&, const DocumentContext&) = default;
};

// Lenient, total parser for the small slice of HTML the lab cares about:
// form/input elements and two auto-submit script idioms,
//   document.getElementById("<id>").submit()
//   document.forms[<n>].submit()
// Everything else is skipped. Relative form actions resolve against
// `base`; forms whose action cannot become an absolute http URL are dropped
// with a warning.
DocumentContext parse_html(std::string_view html, Origin origin,
                           std::optional<RequestUri> base = std::nullopt);

const HtmlForm* find_form(const DocumentContext& doc, const FormSelector& selector);

}  // namespace csrflab
