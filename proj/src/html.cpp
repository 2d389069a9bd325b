#include "csrflab/html.hpp"

#include <cctype>
#include <charconv>
#include <regex>

#include "csrflab/errors.hpp"
#include "csrflab/text.hpp"

namespace csrflab {
namespace {

struct Tag {
    std::string name;  // lowercased
    bool closing = false;
    std::vector<std::pair<std::string, std::string>> attributes;  // names lowercased

    std::optional<std::string> attr(std::string_view key) const {
        for (const auto& [k, v] : attributes) {
            if (k == key) return v;
        }
        return std::nullopt;
    }
};

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += s[i];
            continue;
        }
        auto entity = s.substr(i + 1, semi - i - 1);
        std::optional<char> decoded;
        if (entity == "amp") decoded = '&';
        else if (entity == "lt") decoded = '<';
        else if (entity == "gt") decoded = '>';
        else if (entity == "quot") decoded = '"';
        else if (entity == "apos") decoded = '\'';
        else if (entity.size() > 1 && entity[0] == '#') {
            unsigned code = 0;
            bool hex = entity[1] == 'x' || entity[1] == 'X';
            auto digits = entity.substr(hex ? 2 : 1);
            auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), code, hex ? 16 : 10);
            if (!digits.empty() && ec == std::errc{} && end == digits.data() + digits.size() && code < 0x80) {
                decoded = static_cast<char>(code);
            }
        }
        if (decoded) {
            out += *decoded;
            i = semi;
        } else {
            out += s[i];
        }
    }
    return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Parses the tag starting at html[pos] == '<'. Returns nullopt when the
// text there is not a tag; `pos` is moved past whatever was consumed.
std::optional<Tag> read_tag(std::string_view html, std::size_t& pos) {
    std::size_t i = pos + 1;
    Tag tag;
    if (i < html.size() && html[i] == '/') {
        tag.closing = true;
        ++i;
    }
    std::size_t name_start = i;
    while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-')) ++i;
    if (i == name_start || !std::isalpha(static_cast<unsigned char>(html[name_start]))) {
        pos += 1;
        return std::nullopt;
    }
    tag.name = to_lower(html.substr(name_start, i - name_start));

    while (i < html.size() && html[i] != '>') {
        if (is_space(html[i]) || html[i] == '/') {
            ++i;
            continue;
        }
        std::size_t key_start = i;
        while (i < html.size() && !is_space(html[i]) && html[i] != '=' && html[i] != '>' && html[i] != '/') ++i;
        std::string key = to_lower(html.substr(key_start, i - key_start));
        while (i < html.size() && is_space(html[i])) ++i;
        std::string value;
        if (i < html.size() && html[i] == '=') {
            ++i;
            while (i < html.size() && is_space(html[i])) ++i;
            if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
                char quote = html[i++];
                auto close = html.find(quote, i);
                if (close == std::string_view::npos) close = html.size();
                value = decode_entities(html.substr(i, close - i));
                i = close + 1;
            } else {
                std::size_t v_start = i;
                while (i < html.size() && !is_space(html[i]) && html[i] != '>') ++i;
                value = decode_entities(html.substr(v_start, i - v_start));
            }
        }
        if (!key.empty()) tag.attributes.emplace_back(std::move(key), std::move(value));
    }
    pos = std::min(i + 1, html.size());
    return tag;
}

std::optional<FormSelector> match_auto_submit(const std::string& script) {
    static const std::regex by_id(
        R"re(\s*document\s*\.\s*getElementById\s*\(\s*(?:"([^"]*)"|'([^']*)')\s*\)\s*\.\s*submit\s*\(\s*\)\s*;?\s*)re");
    static const std::regex by_index(
        R"re(\s*document\s*\.\s*forms\s*\[\s*(\d{1,9})\s*\]\s*\.\s*submit\s*\(\s*\)\s*;?\s*)re");
    std::smatch m;
    if (std::regex_match(script, m, by_id)) {
        return FormSelector::by_id(m[1].matched ? m[1].str() : m[2].str());
    }
    if (std::regex_match(script, m, by_index)) {
        return FormSelector::by_index(static_cast<std::size_t>(std::stoul(m[1].str())));
    }
    return std::nullopt;
}

class FormBuilder {
public:
    FormBuilder(DocumentContext& doc, const std::optional<RequestUri>& base) : doc_(doc), base_(base) {}

    bool open() const { return current_.has_value(); }

    void start(const Tag& tag) {
        if (current_) return;  // nested <form> start tags are ignored
        current_.emplace();
        current_->form.id = tag.attr("id");
        auto method = tag.attr("method");
        current_->form.method = method && iequals(*method, "post") ? FormMethod::Post : FormMethod::Get;
        current_->raw_action = tag.attr("action").value_or("");
    }

    void input(const Tag& tag) {
        if (!current_) return;
        auto type = to_lower(tag.attr("type").value_or("text"));
        if (type != "hidden" && type != "text" && type != "password" && type != "submit") return;
        auto name = tag.attr("name");
        if (!name || name->empty()) return;
        current_->form.fields.emplace_back(*name, tag.attr("value").value_or(""));
    }

    void finish() {
        if (!current_) return;
        auto pending = std::move(*current_);
        current_.reset();
        auto resolved = resolve(pending.raw_action);
        if (!resolved) {
            doc_.warnings.push_back("dropped form with unresolvable action '" + pending.raw_action + "'");
            return;
        }
        pending.form.action = *resolved;
        doc_.forms.push_back(std::move(pending.form));
    }

private:
    struct Pending {
        HtmlForm form;
        std::string raw_action;
    };

    std::optional<std::string> resolve(std::string_view action) const {
        try {
            RequestUri uri;
            if (base_) {
                uri = resolve_url(*base_, trim(action));
            } else {
                uri = parse_uri(trim(action));
            }
            if (!uri.is_http()) return std::nullopt;
            return to_string(uri);
        } catch (const BadUrl&) {
            return std::nullopt;
        }
    }

    DocumentContext& doc_;
    const std::optional<RequestUri>& base_;
    std::optional<Pending> current_;
};

}  // namespace

std::string to_string(const FormSelector& selector) {
    if (const auto* id = std::get_if<std::string>(&selector.key)) return "#" + *id;
    return "forms[" + std::to_string(std::get<std::size_t>(selector.key)) + "]";
}

DocumentContext parse_html(std::string_view html, Origin origin, std::optional<RequestUri> base) {
    DocumentContext doc;
    doc.origin = std::move(origin);
    if (base) doc.url = to_string(*base);

    FormBuilder forms(doc, base);
    std::vector<FormSelector> candidates;

    std::size_t pos = 0;
    while (pos < html.size()) {
        auto lt = html.find('<', pos);
        if (lt == std::string_view::npos) break;
        pos = lt;
        if (html.substr(pos, 4) == "<!--") {
            auto end = html.find("-->", pos + 4);
            pos = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }
        if (html.substr(pos, 2) == "<!" || html.substr(pos, 2) == "<?") {
            auto end = html.find('>', pos);
            pos = end == std::string_view::npos ? html.size() : end + 1;
            continue;
        }
        auto tag = read_tag(html, pos);
        if (!tag) continue;

        if (tag->name == "form") {
            if (tag->closing) {
                forms.finish();
            } else {
                forms.start(*tag);
            }
        } else if (tag->name == "input" && !tag->closing) {
            forms.input(*tag);
        } else if (tag->name == "script" && !tag->closing) {
            // Script bodies are raw text up to the next </script.
            std::size_t end = pos;
            while (end < html.size()) {
                end = html.find("</", end);
                if (end == std::string_view::npos) {
                    end = html.size();
                    break;
                }
                if (istarts_with(html.substr(end + 2), "script")) break;
                end += 2;
            }
            if (auto selector = match_auto_submit(std::string(html.substr(pos, end - pos)))) {
                candidates.push_back(std::move(*selector));
            }
            pos = end;
        }
    }
    forms.finish();

    for (auto& candidate : candidates) {
        if (find_form(doc, candidate)) {
            doc.auto_submit = std::move(candidate);
            break;
        }
        doc.warnings.push_back("auto-submit selector " + to_string(candidate) + " matches no form");
    }
    return doc;
}

const HtmlForm* find_form(const DocumentContext& doc, const FormSelector& selector) {
    if (const auto* id = std::get_if<std::string>(&selector.key)) {
        for (const auto& f : doc.forms) {
            if (f.id == *id) return &f;
        }
        return nullptr;
    }
    auto index = std::get<std::size_t>(selector.key);
    return index < doc.forms.size() ? &doc.forms[index] : nullptr;
}

}  // namespace csrflab
