#include "csrflab/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <system_error>

#include "csrflab/errors.hpp"
#include "csrflab/fixtures.hpp"
#include "csrflab/form.hpp"
#include "json.hpp"
#include "post_json.hpp"

namespace csrflab {
namespace {

using detail::Json;
using detail::post_from_json;
using detail::post_to_json;

constexpr std::string_view kAuthority = fixtures::kDefaultAuthority;
const Origin kPublicOrigin = Origin::web("http", "forum.local", 8080);

std::filesystem::path make_temp_dir() {
    auto pattern = (std::filesystem::temp_directory_path() / "csrf-lab-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) throw LabError("cannot create asset directory");
    return pattern;
}

Json cell_json(const AttackOutcome& o) {
    Json evidence = Json::array();
    for (const auto& p : o.evidence) evidence.push_back(post_to_json(p));
    Json j;
    j["scenario"] = std::string(to_string(o.scenario));
    j["defense"] = std::string(to_string(o.defense));
    j["spoof"] = o.spoof;
    j["success"] = o.success;
    j["status"] = o.http_status;
    j["evidence"] = std::move(evidence);
    j["notes"] = o.notes;
    return j;
}

FormPairs post_url_payload(const LabConfig& config) {
    return {{"recip", config.peer},
            {"title", std::string(kPostUrlAttackTitle)},
            {"message", std::string(kPostUrlAttackMessage)}};
}

}  // namespace

std::string_view to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::A1_load_url_asset_form: return "A1_load_url_asset_form";
        case ScenarioId::A2_load_data: return "A2_load_data";
        case ScenarioId::A3_post_url: return "A3_post_url";
        case ScenarioId::A4_forged_client: return "A4_forged_client";
    }
    return "A1_load_url_asset_form";
}

std::optional<ScenarioId> parse_scenario(std::string_view text) {
    for (auto id : kAllScenarios) {
        auto name = to_string(id);
        if (text == name || text == name.substr(0, 2)) return id;
    }
    return std::nullopt;
}

NavigationHook CookieCapture::hook_for(WebView& view) {
    return [this, &view](const std::string& url) {
        std::optional<std::string> cookie;
        try {
            cookie = view.cookie_manager().get_cookie(url);
        } catch (const BadUrl&) {
        }
        entries_.push_back({url, std::move(cookie)});
        return false;
    };
}

std::optional<std::string> CookieCapture::last_cookie() const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->cookie) return it->cookie;
    }
    return std::nullopt;
}

Lab::Lab(const LabConfig& config, DefensePolicy policy) : config_(config) {
    ForumConfig forum;
    forum.policy = policy;
    forum.seed = config.seed;
    forum.admin_token = config.admin_token;
    forum.public_origin = kPublicOrigin;
    server_ = std::make_unique<ForumServer>(forum);

    auto handler = [server = server_.get()](std::string_view raw) { return server->handle_bytes(raw); };
    if (config.transport == TransportKind::Tcp) {
        listener_ = std::make_unique<HttpListener>("127.0.0.1", 0, handler);
        auto tcp = std::make_shared<TcpTransport>();
        tcp->add_route(std::string(kAuthority), listener_->endpoint());
        transport_ = std::move(tcp);
    } else {
        auto local = std::make_shared<InProcessTransport>();
        local->add_route(std::string(kAuthority), handler);
        transport_ = std::move(local);
    }

    asset_root_ = make_temp_dir();
    fixtures::emit(asset_root_, kAuthority, config.victim);
    view_ = std::make_unique<WebView>(transport_, asset_root_);
}

Lab::~Lab() {
    view_.reset();
    if (listener_) listener_->stop();
    std::error_code ec;
    std::filesystem::remove_all(asset_root_, ec);
}

std::string Lab::url(std::string_view path) const {
    return "http://" + std::string(kAuthority) + std::string(path);
}

std::string Lab::admin_state() const {
    auto request = build(HttpMethod::Get, url(forum_paths::kAdminState));
    set_header(request.inner, "Authorization", "Bearer " + config_.admin_token);
    auto response = ForgedClient(transport_).execute(request);
    if (response.status != 200) {
        throw ScenarioSetupFailed("admin_state returned " + std::to_string(response.status));
    }
    return response.body;
}

void Lab::register_user(const std::string& username, const std::string& password) const {
    auto request = build(HttpMethod::Post, url(forum_paths::kRegister),
                         FormPairs{{"username", username}, {"password", password}});
    auto response = ForgedClient(transport_).execute(request);
    if (response.status != 302) {
        throw ScenarioSetupFailed("registering '" + username + "' returned " + std::to_string(response.status));
    }
}

void Lab::install_hook() { view_->set_navigation_hook(capture_.hook_for(*view_)); }

LoadResult drive_login(WebView& view, std::string_view login_page_url, const std::string& username,
                       const std::string& password) {
    view.load_url(login_page_url);
    auto result = view.user_submit_form(FormSelector::by_id("login-form"),
                                        {{"username", username}, {"password", password}});
    if (result.first_status() == 401) throw LoginFailed("server rejected credentials for '" + username + "'");
    if (result.first_status() != 302) {
        throw LoginFailed("login returned status " + std::to_string(result.first_status()));
    }
    return result;
}

std::string victim_login(WebView& view, const CookieCapture& capture, std::string_view login_page_url,
                         const std::string& username, const std::string& password) {
    auto seen = capture.entries().size();
    drive_login(view, login_page_url, username, password);
    const auto& entries = capture.entries();
    for (auto i = entries.size(); i > seen; --i) {
        if (entries[i - 1].cookie) return *entries[i - 1].cookie;
    }
    throw NoCookieCaptured("navigation hook saw no cookie during login");
}

Verification verify_outcome(std::string_view state_before, std::string_view state_after,
                            std::string_view expected_sender, std::string_view expected_title) {
    Json before;
    Json after;
    try {
        before = Json::parse(state_before);
        after = Json::parse(state_after);
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotMismatch(std::string("unparseable snapshot: ") + e.what());
    }

    const auto& users_after = after.at("users");
    for (const auto& u : before.at("users")) {
        if (std::find(users_after.begin(), users_after.end(), u) == users_after.end()) {
            throw SnapshotMismatch("user " + u.dump() + " vanished");
        }
    }
    const auto& sessions_after = after.at("sessions");
    for (const auto& s : before.at("sessions")) {
        if (std::find(sessions_after.begin(), sessions_after.end(), s) == sessions_after.end()) {
            throw SnapshotMismatch("session " + s.dump() + " vanished");
        }
    }
    const auto& posts_before = before.at("posts");
    const auto& posts_after = after.at("posts");
    if (posts_after.size() < posts_before.size() ||
        !std::equal(posts_before.begin(), posts_before.end(), posts_after.begin())) {
        throw SnapshotMismatch("posts of the earlier snapshot are not a prefix of the later one");
    }

    Verification v;
    for (auto it = posts_after.begin() + static_cast<std::ptrdiff_t>(posts_before.size()); it != posts_after.end();
         ++it) {
        auto post = post_from_json(*it);
        if (post.sender != expected_sender) continue;
        if (post.title == expected_title) v.success = true;
        v.evidence.push_back(std::move(post));
    }
    return v;
}

AttackOutcome run_scenario(const LabConfig& config, ScenarioId id, DefensePolicy defense,
                           ScenarioOptions options) {
    AttackOutcome outcome;
    outcome.scenario = id;
    outcome.defense = defense;
    outcome.spoof = options.spoof_origin;

    try {
        Lab lab(config, defense);
        lab.register_user(config.victim, config.victim_password);
        lab.register_user(config.peer, config.peer_password);
        if (options.install_hook) lab.install_hook();

        auto login_url = lab.url(forum_paths::kLoginForm);
        std::string stolen_cookie;
        if (id == ScenarioId::A4_forged_client) {
            stolen_cookie = victim_login(lab.view(), lab.capture(), login_url, config.victim, config.victim_password);
        } else {
            drive_login(lab.view(), login_url, config.victim, config.victim_password);
        }

        outcome.state_before = lab.admin_state();
        std::string_view expected_title = kPostUrlAttackTitle;
        std::string detail;

        switch (id) {
            case ScenarioId::A1_load_url_asset_form:
            case ScenarioId::A2_load_data: {
                expected_title = kFormAttackTitle;
                LoadResult result =
                    id == ScenarioId::A1_load_url_asset_form
                        ? lab.view().load_url("asset:///" + std::string(fixtures::kAttackFormName))
                        : lab.view().load_data(fixtures::attack_form_html(kAuthority, config.victim),
                                               "text/html; charset=utf-8", "UTF-8");
                outcome.http_status = result.first_status();
                if (result.overridden && result.exchanges.empty()) detail = "submission overridden by hook";
                break;
            }
            case ScenarioId::A3_post_url: {
                auto result = lab.view().post_url(lab.url(forum_paths::kNewPm),
                                                  form_urlencode(post_url_payload(config)));
                outcome.http_status = result.first_status();
                break;
            }
            case ScenarioId::A4_forged_client: {
                auto request = build(HttpMethod::Post, lab.url(forum_paths::kNewPm), post_url_payload(config));
                set_cookie_header(request, stolen_cookie);
                if (options.spoof_origin) set_header(request.inner, "Origin", kPublicOrigin.serialize());
                outcome.http_status = ForgedClient(lab.transport()).execute(request).status;
                break;
            }
        }

        outcome.state_after = lab.admin_state();
        auto verdict = verify_outcome(outcome.state_before, outcome.state_after, config.victim, expected_title);
        outcome.success = verdict.success;
        outcome.evidence = std::move(verdict.evidence);
        if (detail.empty()) {
            detail = outcome.success ? "posted as " + config.victim
                                     : "no victim-attributed post; status " + std::to_string(outcome.http_status);
        }
        outcome.notes = std::move(detail);
    } catch (const ScenarioSetupFailed&) {
        throw;
    } catch (const LabError& e) {
        throw ScenarioSetupFailed(e.what());
    }
    return outcome;
}

std::vector<ExpectedCell> expected_grid() {
    using D = DefensePolicy;
    using S = ScenarioId;
    // Success cells answer 302 (post created, redirect to the index).
    return {
        {S::A1_load_url_asset_form, false, D::None, true, 302},
        {S::A1_load_url_asset_form, false, D::CsrfToken, false, 403},
        {S::A1_load_url_asset_form, false, D::OriginCheck, false, 403},
        {S::A1_load_url_asset_form, false, D::SameSiteStrict, false, 401},
        {S::A2_load_data, false, D::None, true, 302},
        {S::A2_load_data, false, D::CsrfToken, false, 403},
        {S::A2_load_data, false, D::OriginCheck, false, 403},
        {S::A2_load_data, false, D::SameSiteStrict, false, 401},
        {S::A3_post_url, false, D::None, true, 302},
        {S::A3_post_url, false, D::CsrfToken, false, 403},
        {S::A3_post_url, false, D::OriginCheck, false, 403},
        {S::A3_post_url, false, D::SameSiteStrict, true, 302},
        {S::A4_forged_client, false, D::None, true, 302},
        {S::A4_forged_client, false, D::CsrfToken, false, 403},
        {S::A4_forged_client, false, D::OriginCheck, false, 403},
        {S::A4_forged_client, false, D::SameSiteStrict, true, 302},
        {S::A4_forged_client, true, D::None, true, 302},
        {S::A4_forged_client, true, D::CsrfToken, false, 403},
        {S::A4_forged_client, true, D::OriginCheck, true, 302},
        {S::A4_forged_client, true, D::SameSiteStrict, true, 302},
    };
}

std::string outcome_json(const AttackOutcome& outcome) { return cell_json(outcome).dump(2); }

std::string MatrixReport::to_json() const {
    Json cells_json = Json::array();
    for (const auto& c : cells) cells_json.push_back(cell_json(c));
    Json root;
    root["seed"] = seed;
    root["version"] = version;
    root["cells"] = std::move(cells_json);
    return root.dump(2) + "\n";
}

const AttackOutcome* MatrixReport::find(ScenarioId scenario, DefensePolicy defense, bool spoof) const {
    for (const auto& c : cells) {
        if (c.scenario == scenario && c.defense == defense && c.spoof == spoof) return &c;
    }
    return nullptr;
}

bool MatrixReport::has_setup_failures() const {
    return std::any_of(cells.begin(), cells.end(), [](const AttackOutcome& c) { return c.setup_failed; });
}

MatrixReport run_matrix(const LabConfig& config, ScenarioOptions base_options) {
    MatrixReport report;
    report.seed = config.seed;
    for (auto defense : kAllPolicies) {
        for (const auto& [id, spoof] : {std::pair{ScenarioId::A1_load_url_asset_form, false},
                                        std::pair{ScenarioId::A2_load_data, false},
                                        std::pair{ScenarioId::A3_post_url, false},
                                        std::pair{ScenarioId::A4_forged_client, false},
                                        std::pair{ScenarioId::A4_forged_client, true}}) {
            auto options = base_options;
            options.spoof_origin = spoof;
            try {
                report.cells.push_back(run_scenario(config, id, defense, options));
            } catch (const ScenarioSetupFailed& e) {
                AttackOutcome failed;
                failed.scenario = id;
                failed.defense = defense;
                failed.spoof = spoof;
                failed.setup_failed = true;
                failed.notes = e.what();
                report.cells.push_back(std::move(failed));
            }
        }
    }
    return report;
}

std::vector<std::string> compare_to_expected(const MatrixReport& report) {
    std::vector<std::string> mismatches;
    auto label = [](const ExpectedCell& e) {
        return std::string(to_string(e.scenario)) + (e.spoof ? "+spoof" : "") + "/" +
               std::string(to_string(e.defense));
    };
    for (const auto& e : expected_grid()) {
        const auto* cell = report.find(e.scenario, e.defense, e.spoof);
        if (!cell) {
            mismatches.push_back(label(e) + ": missing");
        } else if (cell->setup_failed) {
            mismatches.push_back(label(e) + ": " + cell->notes);
        } else if (cell->success != e.success || cell->http_status != e.status) {
            mismatches.push_back(label(e) + ": expected " + (e.success ? "S" : "F") + "(" +
                                 std::to_string(e.status) + ") got " + (cell->success ? "S" : "F") + "(" +
                                 std::to_string(cell->http_status) + ")");
        }
    }
    return mismatches;
}

}  // namespace csrflab
