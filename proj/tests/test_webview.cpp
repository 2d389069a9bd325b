#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "csrflab/errors.hpp"
#include "csrflab/fixtures.hpp"
#include "csrflab/form.hpp"
#include "csrflab/forum.hpp"
#include "csrflab/transport.hpp"
#include "csrflab/webview.hpp"
#include "generators.hpp"

using namespace csrflab;
namespace paths = csrflab::forum_paths;
namespace fs = std::filesystem;

namespace {

const std::string kForum = "http://forum.local:8080";

std::string forum(std::string_view path) { return kForum + std::string(path); }

class WebViewTest : public ::testing::Test {
protected:
    void SetUp() override { boot(DefensePolicy::None); }

    void TearDown() override {
        if (!asset_root.empty()) fs::remove_all(asset_root);
    }

    void boot(DefensePolicy policy) {
        ForumConfig config;
        config.policy = policy;
        server = std::make_shared<ForumServer>(config);
        server->register_user("sohini", "pw");
        server->register_user("user1", "pw1");

        auto transport = std::make_shared<InProcessTransport>();
        transport->add_route("forum.local:8080", [s = server](std::string_view raw) { return s->handle_bytes(raw); });
        // A host that redirects forever, and one that redirects `n` times.
        transport->add_route("loop.local", [](std::string_view) {
            auto res = make_response(302, "");
            res.headers.set("Location", "http://loop.local/again");
            return serialize(res);
        });
        transport->add_route("hops.local", [](std::string_view raw) {
            auto req = parse_request(raw);
            int n = std::stoi(req.uri.path.substr(1));
            if (n == 0) return serialize(make_response(200, "<p>done</p>", "text/html"));
            auto res = make_response(302, "");
            res.headers.set("Location", "/" + std::to_string(n - 1));
            return serialize(res);
        });

        if (!asset_root.empty()) fs::remove_all(asset_root);
        std::string tmpl = (fs::temp_directory_path() / "csrflab_wv_XXXXXX").string();
        ASSERT_NE(mkdtemp(tmpl.data()), nullptr);
        asset_root = tmpl;
        fixtures::emit(asset_root);
        std::ofstream(asset_root / "plain.html") << "<html><body>nothing here</body></html>";
        view = std::make_unique<WebView>(transport, asset_root);
    }

    // Logs the victim in through the login page; returns the session cookie.
    std::string login() {
        view->load_url(forum(paths::kLoginForm));
        auto result = view->user_submit_form(FormSelector::by_id("login-form"),
                                             {{"username", "sohini"}, {"password", "pw"}});
        EXPECT_EQ(result.first_status(), 302);
        return view->cookie_manager().get_cookie(forum("/")).value_or("");
    }

    std::shared_ptr<ForumServer> server;
    fs::path asset_root;
    std::unique_ptr<WebView> view;
};

}  // namespace

TEST_F(WebViewTest, LoadAssetAutoSubmitsWithOpaqueOrigin) {
    login();
    auto result = view->load_url("asset:///attack_form.html");
    ASSERT_GE(result.exchanges.size(), 1u);
    const auto& post = result.exchanges[0];
    EXPECT_EQ(post.method, HttpMethod::Post);
    EXPECT_EQ(post.url, forum(paths::kNewPm));
    EXPECT_EQ(post.request_headers.get("Origin"), "null");
    EXPECT_TRUE(post.request_headers.get("Cookie").has_value());
    EXPECT_EQ(post.status, 302);
    ASSERT_EQ(server->posts().size(), 1u);
    EXPECT_EQ(server->posts()[0].sender, "sohini");
}

TEST_F(WebViewTest, LoadFileSchemeSameAsAsset) {
    // Offline, so the auto-submit stops before replacing the document.
    view->set_internet_permitted(false);
    EXPECT_THROW(view->load_url("file:///attack_form.html"), PermissionDenied);
    auto doc_file = *view->current_document();
    ASSERT_EQ(doc_file.forms.size(), 1u);
    EXPECT_THROW(view->load_url("asset:///attack_form.html"), PermissionDenied);
    EXPECT_EQ(view->current_document()->forms, doc_file.forms);
}

TEST_F(WebViewTest, FormlessAssetMakesNoRequests) {
    auto result = view->load_url("asset:///plain.html");
    EXPECT_TRUE(result.exchanges.empty());
    EXPECT_EQ(result.final_status(), 0);
    EXPECT_TRUE(view->current_document()->forms.empty());
}

TEST_F(WebViewTest, AssetErrors) {
    EXPECT_THROW(view->load_url("asset:///missing.html"), AssetNotFound);
    EXPECT_THROW(view->load_url("asset:///../etc/passwd"), AssetEscape);
    EXPECT_THROW(view->load_url("file:///sub/../../x"), AssetEscape);
    EXPECT_THROW(view->load_url("ftp://x/"), BadUrl);
}

TEST_F(WebViewTest, PermissionDenied) {
    view->set_internet_permitted(false);
    EXPECT_THROW(view->load_url(forum(paths::kLoginForm)), PermissionDenied);
    EXPECT_THROW(view->post_url(forum(paths::kNewPm), ""), PermissionDenied);
    EXPECT_EQ(server->admin_state(), R"({"users":["sohini","user1"],"sessions":[],"posts":[]})");
}

TEST_F(WebViewTest, LoadDataPlainAndBase64Agree) {
    auto html = fixtures::attack_form_html();
    view->set_internet_permitted(false);
    // Auto-submit needs the network, so compare the parsed documents.
    EXPECT_THROW(view->load_data(html, "text/html", "UTF-8"), PermissionDenied);
    auto plain = *view->current_document();
    EXPECT_THROW(view->load_data(base64_encode(html), "text/html; charset=utf-8", "base64"), PermissionDenied);
    EXPECT_EQ(*view->current_document(), plain);
    EXPECT_TRUE(plain.origin.is_opaque());
}

TEST_F(WebViewTest, LoadDataEmptyAndErrors) {
    auto result = view->load_data("", "text/html", "UTF-8");
    EXPECT_TRUE(result.exchanges.empty());
    EXPECT_TRUE(view->current_document()->forms.empty());
    EXPECT_THROW(view->load_data("!!!!", "text/html", "base64"), BadEncoding);
    EXPECT_THROW(view->load_data("abc", "text/html", "base64"), BadEncoding);
    EXPECT_THROW(view->load_data("\xC3\x28", "text/html", "UTF-8"), BadEncoding);
    EXPECT_THROW(view->load_data("x", "text/html", "latin1"), BadEncoding);
    EXPECT_THROW(view->load_data("x", "text/plain", "UTF-8"), UnsupportedMime);
}

TEST_F(WebViewTest, LoadDataAttackSucceedsWhenLoggedIn) {
    login();
    auto result = view->load_data(fixtures::attack_form_html(), "text/html", "UTF-8");
    ASSERT_EQ(result.exchanges.size(), 2u);  // POST then the redirect to index
    EXPECT_EQ(result.exchanges[0].request_headers.get("Origin"), "null");
    EXPECT_EQ(result.first_status(), 302);
    EXPECT_EQ(result.final_status(), 200);
    EXPECT_EQ(server->posts().size(), 1u);
}

TEST_F(WebViewTest, PostUrlSendsNoOriginButCookies) {
    login();
    std::string body = "recip=user1&title=WebViewAttackTitle&message=HttpAttackMessage";
    auto result = view->post_url(forum(paths::kNewPm), body);
    ASSERT_FALSE(result.exchanges.empty());
    const auto& ex = result.exchanges[0];
    EXPECT_EQ(ex.status, 302);
    EXPECT_FALSE(ex.request_headers.get("Origin").has_value());
    EXPECT_EQ(ex.request_headers.get("Content-Type"), "application/x-www-form-urlencoded");
    EXPECT_EQ(ex.request_headers.get("Content-Length"), "62");
    auto posts = server->posts();
    ASSERT_EQ(posts.size(), 1u);
    EXPECT_EQ(posts[0].recipient, "user1");
    EXPECT_EQ(posts[0].title, "WebViewAttackTitle");
}

TEST_F(WebViewTest, PostUrlWithoutSessionIs401) {
    auto result = view->post_url(forum(paths::kNewPm), "recip=user1&title=t&message=m");
    EXPECT_EQ(result.final_status(), 401);
    EXPECT_THROW(view->post_url("asset:///x", ""), BadUrl);
}

TEST_F(WebViewTest, SubmitFormOriginCheckDenies) {
    boot(DefensePolicy::OriginCheck);
    login();
    auto before = server->admin_state();
    auto result = view->load_url("asset:///attack_form.html");
    EXPECT_EQ(result.first_status(), 403);
    EXPECT_EQ(server->admin_state(), before);
}

TEST_F(WebViewTest, SameSiteStrictWithholdsCookieFromOpaqueInitiator) {
    boot(DefensePolicy::SameSiteStrict);
    login();
    auto result = view->load_url("asset:///attack_form.html");
    ASSERT_FALSE(result.exchanges.empty());
    EXPECT_FALSE(result.exchanges[0].request_headers.get("Cookie").has_value());
    EXPECT_EQ(result.first_status(), 401);
    // The host app still sees it.
    EXPECT_TRUE(view->cookie_manager().get_cookie(forum(paths::kNewPm)).has_value());
}

TEST_F(WebViewTest, SameOriginFormKeepsStrictCookie) {
    boot(DefensePolicy::SameSiteStrict);
    login();
    view->load_url(forum(paths::kNewPmForm));
    auto result = view->user_submit_form(FormSelector::by_id("new-pm-form"),
                                         {{"recip", "user1"}, {"title", "hi"}, {"message", "m"}});
    EXPECT_EQ(result.first_status(), 302);
    EXPECT_EQ(result.exchanges[0].request_headers.get("Origin"), kForum);
    EXPECT_EQ(server->posts().size(), 1u);
}

TEST_F(WebViewTest, CsrfTokenFormWorksForUser) {
    boot(DefensePolicy::CsrfToken);
    login();
    view->load_url(forum(paths::kNewTopicForm));
    auto result = view->user_submit_form(FormSelector::by_index(0), {{"title", "hello"}, {"message", "m"}});
    EXPECT_EQ(result.first_status(), 302);
    EXPECT_EQ(server->posts().size(), 1u);
}

TEST_F(WebViewTest, UserSubmitFormErrors) {
    view->load_url(forum(paths::kLoginForm));
    EXPECT_THROW(view->user_submit_form(FormSelector::by_id("nope"), {}), NoSuchForm);
    EXPECT_THROW(view->user_submit_form(FormSelector::by_index(3), {}), NoSuchForm);
    EXPECT_THROW(view->user_submit_form(FormSelector::by_id("login-form"), {{"ghost", "x"}}), NoSuchField);
    EXPECT_THROW(view->user_submit_form(FormSelector::by_id("login-form"), {{"", "x"}}), NoSuchField);
    WebView blank(std::make_shared<InProcessTransport>(), asset_root);
    EXPECT_THROW(blank.user_submit_form(FormSelector::by_index(0), {}), NoSuchForm);
}

TEST_F(WebViewTest, HookFiresOnDocumentNavigationsOnly) {
    std::vector<std::string> seen;
    view->set_navigation_hook([&](const std::string& url) {
        seen.push_back(url);
        return false;
    });
    view->load_url(forum(paths::kLoginForm));
    EXPECT_TRUE(seen.empty());
    view->user_submit_form(FormSelector::by_id("login-form"), {{"username", "sohini"}, {"password", "pw"}});
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[0], forum(paths::kLogin));
    EXPECT_EQ(seen[1], forum(paths::kIndex));

    seen.clear();
    view->post_url(forum(paths::kNewPm), "recip=user1&title=t&message=m");
    ASSERT_EQ(seen.size(), 1u);  // only the redirect hop
    EXPECT_EQ(seen[0], forum(paths::kIndex));
}

TEST_F(WebViewTest, HookSeesCookieOnLoginRedirect) {
    std::optional<std::string> captured;
    view->set_navigation_hook([&](const std::string& url) {
        if (url == forum(paths::kIndex)) captured = view->cookie_manager().get_cookie(url);
        return false;
    });
    login();
    ASSERT_TRUE(captured.has_value());
    EXPECT_EQ(captured->substr(0, 11), "session_id=");
}

TEST_F(WebViewTest, HookOverrideSuppressesRequest) {
    login();
    auto before = server->admin_state();
    view->set_navigation_hook([](const std::string& url) { return url.find("new_pm") != std::string::npos; });
    auto result = view->load_url("asset:///attack_form.html");
    EXPECT_TRUE(result.exchanges.empty());
    EXPECT_EQ(result.overridden, forum(paths::kNewPm));
    EXPECT_EQ(server->admin_state(), before);
}

TEST_F(WebViewTest, ReentrantLoadRejected) {
    bool threw = false;
    view->set_navigation_hook([&](const std::string&) {
        try {
            view->load_url("asset:///plain.html");
        } catch (const ReentrantLoad&) {
            threw = true;
        }
        return false;
    });
    view->load_url("http://hops.local/1");
    EXPECT_TRUE(threw);
}

TEST_F(WebViewTest, RedirectLimit) {
    auto ok = view->load_url("http://hops.local/5");
    EXPECT_EQ(ok.exchanges.size(), 6u);
    EXPECT_EQ(ok.final_status(), 200);
    EXPECT_THROW(view->load_url("http://hops.local/6"), TooManyRedirects);
    EXPECT_THROW(view->load_url("http://loop.local/"), TooManyRedirects);
}

TEST_F(WebViewTest, UnroutedHostFails) {
    EXPECT_THROW(view->load_url("http://nowhere.local/"), ConnectionFailed);
}

TEST(Base64, KnownVectorsAndRoundTrip) {
    EXPECT_EQ(base64_decode(""), "");
    EXPECT_EQ(base64_decode("Zm9vYmFy"), "foobar");
    EXPECT_EQ(base64_decode("Zm9vYg=="), "foob");
    EXPECT_EQ(base64_encode("fooba"), "Zm9vYmE=");
    EXPECT_THROW(base64_decode("Zm9v\nYmFy"), BadEncoding);
    EXPECT_THROW(base64_decode("Zg=a"), BadEncoding);
    proptest::Gen gen(5);
    for (int i = 0; i < 300; ++i) {
        std::string bytes;
        auto n = gen.below(40);
        for (std::size_t k = 0; k < n; ++k) bytes += static_cast<char>(gen.below(256));
        EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
    }
}

TEST(Utf8, Validation) {
    EXPECT_NO_THROW(require_utf8("plain \xC3\xA9 \xE2\x82\xAC \xF0\x9F\x98\x80"));
    for (const char* bad : {"\x80", "\xC0\xAF", "\xE0\x80\x80", "\xED\xA0\x80", "\xF4\x90\x80\x80", "\xC3"}) {
        EXPECT_THROW(require_utf8(bad), BadEncoding) << bad;
    }
}
