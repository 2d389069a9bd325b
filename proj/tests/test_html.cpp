#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "csrflab/fixtures.hpp"
#include "csrflab/html.hpp"
#include "generators.hpp"

using namespace csrflab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Origin kForum = Origin::web("http", "forum.local", 8080);

}  // namespace

TEST(ParseHtml, AttackFixture) {
    auto html = read_file(std::string(CSRFLAB_FIXTURE_DIR) + "/attack_form.html");
    ASSERT_FALSE(html.empty());
    auto doc = parse_html(html, Origin::opaque());
    ASSERT_EQ(doc.forms.size(), 1u);
    const auto& form = doc.forms[0];
    EXPECT_EQ(form.id, "post-form");
    EXPECT_EQ(form.method, FormMethod::Post);
    EXPECT_EQ(form.action, "http://forum.local:8080/cgi-bin/Forum/new_pm.php");
    FormPairs want = {{"title", "WebView Attack from android"},
                      {"recip", "sohini"},
                      {"message", "WebView attack message from Android"}};
    EXPECT_EQ(form.fields, want);
    EXPECT_EQ(doc.auto_submit, FormSelector::by_id("post-form"));
    EXPECT_TRUE(doc.warnings.empty());
}

TEST(ParseHtml, FormsIndexIdiom) {
    auto doc = parse_html(R"(<form action="/a" method="POST"><input name="x" value="1"></form>
<form action="/b"></form><script>document.forms[1].submit();</script>)",
                          kForum, parse_uri("http://forum.local:8080/dir/page"));
    ASSERT_EQ(doc.forms.size(), 2u);
    EXPECT_EQ(doc.forms[0].action, "http://forum.local:8080/a");
    EXPECT_EQ(doc.forms[0].method, FormMethod::Post);
    EXPECT_EQ(doc.forms[1].method, FormMethod::Get);
    EXPECT_EQ(doc.auto_submit, FormSelector::by_index(1));
    EXPECT_EQ(find_form(doc, FormSelector::by_index(1)), &doc.forms[1]);
    EXPECT_EQ(find_form(doc, FormSelector::by_index(2)), nullptr);
    EXPECT_EQ(find_form(doc, FormSelector::by_id("nope")), nullptr);
}

TEST(ParseHtml, SingleQuotesAndWhitespace) {
    auto doc = parse_html(R"(<form id='f' action='http://h/x' method='post'></form>
<script>
  document.getElementById( 'f' ) . submit ( ) ;
</script>)",
                          Origin::opaque());
    EXPECT_EQ(doc.auto_submit, FormSelector::by_id("f"));
}

TEST(ParseHtml, OtherScriptsDoNothing) {
    for (const char* script : {"alert(1)", "var f = document.getElementById('f'); f.submit();",
                               "document.getElementById('f').submit(); alert(2);", "", "document.forms[x].submit()"}) {
        auto doc = parse_html(std::string("<form id='f' action='http://h/'></form><script>") + script + "</script>",
                              Origin::opaque());
        EXPECT_FALSE(doc.auto_submit.has_value()) << script;
    }
}

TEST(ParseHtml, AutoSubmitTargetMissing) {
    auto doc = parse_html("<script>document.getElementById('ghost').submit()</script>", Origin::opaque());
    EXPECT_FALSE(doc.auto_submit.has_value());
    EXPECT_FALSE(doc.warnings.empty());
}

TEST(ParseHtml, InputTypesAndEntities) {
    auto doc = parse_html(R"(<FORM action="http://h/p"><INPUT type="text" name="a&amp;b" value="&lt;x&gt; &quot;q&quot;">
<input type="password" name="pw"><input type="checkbox" name="cb" value="1"><input value="anon">
<input type="submit" name="go" value="Go"></FORM>)",
                          Origin::opaque());
    ASSERT_EQ(doc.forms.size(), 1u);
    FormPairs want = {{"a&b", "<x> \"q\""}, {"pw", ""}, {"go", "Go"}};
    EXPECT_EQ(doc.forms[0].fields, want);
}

TEST(ParseHtml, CommentsAreSkipped) {
    auto doc = parse_html("<!-- <form action='http://h/'></form> --><!DOCTYPE html><p>hi</p>", Origin::opaque());
    EXPECT_TRUE(doc.forms.empty());
}

TEST(ParseHtml, UnresolvableActionDropped) {
    auto doc = parse_html("<form action='relative'></form><form action='file:///x'></form>", Origin::opaque());
    EXPECT_TRUE(doc.forms.empty());
    EXPECT_EQ(doc.warnings.size(), 2u);
}

TEST(ParseHtml, FormlessPage) {
    auto doc = parse_html("<html><body>plain</body></html>", kForum);
    EXPECT_TRUE(doc.forms.empty());
    EXPECT_FALSE(doc.auto_submit);
}

TEST(ParseHtml, GeneratedFixtureMatchesFile) {
    auto doc_a = parse_html(fixtures::attack_form_html(), Origin::opaque());
    auto doc_b = parse_html(read_file(std::string(CSRFLAB_FIXTURE_DIR) + "/attack_form.html"), Origin::opaque());
    EXPECT_EQ(doc_a, doc_b);
}

// Any byte soup parses without throwing, and results stay well-formed.
TEST(ParseHtmlProperty, TotalOnRandomInput) {
    proptest::Gen gen(91);
    const std::string pieces[] = {"<form", " action=\"", "http://h/", "\"", ">", "</form>", "<input", " name=",
                                  " value='", "'", "<script>", "</script>", "document.forms[0].submit()",
                                  "<!--", "-->", "&amp;", "&", "<", "\x00", "\xff", " ", "id=f"};
    for (int i = 0; i < 2000; ++i) {
        std::string html;
        auto n = gen.below(30);
        for (std::size_t k = 0; k < n; ++k) {
            if (gen.coin()) {
                html += pieces[gen.below(std::size(pieces))];
            } else {
                html += static_cast<char>(gen.below(256));
            }
        }
        DocumentContext doc;
        ASSERT_NO_THROW(doc = parse_html(html, Origin::opaque())) << html;
        for (const auto& form : doc.forms) EXPECT_TRUE(form.action.starts_with("http://"));
        if (doc.auto_submit) EXPECT_NE(find_form(doc, *doc.auto_submit), nullptr);
    }
}
